"""CSV ingestion, trace/ranking files, run configuration and report serialisation."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .core import FeatureId, MovementRecord, Ranking, make_features
from .dataset import Dataset
from .exceptions import InputError, LabelError, ParseError
from .explainers import ExplainerSpec
from .mip import EliminationTrace, ScoreTable, StabilityReport
from .models import ModelSpec

REPORT_SCHEMA = "mipxai.report/1"
BUNDLED_TRACES = ("cardiac",)


def _label_order(values):
    """Sorted distinct labels: numerically if every label parses as a number."""
    distinct = set(values)
    try:
        return sorted(distinct, key=float)
    except ValueError:
        return sorted(distinct)


def load_csv(path, target_column: str) -> Dataset:
    """Read a header-first CSV; every non-target column must be a finite number."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if target_column not in header:
            raise ParseError(f"{path}: target column {target_column!r} not in header {header}",
                             column=target_column)
        t_idx = header.index(target_column)
        feat_idx = [i for i in range(len(header)) if i != t_idx]
        names = [header[i] for i in feat_idx]
        rows, labels = [], []
        for r, record in enumerate(reader, start=1):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise ParseError(
                    f"{path}: row {r} has {len(record)} cells, header has {len(header)}", row=r)
            values = []
            for i in feat_idx:
                cell = record[i].strip()
                if cell == "":
                    raise ParseError(f"{path}: missing value at row {r}, column {header[i]!r}",
                                     row=r, column=header[i])
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: non-numeric value {cell!r} at row {r}, column {header[i]!r}",
                        row=r, column=header[i]) from None
                if not math.isfinite(v):
                    raise ParseError(
                        f"{path}: non-finite value {cell!r} at row {r}, column {header[i]!r}",
                        row=r, column=header[i])
                values.append(v)
            label = record[t_idx].strip()
            if label == "":
                raise ParseError(f"{path}: missing value at row {r}, column {target_column!r}",
                                 row=r, column=target_column)
            rows.append(values)
            labels.append(label)
    classes = _label_order(labels)
    if len(classes) != 2:
        raise LabelError(
            f"{path}: target {target_column!r} must have exactly 2 classes, found {len(classes)}")
    code = {c: i for i, c in enumerate(classes)}
    X = np.array(rows, dtype=float).reshape(len(rows), len(names))
    y = np.array([code[v] for v in labels], dtype=np.int64)
    return Dataset(make_features(names), X, y, tuple(classes))


def write_csv(data: Dataset, path_or_file, target_name: str = "label"):
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*data.feature_names, target_name])
        for row, label in zip(data.X, data.y):
            w.writerow([repr(float(v)) for v in row] + [data.classes[int(label)]])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            emit(fh)


def write_matrix_csv(matrix, names, path_or_file):
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["", *names])
        for name, row in zip(names, matrix):
            w.writerow([name] + ["nan" if np.isnan(v) else repr(float(v)) for v in row])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            emit(fh)


def _content_lines(text):
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            yield line


def parse_trace(text: str) -> EliminationTrace:
    """One ranking per line, comma-separated names, most important first, longest first."""
    steps = [[name.strip() for name in line.split(",")] for line in _content_lines(text)]
    return EliminationTrace.from_names(steps)


def read_trace(path) -> EliminationTrace:
    return parse_trace(Path(path).read_text(encoding="utf-8"))


def bundled_trace(name: str = "cardiac") -> EliminationTrace:
    if name not in BUNDLED_TRACES:
        raise InputError(f"unknown bundled trace {name!r}; available: {BUNDLED_TRACES}")
    text = resources.files("mipxai.data").joinpath(f"{name}_trace.txt").read_text("utf-8")
    return parse_trace(text)


def format_trace(trace: EliminationTrace) -> str:
    return "".join(",".join(r.names) + "\n" for r in trace.rankings)


def read_ranking(path) -> list[str]:
    """One feature name per line, most important first."""
    names = list(_content_lines(Path(path).read_text(encoding="utf-8")))
    if len(set(names)) != len(names):
        raise ParseError(f"{path}: duplicate feature names")
    return names


def read_coding(path) -> dict[str, int]:
    """``name,code`` lines mapping feature names to integer codes."""
    coding = {}
    for n, line in enumerate(_content_lines(Path(path).read_text(encoding="utf-8")), start=1):
        parts = [p.strip() for p in line.split(",")]
        try:
            name, code = parts
            coding[name] = int(code)
        except ValueError:
            raise ParseError(f"{path}: line {n} is not 'name,code'", row=n) from None
    return coding


@dataclass
class RunConfig:
    data: str | None = None
    target: str | None = None
    model: str = "logistic_regression"
    grid: list[dict[str, Any]] | None = None
    explainer: ExplainerSpec = field(default_factory=ExplainerSpec)
    test_fraction: float = 0.2
    folds: int = 10
    seed: int = 0
    threads: int = 1
    out: str | None = None
    deterministic: bool = False

    def validate(self):
        if self.data is not None and not str(self.data):
            raise InputError("data path is empty")
        if self.out is not None and not str(self.out):
            raise InputError("output path is empty")
        if not 0 < self.test_fraction < 1:
            raise InputError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.folds < 2:
            raise InputError(f"folds must be >= 2, got {self.folds}")
        if self.threads < 1:
            raise InputError(f"threads must be >= 1, got {self.threads}")
        if self.grid is not None:
            for entry in self.grid:
                ModelSpec(self.model, entry)
        if self.deterministic:
            self.threads = 1
        return self

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["explainer"] = _explainer_dict(self.explainer)
        return out


def _explainer_dict(spec: ExplainerSpec) -> dict[str, Any]:
    return {f.name: getattr(spec, f.name) for f in fields(spec)}


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    """Apply a JSON config file on top of ``base``; unknown keys are rejected."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg}, line {exc.lineno})") from None
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    return config_from_dict(raw, base)


def config_from_dict(raw: dict[str, Any], base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    known = {f.name for f in fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    updates = dict(raw)
    if "explainer" in updates:
        ex = updates["explainer"]
        if isinstance(ex, str):
            ex = {"kind": ex}
        updates["explainer"] = replace(cfg.explainer, **ex)
    return replace(cfg, **updates)


def report_to_dict(report: StabilityReport) -> dict[str, Any]:
    features = sorted(report.base_ranking, key=lambda f: f.ordinal)
    spec = report.model_spec
    return {
        "schema": REPORT_SCHEMA,
        "tool_version": report.meta.get("version", __version__),
        "seed": report.meta.get("seed"),
        "config": report.meta,
        "model": None if spec is None else {
            "family": spec.family, "hyperparameters": dict(spec.hyperparameters)},
        "features": [{"name": f.name, "ordinal": f.ordinal} for f in features],
        "base_ranking": list(report.base_ranking.names),
        "trace": {
            "rankings": [list(r.names) for r in report.trace.rankings],
            "removed": [f.name for f in report.trace.removed],
            "per_step_accuracy": list(report.trace.per_step_accuracy),
        },
        "x_terms": {f.name: [[n, x] for n, x in report.scores.x_terms[f]] for f in features},
        "mip": {f.name: report.scores.mip[f] for f in features},
        "mip_ranking": list(report.scores.mip_ranking.names),
        "movements": [
            {"n_before": m.n_before, "movement": m.movement, "max_movement": m.max_movement,
             "movement_rate": m.movement_rate}
            for m in report.movements
        ],
        "nmr": report.nmr,
        "sd": report.sd,
    }


def dumps_report(report: StabilityReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, allow_nan=False) + "\n"


def write_report(report: StabilityReport, path) -> None:
    Path(path).write_text(dumps_report(report), encoding="utf-8")


def report_from_dict(doc: dict[str, Any]) -> StabilityReport:
    if doc.get("schema") != REPORT_SCHEMA:
        raise ParseError(f"unsupported report schema {doc.get('schema')!r}")
    ids = {f["name"]: FeatureId(f["ordinal"], f["name"]) for f in doc["features"]}

    def ranking(names):
        return Ranking(tuple(ids[n] for n in names))

    trace = EliminationTrace(
        tuple(ranking(r) for r in doc["trace"]["rankings"]),
        tuple(ids[n] for n in doc["trace"]["removed"]),
        tuple(doc["trace"]["per_step_accuracy"]),
    )
    scores = ScoreTable(
        mip={ids[n]: v for n, v in doc["mip"].items()},
        x_terms={ids[n]: tuple((int(a), float(b)) for a, b in t)
                 for n, t in doc["x_terms"].items()},
        sd=doc["sd"],
        mip_ranking=ranking(doc["mip_ranking"]),
    )
    movements = tuple(MovementRecord(m["n_before"], m["movement"], m["max_movement"])
                      for m in doc["movements"])
    model = doc.get("model")
    spec = None if model is None else ModelSpec(model["family"], model["hyperparameters"])
    return StabilityReport(ranking(doc["base_ranking"]), trace, scores, movements,
                           doc["nmr"], doc["sd"], spec, doc.get("config") or {})


def read_report(path) -> StabilityReport:
    return report_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
