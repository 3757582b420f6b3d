"""Iterative top-feature elimination, MIP scores and the movement-rate index.

At every step the model is retrained on the surviving columns, explained on
the test split, and the top-ranked feature is dropped, until two features
remain.  Each feature's MIP score sums ``position / n_surviving`` over every
ranking it appears in; low scores mark features that reach the top quickly.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence, Union


from . import __version__
from .core import (
    FeatureId,
    MovementRecord,
    Ranking,
    displacement,
    max_possible_movement,
    ranking_from_importances,
)
from .dataset import Dataset, split
from .exceptions import DomainError, EliminationError, MIPError, StructuralError
from .explainers import ExplainerSpec, explain_global, select_background
from .models import FittedModel, ModelSpec, accuracy, train, tune

ImportanceFn = Callable[[FittedModel, Dataset, Dataset], Mapping[FeatureId, float]]


@dataclass(frozen=True)
class EliminationTrace:
    rankings: tuple[Ranking, ...]
    removed: tuple[FeatureId, ...] = ()
    per_step_accuracy: tuple[float, ...] = ()

    def __post_init__(self):
        rankings = tuple(self.rankings)
        object.__setattr__(self, "rankings", rankings)
        object.__setattr__(self, "per_step_accuracy", tuple(self.per_step_accuracy))
        if not rankings:
            raise StructuralError("trace holds no rankings")
        nf = len(rankings[0])
        if nf < 2:
            raise StructuralError("first ranking must hold at least two features")
        if [len(r) for r in rankings] != list(range(nf, 1, -1)):
            raise StructuralError(
                f"ranking lengths must run {nf} down to 2, got {[len(r) for r in rankings]}"
            )
        for k in range(len(rankings) - 1):
            if rankings[k + 1].feature_set() != frozenset(rankings[k].features[1:]):
                raise StructuralError(
                    f"step {k + 1}: ranking is not the previous one minus its head "
                    f"{rankings[k].head.name!r}"
                )
        removed = tuple(r.head for r in rankings[:-1])
        if self.removed and tuple(self.removed) != removed:
            raise StructuralError("removed sequence disagrees with ranking heads")
        object.__setattr__(self, "removed", removed)

    @property
    def n_features(self) -> int:
        return len(self.rankings[0])

    @property
    def base_ranking(self) -> Ranking:
        return self.rankings[0]

    @classmethod
    def from_names(cls, steps: Sequence[Sequence[str]]) -> "EliminationTrace":
        """Build a trace from name lists; ordinals follow the first (longest) list."""
        if not steps:
            raise StructuralError("trace holds no rankings")
        ids = {name: FeatureId(i, name) for i, name in enumerate(steps[0])}
        try:
            rankings = [Ranking(tuple(ids[n] for n in step)) for step in steps]
        except KeyError as exc:
            raise StructuralError(f"unknown feature {exc.args[0]!r} in trace") from None
        return cls(tuple(rankings))


@dataclass(frozen=True)
class ScoreTable:
    mip: dict[FeatureId, float]
    x_terms: dict[FeatureId, tuple[tuple[int, float], ...]]
    sd: float
    mip_ranking: Ranking


@dataclass(frozen=True)
class StabilityReport:
    base_ranking: Ranking
    trace: EliminationTrace
    scores: ScoreTable
    movements: tuple[MovementRecord, ...]
    nmr: float
    sd: float
    model_spec: ModelSpec | None = None
    meta: dict[str, Any] = field(default_factory=dict)


def mip_scores(trace: EliminationTrace) -> ScoreTable:
    """Sum of position/size over every ranking of the trace, per feature.

    The ranking at which a feature sits on top (just before its removal) and
    the final two-feature ranking both contribute.
    """
    terms: dict[FeatureId, list[tuple[int, float]]] = {f: [] for f in trace.base_ranking}
    for ranking in trace.rankings:
        n = len(ranking)
        for i, feature in enumerate(ranking, start=1):
            terms[feature].append((n, i / n))
    mip = {f: float(sum(x for _, x in t)) for f, t in terms.items()}
    order = sorted(mip, key=lambda f: (mip[f], f.ordinal))
    return ScoreTable(
        mip=mip,
        x_terms={f: tuple(t) for f, t in terms.items()},
        sd=_sample_sd(list(mip.values())),
        mip_ranking=Ranking(tuple(order)),
    )


def _sample_sd(values):
    if len(values) < 2:
        raise DomainError("standard deviation needs at least two scores")
    return statistics.stdev(values)


def score_sd(table: ScoreTable) -> float:
    """Sample standard deviation (n - 1 divisor) of the MIP scores."""
    return _sample_sd(list(table.mip.values()))


def nmr(trace: EliminationTrace) -> tuple[float, tuple[MovementRecord, ...]]:
    """Mean movement rate over the NF - 2 consecutive ranking pairs."""
    if trace.n_features < 3:
        raise DomainError("movement rate needs at least three features")
    records = []
    for prev, nxt in zip(trace.rankings, trace.rankings[1:]):
        records.append(MovementRecord(len(prev), displacement(prev, nxt),
                                      max_possible_movement(len(nxt))))
    value = sum(r.movement_rate for r in records) / len(records)
    return value, tuple(records)


def run_elimination(model_spec: ModelSpec, explainer: Union[ExplainerSpec, ImportanceFn],
                    train_data: Dataset, test_data: Dataset, seed: int = 0,
                    threads: int = 1) -> EliminationTrace:
    """Retrain, explain, rank and drop the top feature until two remain.

    ``explainer`` is either an :class:`ExplainerSpec` or a callable
    ``(model, train_subset, test_subset) -> {feature: importance}``.
    """
    if train_data.features != test_data.features:
        raise StructuralError("train and test splits carry different features")
    if train_data.n_features < 3:
        raise DomainError(f"elimination needs at least 3 features, got {train_data.n_features}")

    if isinstance(explainer, ExplainerSpec):
        bg_rows = select_background(train_data, explainer.background_size, explainer.seed)

        def importance(model, tr, te):
            return explain_global(model, tr.X[bg_rows], te, explainer, threads)
    else:
        importance = explainer

    surviving = list(train_data.features)
    rankings: list[Ranking] = []
    accuracies: list[float] = []
    while len(surviving) >= 2:
        tr = train_data.select(surviving)
        te = test_data.select(surviving)
        try:
            model = train(model_spec, tr, seed)
            scores = importance(model, tr, te)
            ranking = ranking_from_importances(
                {f: float(scores[f]) for f in surviving})
        except MIPError as exc:
            raise EliminationError(
                f"step with {len(surviving)} features failed: {exc.describe()}",
                rankings, tuple(r.head for r in rankings),
            ) from exc
        rankings.append(ranking)
        accuracies.append(accuracy(model, te))
        surviving = [f for f in ranking if f != ranking.head]
        # keep column order stable across steps
        surviving.sort(key=lambda f: f.ordinal)
    return EliminationTrace(tuple(rankings), per_step_accuracy=tuple(accuracies))


def stability_report(model: Union[str, ModelSpec], explainer: Union[ExplainerSpec, ImportanceFn],
                     data: Dataset, *, test_fraction: float = 0.2, folds: int = 10,
                     grid: Sequence[Mapping[str, Any]] | None = None, seed: int = 0,
                     threads: int = 1) -> StabilityReport:
    """split -> tune -> eliminate -> MIP / NMR / SD.

    A family name (or an explicit ``grid``) triggers cross-validated tuning on
    the training split; a :class:`ModelSpec` without a grid is used as given.
    Tuning runs once, on all features; later steps reuse the chosen spec.
    """
    if data.n_features < 3:
        raise DomainError(f"need at least 3 features, got {data.n_features}")
    train_data, test_data = split(data, test_fraction, seed)
    if isinstance(model, str):
        spec = tune(model, grid, train_data, folds, seed, threads)
    elif grid is not None:
        spec = tune(model.family, grid, train_data, folds, seed, threads)
    else:
        spec = model
    trace = run_elimination(spec, explainer, train_data, test_data, seed, threads)
    scores = mip_scores(trace)
    value, movements = nmr(trace)
    meta = {
        "version": __version__,
        "seed": seed,
        "test_fraction": test_fraction,
        "folds": folds,
        "n_rows": data.n_rows,
        "n_train": train_data.n_rows,
        "n_test": test_data.n_rows,
    }
    if isinstance(explainer, ExplainerSpec):
        meta["explainer"] = {
            "kind": explainer.kind,
            "n_coalition_samples": explainer.n_coalition_samples,
            "n_permutation_repeats": explainer.n_permutation_repeats,
            "background_size": explainer.background_size,
            "seed": explainer.seed,
        }
    return StabilityReport(
        base_ranking=trace.base_ranking,
        trace=trace,
        scores=scores,
        movements=movements,
        nmr=value,
        sd=scores.sd,
        model_spec=spec,
        meta=meta,
    )


def report_from_trace(trace: EliminationTrace, meta: Mapping[str, Any] | None = None) -> StabilityReport:
    """Report for a replayed trace (no model involved)."""
    scores = mip_scores(trace)
    value, movements = nmr(trace)
    return StabilityReport(trace.base_ranking, trace, scores, movements, value, scores.sd,
                           None, dict(meta or {"version": __version__}))
