"""Command line entry point: ``mipxai <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .core import make_features
from .dataset import Dataset
from .exceptions import MIPError
from .explainers import KINDS
from .io import (
    RunConfig,
    bundled_trace,
    config_from_dict,
    load_config,
    load_csv,
    read_coding,
    read_ranking,
    read_trace,
    write_csv,
    write_matrix_csv,
    write_report,
)
from .mip import report_from_trace, stability_report
from .models import FAMILIES
from .pca import fit_pca, transform
from .rank_stats import coded_orders, kendall_tau_b, pearson_r
from .synth import SynthSpec, correlation_matrix, generate

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    def __init__(self, message, parser=None):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self)


def _add_run_flags(p):
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--data", help="input CSV with a header row")
    p.add_argument("--target", help="binary label column")
    p.add_argument("--model", choices=sorted(FAMILIES))
    p.add_argument("--explainer", choices=KINDS)
    p.add_argument("--seed", type=int)
    p.add_argument("--test-fraction", type=float)
    p.add_argument("--folds", type=int)
    p.add_argument("--threads", type=int, help="worker threads; 1 is bit-reproducible")
    p.add_argument("--background-size", type=int)
    p.add_argument("--coalition-samples", type=int)
    p.add_argument("--deterministic", action="store_true",
                   help="force a single thread (bit-reproducible output)")
    p.add_argument("--out", help="write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mipxai", description="Collinearity-aware re-ranking of feature importance lists.")
    parser.add_argument("--version", action="version", version=f"mipxai {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("rank", help="run the elimination loop and report MIP / NMR / SD")
    _add_run_flags(p)

    p = sub.add_parser("replay", help="compute MIP / NMR / SD from a trace file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("trace", nargs="?", help="trace file: one comma-separated ranking per line")
    src.add_argument("--example", choices=["cardiac"], help="use a bundled trace")
    p.add_argument("--out", help="write the JSON report here")

    p = sub.add_parser("compare", help="Kendall tau-b and Pearson r between two rankings")
    p.add_argument("benchmark", help="ranking file, one feature per line")
    p.add_argument("other", help="ranking file, one feature per line")
    p.add_argument("--coding", help="'name,code' lines; defaults to benchmark positions")

    p = sub.add_parser("pca-validate", help="run the pipeline on principal component scores")
    _add_run_flags(p)
    p.add_argument("--variance-threshold", type=float, default=0.95)

    p = sub.add_parser("synth", help="generate a correlated Gaussian dataset as CSV")
    p.add_argument("--n-rows", type=int, required=True)
    p.add_argument("--weights", required=True, help="comma-separated label weights, one per feature")
    p.add_argument("--corr", action="append", default=[], metavar="I,J,RHO",
                   help="set correlation between 1-based features I and J (repeatable)")
    p.add_argument("--correlation-csv", help="full correlation matrix (no header)")
    p.add_argument("--intercept", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target-name", default="label")
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("corr-matrix", help="pairwise feature correlations as CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", help="CSV path (default: stdout)")
    return parser


def _run_config(args, parser) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    overrides = {
        "data": args.data,
        "target": args.target,
        "model": args.model,
        "seed": args.seed,
        "test_fraction": args.test_fraction,
        "folds": args.folds,
        "threads": args.threads,
        "out": args.out,
    }
    cfg = config_from_dict({k: v for k, v in overrides.items() if v is not None}, cfg)
    if args.deterministic:
        cfg = replace(cfg, deterministic=True)
    ex = {"seed": cfg.seed}
    if args.explainer:
        ex["kind"] = args.explainer
    if args.background_size is not None:
        ex["background_size"] = args.background_size
    if args.coalition_samples is not None:
        ex["n_coalition_samples"] = args.coalition_samples
    cfg = replace(cfg, explainer=replace(cfg.explainer, **ex))
    if not cfg.data:
        raise UsageError("--data is required", parser)
    if not cfg.target:
        raise UsageError("--target is required", parser)
    return cfg.validate()


def _fmt(x):
    return f"{x:.6f}"


def _print_report(report, out):
    print(f"base ranking:     {', '.join(report.base_ranking.names)}", file=out)
    print(f"modified ranking: {', '.join(report.scores.mip_ranking.names)}", file=out)
    print("MIP scores:", file=out)
    for f in report.scores.mip_ranking:
        terms = " + ".join(_term(n, x) for n, x in report.scores.x_terms[f])
        print(f"  {f.name:<12} {_fmt(report.scores.mip[f])}   ({terms})", file=out)
    rates = ", ".join(_fmt(m.movement_rate) for m in report.movements)
    print(f"movement rates:   {rates}", file=out)
    print(f"NMR: {_fmt(report.nmr)}", file=out)
    print(f"SD:  {_fmt(report.sd)}", file=out)


def _term(n, x):
    return f"{round(x * n)}/{n}"


def _cmd_rank(args, parser, out):
    cfg = _run_config(args, parser)
    data = load_csv(cfg.data, cfg.target)
    report = stability_report(cfg.model, cfg.explainer, data, test_fraction=cfg.test_fraction,
                              folds=cfg.folds, grid=cfg.grid, seed=cfg.seed,
                              threads=cfg.threads)
    report.meta["run_config"] = _config_echo(cfg)
    _emit(report, cfg.out, out)
    return EXIT_OK


def _config_echo(cfg):
    echo = cfg.to_dict()
    echo.pop("out", None)
    return echo


def _emit(report, path, out):
    print(f"model: {report.model_spec.family} {dict(report.model_spec.hyperparameters)}"
          if report.model_spec else "model: (replayed trace)", file=out)
    _print_report(report, out)
    if path:
        write_report(report, path)
        print(f"report written to {path}", file=out)


def _cmd_replay(args, parser, out):
    trace = bundled_trace(args.example) if args.example else read_trace(args.trace)
    report = report_from_trace(trace, {"version": __version__, "seed": None,
                                       "source": args.example or args.trace})
    _emit(report, args.out, out)
    return EXIT_OK


def _cmd_compare(args, parser, out):
    bench = read_ranking(args.benchmark)
    other = read_ranking(args.other)
    coding = read_coding(args.coding) if args.coding else None
    x, y = coded_orders(bench, other, coding)
    tau = kendall_tau_b(x, y)
    tau_gt = kendall_tau_b(x, y, alternative="greater")
    r = pearson_r(x, y)
    print(f"benchmark codes: {x}", file=out)
    print(f"other codes:     {y}", file=out)
    print(f"kendall_tau_b: {_fmt(tau.statistic)}", file=out)
    print(f"  p (normal, two-sided): {_fmt(tau.pvalue)}", file=out)
    print(f"  p (normal, greater):   {_fmt(tau_gt.pvalue)}", file=out)
    if tau.exact_pvalue is not None:
        print(f"  p (exact, two-sided):  {_fmt(tau.exact_pvalue)}", file=out)
        print(f"  p (exact, greater):    {_fmt(tau_gt.exact_pvalue)}", file=out)
    print(f"pearson_r: {_fmt(r.statistic)}", file=out)
    print(f"  p (t, two-sided):      {_fmt(r.pvalue)}", file=out)
    return EXIT_OK


def _cmd_pca_validate(args, parser, out):
    cfg = _run_config(args, parser)
    data = load_csv(cfg.data, cfg.target)
    pca = fit_pca(data.X, args.variance_threshold)
    scores = transform(pca, data.X)
    names = [f"PC{i + 1}" for i in range(pca.n_components)]
    print(f"components kept: {pca.n_components} "
          f"(cumulative variance {pca.explained_variance_ratio.sum():.4f})", file=out)
    if pca.n_components < 3:
        raise MIPError(f"only {pca.n_components} components retained; need at least 3")
    pc_data = Dataset(make_features(names), scores, data.y, data.classes)
    report = stability_report(cfg.model, cfg.explainer, pc_data, test_fraction=cfg.test_fraction,
                              folds=cfg.folds, grid=cfg.grid, seed=cfg.seed,
                              threads=cfg.threads)
    report.meta["run_config"] = _config_echo(cfg)
    report.meta["pca"] = {"variance_threshold": args.variance_threshold,
                          "n_components": pca.n_components}
    _emit(report, cfg.out, out)
    base = report.base_ranking.names
    mip = report.scores.mip_ranking.names
    print(f"agreement: {'identical' if base == mip else 'different'}", file=out)
    x, y = coded_orders(list(base), list(mip))
    print(f"kendall_tau_b(base, modified): {_fmt(kendall_tau_b(x, y).statistic)}", file=out)
    return EXIT_OK


def _parse_floats(text, what):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated numbers, got {text!r}") from None


def _cmd_synth(args, parser, out):
    weights = _parse_floats(args.weights, "--weights")
    d = len(weights)
    if args.correlation_csv:
        corr = np.loadtxt(args.correlation_csv, delimiter=",", ndmin=2)
    else:
        corr = np.eye(d)
    for item in args.corr:
        vals = _parse_floats(item, "--corr")
        if len(vals) != 3:
            raise UsageError(f"--corr expects I,J,RHO, got {item!r}", parser)
        i, j, rho = int(vals[0]) - 1, int(vals[1]) - 1, vals[2]
        if not (0 <= i < d and 0 <= j < d) or i == j:
            raise UsageError(f"--corr indices out of range: {item!r}", parser)
        corr[i, j] = corr[j, i] = rho
    spec = SynthSpec(args.n_rows, corr, np.array(weights), args.intercept, args.seed)
    data = generate(spec)
    if args.out:
        write_csv(data, args.out, args.target_name)
    else:
        write_csv(data, out, args.target_name)
    return EXIT_OK


def _cmd_corr_matrix(args, parser, out):
    data = load_csv(args.data, args.target)
    corr = correlation_matrix(data)
    write_matrix_csv(corr, data.feature_names, args.out or out)
    return EXIT_OK


COMMANDS = {
    "rank": _cmd_rank,
    "replay": _cmd_replay,
    "compare": _cmd_compare,
    "pca-validate": _cmd_pca_validate,
    "synth": _cmd_synth,
    "corr-matrix": _cmd_corr_matrix,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args, parser, out)
    except UsageError as exc:
        (exc.parser or parser).print_usage(err)
        print(f"error[E_USAGE]: {exc}", file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except MIPError as exc:
        print(exc.describe(), file=err)
        return EXIT_DATA
    except OSError as exc:
        print(f"error[E_IO]: {exc}", file=err)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
