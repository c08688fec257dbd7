"""Command-line front end.

Subcommands: ``simulate`` a jump stream, ``truncate`` it into an observed
dataset, ``estimate`` parameters from a dataset, ``godambe`` for the
sandwich covariance tables, ``study`` for the full recovery study, and
``report`` for histogram data with normal overlays.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .estimate import EstimateResult, Method, full_mle, joint_only_mle, two_step_ifm
from .godambe import MonteCarlo, Quadrature, godambe_report
from .model import ModelParams, TruncationConfig
from .observe import TruncatedDataset, truncate
from .simulate import JumpStream, SimulationConfig, simulate_path
from .study import (
    StudyConfig,
    figure1_preset,
    histogram_report,
    run_study,
    table1_preset,
)

__all__ = ["cli", "run"]

_METHODS = {
    "two-step": Method.TWO_STEP_IFM,
    "two-step-ifm": Method.TWO_STEP_IFM,
    "joint-only": Method.JOINT_ONLY_MLE,
    "joint-only-mle": Method.JOINT_ONLY_MLE,
    "full": Method.FULL_MLE,
    "full-mle": Method.FULL_MLE,
}

_FITTERS = {
    Method.TWO_STEP_IFM: two_step_ifm,
    Method.JOINT_ONLY_MLE: joint_only_mle,
    Method.FULL_MLE: full_mle,
}

_DEFAULTS = {"c": 1.0, "alpha": 0.5, "delta": 2.0}


def _parse_params(text: str) -> ModelParams:
    values = dict(_DEFAULTS)
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise ValueError(f"--params entries must look like key=value, got {chunk!r}")
        key, _, raw = chunk.partition("=")
        key = key.strip()
        if key not in values:
            raise ValueError(f"unknown --params key {key!r}; expected c, alpha, delta")
        values[key] = float(raw)
    return ModelParams.common(c=values["c"], alpha=values["alpha"], delta=values["delta"])


def _method(name: str) -> Method:
    try:
        return _METHODS[name]
    except KeyError:
        raise ValueError(
            f"unknown method {name!r}; choose from {', '.join(sorted(_METHODS))}"
        ) from None


def _seed(args) -> int:
    return getattr(args, "seed", 0)


def _output(args, default: str) -> str:
    return getattr(args, "output", default)


def _params(args) -> ModelParams:
    text = getattr(args, "params", None)
    if text is None:
        return ModelParams.common(**_DEFAULTS)
    return _parse_params(text)


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


# --- subcommand handlers --------------------------------------------------


def _cmd_simulate(args) -> int:
    stream = simulate_path(
        _params(args),
        SimulationConfig(tau=args.tau, t=args.t, seed=_seed(args), symmetrize=args.symmetrize),
    )
    if _output(args, "json") == "csv":
        _emit(stream.to_csv(), args.out)
    else:
        _emit(stream.to_json(), args.out)
    return 0


def _cmd_truncate(args) -> int:
    stream = JumpStream.from_json(args.input)
    dataset = truncate(stream, args.epsilon, t=args.t)
    if _output(args, "json") == "csv":
        _emit(dataset.to_csv(), args.out)
    else:
        _emit(dataset.to_json(), args.out)
    return 0


def _cmd_estimate(args) -> int:
    dataset = TruncatedDataset.from_json(args.input)
    start = _parse_params(args.params) if getattr(args, "params", None) else None
    result = _FITTERS[_method(args.method)](dataset, params0=start)
    if _output(args, "json") == "csv":
        header = "method,epsilon,t,log_c,alpha,theta,delta,converged"
        row = (
            f"{result.method.value},{result.epsilon!r},{result.t!r},{result.log_c!r},"
            f"{result.alpha!r},{result.theta!r},{result.delta!r},"
            f"{str(result.diagnostics.converged).lower()}"
        )
        _emit(header + "\n" + row + "\n", args.out)
    else:
        _emit(result.to_json(), args.out)
    return 0


def _cmd_godambe(args) -> int:
    params = ModelParams.common(c=args.c, alpha=args.alpha, delta=args.delta)
    config = TruncationConfig(epsilon=args.epsilon, t=args.t)
    if args.information == "monte-carlo":
        method = MonteCarlo(count=args.count, seed=_seed(args))
    else:
        method = Quadrature()
    report = godambe_report(params, config, method)
    if _output(args, "text") == "json":
        _emit(report.to_json(), args.out)
    elif _output(args, "text") == "csv":
        raise ValueError("godambe output is text or json, not csv")
    else:
        _emit(report.to_text(), args.out)
    return 0


def _study_config(args) -> StudyConfig:
    if args.preset == "table1":
        return table1_preset(seed=_seed(args), n_jobs=args.jobs)
    if args.preset == "figure1":
        return figure1_preset(seed=_seed(args), n_jobs=args.jobs)
    if args.epsilons is None:
        raise ValueError("either --preset or --epsilons is required")
    epsilons = tuple(float(e) for e in args.epsilons.split(","))
    methods = tuple(_method(name) for name in args.methods.split(","))
    return StudyConfig(
        params=_params(args),
        tau=args.tau,
        t=args.t,
        epsilons=epsilons,
        replicates=args.replicates,
        methods=methods,
        seed=_seed(args),
        n_jobs=args.jobs,
    )


def _cmd_study(args) -> int:
    result = run_study(_study_config(args))
    excluded = sum(len(v) for v in result.exclusions.values())
    if excluded:
        print(f"note: {excluded} replicate fit(s) excluded as non-convergent", file=sys.stderr)
    if _output(args, "csv") == "json":
        _emit(result.to_json(), args.out)
    else:
        _emit(result.to_csv(), args.out)
    return 0


def _cmd_report(args) -> int:
    with open(args.input) as fh:
        payload = json.load(fh)
    method = _method(args.method)
    key = f"{method.value}@{args.epsilon!r}"
    if key not in payload["raw"]:
        available = ", ".join(sorted(payload["raw"]))
        raise ValueError(f"study file has no cell {key}; available: {available}")
    estimates = [
        EstimateResult.from_dict(entry)
        for entry in payload["raw"][key]
        if entry is not None and entry["diagnostics"]["converged"]
    ]
    truth = payload["truth"]
    params = ModelParams.common(c=truth["c"], alpha=truth["alpha"], delta=truth["delta"])
    report = histogram_report(estimates, params, args.epsilon, bins=args.bins)
    pieces = []
    for name, table in report.tables.items():
        if args.out_prefix is not None:
            table.to_tsv(f"{args.out_prefix}.{name}.tsv")
        else:
            pieces.append(f"# {name} ({table.overlay})\n" + table.to_tsv())
    if args.out_prefix is None:
        sys.stdout.write("\n".join(pieces))
    return 0


# --- parser ---------------------------------------------------------------


def _shared_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (default 0)"
    )
    parent.add_argument(
        "--output",
        choices=("csv", "json"),
        default=argparse.SUPPRESS,
        help="serialization format (subcommand default otherwise)",
    )
    parent.add_argument(
        "--params",
        default=argparse.SUPPRESS,
        metavar="c=..,alpha=..,delta=..",
        help="model parameters; omitted keys fall back to c=1, alpha=0.5, delta=2",
    )
    return parent


def _build_parser() -> argparse.ArgumentParser:
    shared = _shared_flags()
    parser = argparse.ArgumentParser(
        prog="claysub",
        description="Truncated bivariate stable-Clayton subordinators: "
        "simulation, estimation, and asymptotics.",
        parents=[shared],
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", parents=[shared], help="simulate a jump stream")
    p.add_argument("--tau", type=float, default=1000.0, help="target marginal jump intensity")
    p.add_argument("--t", type=float, default=1.0, help="time horizon")
    p.add_argument(
        "--symmetrize",
        action="store_true",
        help="also cover jumps large only in the second component",
    )
    p.add_argument("--out", help="output path (stdout otherwise)")
    p.set_defaults(func=_cmd_simulate)

    p = subs.add_parser("truncate", parents=[shared], help="apply a jump-size threshold")
    p.add_argument("--input", required=True, help="jump-stream JSON file")
    p.add_argument("--epsilon", type=float, required=True, help="observation threshold")
    p.add_argument("--t", type=float, default=None, help="override the stream horizon")
    p.add_argument("--out", help="output path (stdout otherwise)")
    p.set_defaults(func=_cmd_truncate)

    p = subs.add_parser("estimate", parents=[shared], help="fit parameters to a dataset")
    p.add_argument("--input", required=True, help="truncated-dataset JSON file")
    p.add_argument(
        "--method",
        default="two-step",
        help="two-step | joint-only | full (long aliases accepted)",
    )
    p.add_argument("--out", help="output path (stdout otherwise)")
    p.set_defaults(func=_cmd_estimate)

    p = subs.add_parser("godambe", parents=[shared], help="sandwich covariance tables")
    p.add_argument("--c", type=float, default=1.0, help="marginal scale")
    p.add_argument("--alpha", type=float, default=0.5, help="marginal tail index")
    p.add_argument("--delta", type=float, default=2.0, help="Clayton dependence parameter")
    p.add_argument("--epsilon", type=float, default=1e-3, help="observation threshold")
    p.add_argument("--t", type=float, default=1.0, help="time horizon")
    p.add_argument(
        "--information",
        choices=("quadrature", "monte-carlo"),
        default="quadrature",
        help="how to compute the pair-law expectations",
    )
    p.add_argument("--count", type=int, default=1_000_000, help="Monte Carlo pair count")
    p.add_argument("--out", help="output path (stdout otherwise)")
    p.set_defaults(func=_cmd_godambe)

    p = subs.add_parser("study", parents=[shared], help="Monte Carlo recovery study")
    p.add_argument("--preset", choices=("table1", "figure1"), help="canned study regime")
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--epsilons", help="comma-separated thresholds (when no preset)")
    p.add_argument(
        "--methods",
        default="two-step,joint-only,full",
        help="comma-separated method names",
    )
    p.add_argument("--tau", type=float, default=1000.0, help="target marginal jump intensity")
    p.add_argument("--t", type=float, default=1.0, help="time horizon")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers (same bytes out)")
    p.add_argument("--out", help="output path (stdout otherwise)")
    p.set_defaults(func=_cmd_study)

    p = subs.add_parser("report", parents=[shared], help="histogram data with overlays")
    p.add_argument("--input", required=True, help="study JSON file (from: study --output json)")
    p.add_argument("--method", default="two-step", help="which method's estimates to plot")
    p.add_argument("--epsilon", type=float, required=True, help="which threshold's estimates")
    p.add_argument("--bins", type=int, default=25)
    p.add_argument("--out-prefix", help="write <prefix>.<param>.tsv files (stdout otherwise)")
    p.set_defaults(func=_cmd_report)

    return parser


def cli(argv=None) -> int:
    """Parse and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage/help
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(cli())
