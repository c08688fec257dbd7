"""Monte Carlo study harness: parameter-recovery tables and histogram data.

A study simulates one path per replicate, truncates it at every requested
threshold, fits every requested method on the *same* truncated data, and
aggregates means, root mean squared errors and relative biases per
method/threshold/parameter.  Histogram summaries with fitted and
theoretical normal overlays are produced from the raw per-replicate
estimates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .estimate import EstimateResult, Method, full_mle, joint_only_mle, two_step_ifm
from .godambe import MonteCarlo, Quadrature, godambe_report
from .model import ModelParams, TruncationConfig, marginal_tail_inverse
from .observe import truncate
from .simulate import SimulationConfig, simulate_path

__all__ = [
    "StudyConfig",
    "StudyRow",
    "StudyResult",
    "run_study",
    "ParameterHistogram",
    "HistogramReport",
    "histogram_report",
    "table1_preset",
    "figure1_preset",
]

_FITTERS = {
    Method.TWO_STEP_IFM: two_step_ifm,
    Method.JOINT_ONLY_MLE: joint_only_mle,
    Method.FULL_MLE: full_mle,
}

_EXCLUSION_LIMIT = 0.05  # a study cell with more than 5% exclusions is unusable


@dataclass(frozen=True)
class StudyConfig:
    """Everything that determines a study run (and hence its output bytes).

    ``tau`` is the target marginal jump intensity of the simulated paths;
    the implied simulation cutoff must sit below every estimation
    threshold in ``epsilons``.
    """

    params: ModelParams
    tau: float
    t: float
    epsilons: tuple[float, ...]
    replicates: int
    methods: tuple[Method, ...] = (Method.TWO_STEP_IFM, Method.JOINT_ONLY_MLE, Method.FULL_MLE)
    seed: int = 0
    symmetrize: bool = False
    n_jobs: int = 1
    csv_path: str | None = None
    json_path: str | None = None

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ValueError(f"need at least one replicate, got {self.replicates}")
        if not self.epsilons:
            raise ValueError("no thresholds requested")
        if not self.methods:
            raise ValueError("no methods requested")
        cutoff = max(
            marginal_tail_inverse(1, self.tau, self.params),
            marginal_tail_inverse(2, self.tau, self.params),
        )
        for eps in self.epsilons:
            if eps < cutoff:
                raise ValueError(
                    f"threshold {eps} is below the simulation cutoff {cutoff} "
                    f"implied by tau={self.tau}; raise tau or the threshold"
                )


@dataclass(frozen=True)
class StudyRow:
    """One aggregate cell of the recovery table.

    ``mrb`` is |mean - truth| / truth; ``median_rb`` is the signed median of
    the per-replicate relative errors.  ``replicates`` counts the estimates
    actually aggregated (after exclusions).
    """

    method: Method
    epsilon: float
    param: str
    mean: float
    sqrt_mse: float
    mrb: float
    median_rb: float
    replicates: int
    truth: float

    def validate(self) -> None:
        if self.sqrt_mse + 1e-12 < abs(self.mean - self.truth):
            raise ValueError(
                f"sqrt_mse {self.sqrt_mse} smaller than |bias| "
                f"{abs(self.mean - self.truth)}: aggregation is inconsistent"
            )


@dataclass(frozen=True)
class StudyResult:
    """Aggregate rows plus the per-replicate raw material behind them.

    ``raw`` maps (method, epsilon) to one entry per replicate: an
    :class:`EstimateResult` or None when the fit raised.  ``exclusions``
    maps the same keys to (replicate index, reason) pairs for every
    replicate left out of the aggregates.
    """

    config: StudyConfig
    rows: tuple[StudyRow, ...]
    raw: dict[tuple[Method, float], list[EstimateResult | None]]
    exclusions: dict[tuple[Method, float], list[tuple[int, str]]]

    def estimates(self, method: Method, epsilon: float) -> list[EstimateResult]:
        """Converged estimates for one study cell, in replicate order."""
        cell = self.raw[(method, epsilon)]
        return [r for r in cell if r is not None and r.diagnostics.converged]

    def to_csv(self, path: str | None = None) -> str:
        """Frozen schema: method,epsilon,param,mean,sqrt_mse,mrb,replicates."""
        lines = ["method,epsilon,param,mean,sqrt_mse,mrb,replicates"]
        for row in self.rows:
            lines.append(
                f"{row.method.value},{row.epsilon!r},{row.param},"
                f"{row.mean!r},{row.sqrt_mse!r},{row.mrb!r},{row.replicates}"
            )
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_json(self, path: str | None = None) -> str:
        def cell_key(method: Method, eps: float) -> str:
            return f"{method.value}@{eps!r}"

        payload = {
            "truth": {
                "c": self.config.params.c1,
                "alpha": self.config.params.alpha1,
                "delta": self.config.params.delta,
            },
            "tau": self.config.tau,
            "t": self.config.t,
            "replicates": self.config.replicates,
            "seed": self.config.seed,
            "rows": [
                {
                    "method": row.method.value,
                    "epsilon": row.epsilon,
                    "param": row.param,
                    "mean": row.mean,
                    "sqrt_mse": row.sqrt_mse,
                    "mrb": row.mrb,
                    "median_rb": row.median_rb,
                    "replicates": row.replicates,
                    "truth": row.truth,
                }
                for row in self.rows
            ],
            "exclusions": {
                cell_key(m, e): [{"replicate": i, "reason": why} for i, why in pairs]
                for (m, e), pairs in self.exclusions.items()
            },
            "raw": {
                cell_key(m, e): [
                    None if r is None else json.loads(r.to_json()) for r in cell
                ]
                for (m, e), cell in self.raw.items()
            },
        }
        text = json.dumps(payload)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _fit_replicate(
    params: ModelParams,
    tau: float,
    t: float,
    symmetrize: bool,
    epsilons: tuple[float, ...],
    methods: tuple[Method, ...],
    seed: int,
) -> dict[tuple[Method, float], tuple[EstimateResult | None, str | None]]:
    """Simulate one path and fit every (method, threshold) cell on it."""
    stream = simulate_path(params, SimulationConfig(tau=tau, t=t, seed=seed, symmetrize=symmetrize))
    out: dict[tuple[Method, float], tuple[EstimateResult | None, str | None]] = {}
    for eps in epsilons:
        dataset = truncate(stream, eps)
        for method in methods:
            try:
                result = _FITTERS[method](dataset)
            except (ValueError, RuntimeError) as exc:
                out[(method, eps)] = (None, str(exc))
                continue
            reason = None if result.diagnostics.converged else "flagged non-convergent"
            out[(method, eps)] = (result, reason)
    return out


def run_study(config: StudyConfig) -> StudyResult:
    """Run the full recovery study described by ``config``.

    Within a replicate all methods see the identical truncated dataset.
    Replicates use independent spawned RNG streams, so ``n_jobs`` changes
    wall time but never output bytes.  Raises when any study cell loses
    more than 5% of its replicates to non-convergence.
    """
    seeds = [
        int(child.generate_state(1, np.uint64)[0] >> 1)
        for child in np.random.SeedSequence(config.seed).spawn(config.replicates)
    ]
    args = (
        config.params,
        config.tau,
        config.t,
        config.symmetrize,
        config.epsilons,
        config.methods,
    )
    if config.n_jobs == 1:
        per_replicate = [_fit_replicate(*args, seed) for seed in seeds]
    else:
        from joblib import Parallel, delayed

        per_replicate = Parallel(n_jobs=config.n_jobs)(
            delayed(_fit_replicate)(*args, seed) for seed in seeds
        )

    raw: dict[tuple[Method, float], list[EstimateResult | None]] = {}
    exclusions: dict[tuple[Method, float], list[tuple[int, str]]] = {}
    for eps in config.epsilons:
        for method in config.methods:
            key = (method, eps)
            raw[key] = []
            exclusions[key] = []
            for idx, rep in enumerate(per_replicate):
                result, reason = rep[key]
                raw[key].append(result)
                if reason is not None:
                    exclusions[key].append((idx, reason))

    truth = {
        "c": config.params.c1,
        "alpha": config.params.alpha1,
        "delta": config.params.delta,
    }
    rows: list[StudyRow] = []
    for eps in config.epsilons:
        for method in config.methods:
            key = (method, eps)
            excluded = len(exclusions[key])
            if excluded > _EXCLUSION_LIMIT * config.replicates:
                detail = "; ".join(why for _, why in exclusions[key][:3])
                raise RuntimeError(
                    f"{method.value} at threshold {eps}: {excluded} of "
                    f"{config.replicates} replicates excluded ({detail})"
                )
            kept = [
                r
                for r in raw[key]
                if r is not None and r.diagnostics.converged
            ]
            values = {
                "c": np.array([math.exp(r.log_c) for r in kept]),
                "alpha": np.array([r.alpha for r in kept]),
                "delta": np.array([r.delta for r in kept]),
            }
            for name, vals in values.items():
                target = truth[name]
                mean = float(np.mean(vals))
                row = StudyRow(
                    method=method,
                    epsilon=eps,
                    param=name,
                    mean=mean,
                    sqrt_mse=float(np.sqrt(np.mean((vals - target) ** 2))),
                    mrb=abs(mean - target) / target,
                    median_rb=float(np.median((vals - target) / target)),
                    replicates=len(kept),
                    truth=target,
                )
                row.validate()
                rows.append(row)

    result = StudyResult(config=config, rows=tuple(rows), raw=raw, exclusions=exclusions)
    if config.csv_path is not None:
        result.to_csv(config.csv_path)
    if config.json_path is not None:
        result.to_json(config.json_path)
    return result


@dataclass(frozen=True)
class ParameterHistogram:
    """Histogram of one parameter's estimates with normal overlays.

    ``overlay`` is "theoretical" when a limit law backs the theoretical
    curve and "empirical only" when no limit law is available for the
    method, in which case ``theoretical_sd`` is None.
    """

    param: str
    values: np.ndarray
    bin_left: np.ndarray
    bin_width: float
    counts: np.ndarray
    fitted_mean: float
    fitted_sd: float
    overlay: str
    theoretical_mean: float | None = None
    theoretical_sd: float | None = None

    def to_tsv(self, path: str | None = None) -> str:
        """Gnuplot-ready: bin_left, count, fitted_density, theoretical_density."""

        def pdf(x, mu, sd):
            return math.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * math.sqrt(2.0 * math.pi))

        lines = ["bin_left\tcount\tfitted_density\ttheoretical_density"]
        for left, count in zip(self.bin_left.tolist(), self.counts.tolist()):
            center = left + 0.5 * self.bin_width
            fitted = pdf(center, self.fitted_mean, self.fitted_sd)
            if self.theoretical_sd is None:
                theory = float("nan")
            else:
                theory = pdf(center, self.theoretical_mean, self.theoretical_sd)
            lines.append(f"{left!r}\t{int(count)}\t{fitted!r}\t{theory!r}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


@dataclass(frozen=True)
class HistogramReport:
    """Per-parameter histograms for one (method, threshold) study cell."""

    method: Method
    epsilon: float
    tables: dict[str, ParameterHistogram]


def histogram_report(
    estimates: list[EstimateResult],
    params: ModelParams,
    epsilon: float,
    bins: int = 25,
    information: MonteCarlo | Quadrature | None = None,
) -> HistogramReport:
    """Histograms of (log c, alpha, theta) estimates with overlay curves.

    The fitted overlay is the normal with the sample mean and standard
    deviation.  For the two-step method the theoretical overlay is the
    limit normal, centred at the truth with covariance ``G^-1 / (2 lambda t)``
    read off the sandwich at this threshold; the other methods carry no
    limit law here and are flagged "empirical only".
    """
    if len(estimates) < 30:
        raise ValueError(f"need at least 30 estimates for a histogram, got {len(estimates)}")
    methods = {r.method for r in estimates}
    if len(methods) != 1:
        raise ValueError(f"estimates mix methods {sorted(m.value for m in methods)}")
    method = methods.pop()
    t = estimates[0].t
    if any(r.t != t or r.epsilon != epsilon for r in estimates):
        raise ValueError("estimates disagree with the requested threshold or horizon")

    theoretical_sd: dict[str, float | None]
    if method is Method.TWO_STEP_IFM:
        overlay = "theoretical"
        report = godambe_report(
            params,
            TruncationConfig(epsilon=epsilon, t=t),
            information if information is not None else Quadrature(),
            adjusted=False,
        )
        pooled = 2.0 * params.c * epsilon ** (-params.alpha) * t
        log_eps = math.log(epsilon)
        theoretical_sd = {
            "log_c": abs(log_eps) * math.sqrt(report.G_inv[0, 0] / pooled),
            "alpha": math.sqrt(report.G_inv[1, 1] / pooled),
            "theta": math.sqrt(report.G_inv[2, 2] / pooled),
        }
    else:
        overlay = "empirical only"
        theoretical_sd = {"log_c": None, "alpha": None, "theta": None}

    truth = {
        "log_c": math.log(params.c),
        "alpha": params.alpha,
        "theta": params.theta,
    }
    values = {
        "log_c": np.array([r.log_c for r in estimates]),
        "alpha": np.array([r.alpha for r in estimates]),
        "theta": np.array([r.theta for r in estimates]),
    }
    tables = {}
    for name, vals in values.items():
        counts, edges = np.histogram(vals, bins=bins)
        sd = theoretical_sd[name]
        tables[name] = ParameterHistogram(
            param=name,
            values=vals,
            bin_left=edges[:-1],
            bin_width=float(edges[1] - edges[0]),
            counts=counts,
            fitted_mean=float(np.mean(vals)),
            fitted_sd=float(np.std(vals, ddof=1)),
            overlay=overlay,
            theoretical_mean=None if sd is None else truth[name],
            theoretical_sd=sd,
        )
    return HistogramReport(method=method, epsilon=epsilon, tables=tables)


def table1_preset(seed: int = 0, n_jobs: int = 1) -> StudyConfig:
    """The recovery-table regime: 100 paths, both thresholds, all methods."""
    return StudyConfig(
        params=ModelParams.common(c=1.0, alpha=0.5, delta=2.0),
        tau=1000.0,
        t=1.0,
        epsilons=(1e-3, 1e-5),
        replicates=100,
        seed=seed,
        n_jobs=n_jobs,
    )


def figure1_preset(seed: int = 0, n_jobs: int = 1) -> StudyConfig:
    """The histogram regime: 1000 paths at the finer threshold, all methods."""
    return StudyConfig(
        params=ModelParams.common(c=1.0, alpha=0.5, delta=2.0),
        tau=1000.0,
        t=1.0,
        epsilons=(1e-5,),
        replicates=1000,
        seed=seed,
        n_jobs=n_jobs,
    )
