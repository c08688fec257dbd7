"""Parameter estimation from threshold-truncated jump data.

Three procedures operate on a :class:`~claysub.observe.TruncatedDataset`:

* :func:`two_step_ifm` — closed-form marginal estimates from the pooled jump
  sizes, then a one-dimensional solve of the dependence score over the joint
  pairs with the margins frozen (the inference-functions-for-margins idea).
* :func:`joint_only_mle` — the three-parameter likelihood of the joint pairs
  alone, discarding component-only jumps.
* :func:`full_mle` — the likelihood of everything observed: joint pairs plus
  the component-only jumps whose partner stayed below the threshold.

The marginal closed form drops a term that vanishes at the optimum, so Step 1
needs no iteration; see :func:`marginal_mle`.  The three-parameter searches
run in the unconstrained coordinates ``(log c, logit alpha, log theta)`` with
analytic gradients, followed by a root polish of the gradient so the reported
score at a converged solution is essentially zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar, root
from scipy.special import expit, logit

from .model import (
    LOG2,
    ModelParams,
    log_power_sum,
    log_power_sum_dtheta,
)
from .observe import TruncatedDataset

__all__ = [
    "Method",
    "Diagnostics",
    "EstimateResult",
    "marginal_mle",
    "fit_dependence",
    "two_step_ifm",
    "joint_only_mle",
    "full_mle",
]

_SCORE_TOL = 1e-6  # per-observation score tolerance at a converged solution
_PARAM_TOL = 1e-8
_MAX_ITER = 500
_DEP_LO, _DEP_HI = 1e-3, 1e3  # search range for theta (or delta)
_DEP_GRID = 61  # ten bracket points per decade


class Method(str, Enum):
    """Which estimation procedure produced a result."""

    TWO_STEP_IFM = "two-step-ifm"
    JOINT_ONLY_MLE = "joint-only-mle"
    FULL_MLE = "full-mle"


@dataclass(frozen=True)
class Diagnostics:
    """Solver-quality record attached to every estimate.

    ``score_norm`` is the sup-norm of the score (estimating equation) at the
    solution, evaluated in the natural coordinates (log c, alpha, theta) —
    for the two-step method it is the absolute dependence score.  ``notes``
    records anything unusual: degenerate samples, multiple score roots,
    early optimizer stops.
    """

    score_norm: float
    iterations: int
    converged: bool
    log_likelihood: float
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class EstimateResult:
    """Fitted parameters, the method that produced them, and diagnostics.

    ``theta`` is the dependence parameter on the ``alpha * delta`` scale;
    ``delta`` is derived.  The unequal-margins two-step additionally fills
    ``log_c2``/``alpha2`` and stores the first margin in ``log_c``/``alpha``
    (``delta`` then still recovers the fitted Clayton parameter).
    """

    log_c: float
    alpha: float
    theta: float
    method: Method
    diagnostics: Diagnostics
    epsilon: float
    t: float
    log_c2: float | None = None
    alpha2: float | None = None

    @property
    def delta(self) -> float:
        return self.theta / self.alpha

    def params(self) -> ModelParams:
        """The fitted model, for feeding into simulation or covariance code."""
        if self.log_c2 is None:
            return ModelParams.common(c=math.exp(self.log_c), alpha=self.alpha, delta=self.delta)
        return ModelParams(
            c1=math.exp(self.log_c),
            c2=math.exp(self.log_c2),
            alpha1=self.alpha,
            alpha2=self.alpha2,
            delta=self.delta,
        )

    def to_json(self, path: str | None = None) -> str:
        payload = {
            "method": self.method.value,
            "log_c": self.log_c,
            "alpha": self.alpha,
            "theta": self.theta,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "t": self.t,
            "diagnostics": {
                "score_norm": self.diagnostics.score_norm,
                "iterations": self.diagnostics.iterations,
                "converged": self.diagnostics.converged,
                "log_likelihood": self.diagnostics.log_likelihood,
                "notes": list(self.diagnostics.notes),
            },
        }
        if self.log_c2 is not None:
            payload["log_c2"] = self.log_c2
            payload["alpha2"] = self.alpha2
        text = json.dumps(payload)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_dict(cls, payload: dict) -> "EstimateResult":
        diag = payload["diagnostics"]
        return cls(
            log_c=payload["log_c"],
            alpha=payload["alpha"],
            theta=payload["theta"],
            method=Method(payload["method"]),
            diagnostics=Diagnostics(
                score_norm=diag["score_norm"],
                iterations=diag["iterations"],
                converged=diag["converged"],
                log_likelihood=diag["log_likelihood"],
                notes=tuple(diag["notes"]),
            ),
            epsilon=payload["epsilon"],
            t=payload["t"],
            log_c2=payload.get("log_c2"),
            alpha2=payload.get("alpha2"),
        )

    @classmethod
    def from_json(cls, source: str) -> "EstimateResult":
        """Load from a JSON string or file path."""
        if source.lstrip().startswith("{"):
            payload = json.loads(source)
        else:
            with open(source) as fh:
                payload = json.load(fh)
        return cls.from_dict(payload)


# --- Step 1: closed-form marginal fit ------------------------------------


def marginal_mle(dataset: TruncatedDataset, component: int | None = None):
    """Closed-form marginal fit from the jump sizes above the threshold.

    With ``component=None`` (the equal-margins model) both marginal views are
    pooled into one sample with event rate ``n/(2t)``; with ``component`` 1
    or 2 only that margin is used, with rate ``n_k/t``.  In every case the
    tail index is the reciprocal mean of ``log(z/epsilon)`` — the estimating
    equation contains a further ``log epsilon`` term proportional to the
    difference between the true and fitted intensity, which vanishes exactly
    at the fitted intensity, leaving this closed form.

    Returns ``(log_c, alpha, lam)`` where ``lam`` is the fitted per-component
    event intensity.
    """
    if component is None:
        z = dataset.pooled
        lam = z.size / (2.0 * dataset.t)
    elif component == 1:
        z = dataset.margin1
        lam = z.size / dataset.t
    elif component == 2:
        z = dataset.margin2
        lam = z.size / dataset.t
    else:
        raise ValueError(f"component must be None, 1 or 2, got {component}")
    if z.size < 2:
        raise ValueError("marginal estimation needs at least two observations")
    if z.min() < dataset.epsilon:
        raise ValueError("observation below the threshold")
    log_eps = math.log(dataset.epsilon)
    mean_log = float(np.mean(np.log(z))) - log_eps
    if mean_log <= 0.0:
        raise ValueError("all observations sit at the threshold; tail index undefined")
    alpha = 1.0 / mean_log
    log_c = math.log(lam) + alpha * log_eps
    return log_c, alpha, lam


# --- Step 2: dependence score with margins frozen -------------------------


def _dependence_profiles(
    dataset: TruncatedDataset,
    log_c1: float,
    log_c2: float,
    alpha1: float,
    alpha2: float,
):
    """Score and log-likelihood of the joint pairs as functions of delta.

    The margins are held fixed.  Everything runs through ``logaddexp`` with
    the observation logs pre-scaled, so arbitrarily large delta never
    overflows.
    """
    lx = np.log(dataset.joint[:, 0])
    ly = np.log(dataset.joint[:, 1])
    n_pairs = lx.size
    t = dataset.t
    log_eps = math.log(dataset.epsilon)
    # per-pair slopes of the two power-sum exponents in delta
    slope_x = alpha1 * lx - log_c1
    slope_y = alpha2 * ly - log_c2
    slope_ex = alpha1 * log_eps - log_c1
    slope_ey = alpha2 * log_eps - log_c2
    sum_lx = float(np.sum(lx))
    sum_ly = float(np.sum(ly))

    def _intensity(delta: float) -> tuple[float, float]:
        """Joint-jump intensity and its delta-derivative."""
        log_k = np.logaddexp(delta * slope_ex, delta * slope_ey)
        lam = math.exp(-log_k / delta)
        weight = expit(delta * (slope_ex - slope_ey))
        dlog_k = weight * slope_ex + (1.0 - weight) * slope_ey
        return lam, lam * (log_k / delta**2 - dlog_k / delta)

    def score(delta: float) -> float:
        lam, dlam = _intensity(delta)
        log_s = np.logaddexp(delta * slope_x, delta * slope_y)
        weight = expit(delta * (slope_x - slope_y))
        dlog_s = weight * slope_x + (1.0 - weight) * slope_y
        return float(
            -dlam * t
            + n_pairs / (1.0 + delta)
            - n_pairs * (log_c1 + log_c2)
            + alpha1 * sum_lx
            + alpha2 * sum_ly
            + np.sum(log_s) / delta**2
            - (1.0 / delta + 2.0) * np.sum(dlog_s)
        )

    def loglik(delta: float) -> float:
        lam, _ = _intensity(delta)
        log_s = np.logaddexp(delta * slope_x, delta * slope_y)
        return float(
            -lam * t
            + n_pairs * math.log1p(delta)
            - n_pairs * delta * (log_c1 + log_c2)
            + n_pairs * (math.log(alpha1) + math.log(alpha2))
            + (alpha1 * delta - 1.0) * sum_lx
            + (alpha2 * delta - 1.0) * sum_ly
            - (1.0 / delta + 2.0) * np.sum(log_s)
        )

    return score, loglik


def _solve_dependence(score, loglik, start: float | None):
    """Root of the dependence score, bracketed on a log grid.

    Scans ``[1e-3, 1e3]``; a single sign change is handed to a bracketed
    root finder.  Several sign changes fall back to golden-section
    maximization of the likelihood around the best grid point (and are
    reported).  No sign change yields the best grid point, flagged as
    non-converged.  Returns ``(value, iterations, solver_ok, notes)``.
    """
    grid = np.logspace(math.log10(_DEP_LO), math.log10(_DEP_HI), _DEP_GRID)
    if start is not None and _DEP_LO < start < _DEP_HI:
        grid = np.unique(np.append(grid, start))
    values = np.array([score(g) for g in grid])
    usable = np.isfinite(values)
    notes: list[str] = []
    if not usable.all():
        notes.append("dependence score non-finite at some grid points; those were skipped")
        grid, values = grid[usable], values[usable]
    if grid.size < 2:
        return float("nan"), int(usable.size), False, tuple(notes + ["score grid unusable"])

    exact = np.flatnonzero(values == 0.0)
    if exact.size:
        value = float(grid[exact[0]])
        return value, int(grid.size), True, tuple(notes)

    brackets = np.flatnonzero(values[:-1] * values[1:] < 0.0)
    if brackets.size == 1:
        lo, hi = grid[brackets[0]], grid[brackets[0] + 1]
        value, info = brentq(
            score, lo, hi, xtol=_PARAM_TOL, maxiter=_MAX_ITER, full_output=True
        )
        return float(value), int(grid.size + info.iterations), info.converged, tuple(notes)

    likes = np.array([loglik(g) for g in grid])
    best = int(np.nanargmax(likes))
    if brackets.size == 0:
        notes.append("dependence score has no sign change on the search grid")
        return float(grid[best]), int(grid.size), False, tuple(notes)

    notes.append(
        f"dependence score changes sign {brackets.size} times on the grid; "
        "took the likelihood maximizer by golden-section search"
    )
    if best in (0, grid.size - 1):
        notes.append("likelihood maximized at the edge of the search grid")
        return float(grid[best]), int(grid.size), False, tuple(notes)
    try:
        res = minimize_scalar(
            lambda u: -loglik(math.exp(u)),
            bracket=(math.log(grid[best - 1]), math.log(grid[best]), math.log(grid[best + 1])),
            method="golden",
            options={"xtol": 1e-12, "maxiter": _MAX_ITER},
        )
    except ValueError:
        return float(grid[best]), int(grid.size), False, tuple(notes)
    return float(math.exp(res.x)), int(grid.size + res.nit), True, tuple(notes)


def fit_dependence(
    dataset: TruncatedDataset,
    log_c: float,
    alpha: float,
    log_c2: float | None = None,
    alpha2: float | None = None,
    start: float | None = None,
) -> tuple[float, Diagnostics]:
    """Solve the joint-pair dependence score with the margins held fixed.

    With a single ``(log_c, alpha)`` the equal-margins score is solved in
    ``theta``; supplying ``log_c2``/``alpha2`` switches to the
    unequal-margins score in ``delta``.  The returned value is on the
    corresponding scale.
    """
    if dataset.n_joint < 1:
        raise ValueError("no joint jumps: the dependence parameter is unidentifiable")
    if (log_c2 is None) != (alpha2 is None):
        raise ValueError("log_c2 and alpha2 must be supplied together")
    equal = log_c2 is None
    if equal:
        log_c2, alpha2 = log_c, alpha
        # the equal-margins score in theta is the delta-score divided by
        # alpha, so the same delta-solve serves both, rescaled below
        start_delta = None if start is None else start / alpha
    else:
        start_delta = start
    score, loglik = _dependence_profiles(dataset, log_c, log_c2, alpha, alpha2)
    delta, iterations, solver_ok, notes = _solve_dependence(score, loglik, start_delta)
    value = delta * alpha if equal else delta
    # report the score on the scale of the solved parameter
    score_norm = abs(score(delta)) / alpha if equal else abs(score(delta))
    converged = solver_ok and score_norm < _SCORE_TOL * max(dataset.n, 1)
    diag = Diagnostics(
        score_norm=score_norm,
        iterations=iterations,
        converged=converged,
        log_likelihood=loglik(delta),
        notes=notes,
    )
    return value, diag


# --- the three front-line procedures --------------------------------------


def _degenerate_pairs(dataset: TruncatedDataset) -> bool:
    """True when every joint pair is one repeated point."""
    if dataset.n_joint == 0:
        return False
    return (
        float(np.ptp(dataset.joint[:, 0])) == 0.0
        and float(np.ptp(dataset.joint[:, 1])) == 0.0
    )


def two_step_ifm(
    dataset: TruncatedDataset,
    params0: ModelParams | None = None,
    common: bool = True,
) -> EstimateResult:
    """Marginal closed forms first, then the dependence score root.

    ``common=True`` pools the margins and solves for ``theta``;
    ``common=False`` fits each margin separately and solves for ``delta``.
    The Step-1 estimates never depend on Step 2.
    """
    if dataset.n_joint < 1:
        raise ValueError("no joint jumps: the dependence parameter is unidentifiable")
    if common:
        log_c, alpha, _ = marginal_mle(dataset)
        start = None
        if params0 is not None:
            start = params0.theta
        theta, diag = fit_dependence(dataset, log_c, alpha, start=start)
        log_c2 = alpha2 = None
    else:
        log_c, alpha, _ = marginal_mle(dataset, component=1)
        log_c2, alpha2, _ = marginal_mle(dataset, component=2)
        start = None if params0 is None else params0.delta
        delta, diag = fit_dependence(
            dataset, log_c, alpha, log_c2=log_c2, alpha2=alpha2, start=start
        )
        theta = alpha * delta
    if _degenerate_pairs(dataset):
        diag = Diagnostics(
            score_norm=diag.score_norm,
            iterations=diag.iterations,
            converged=False,
            log_likelihood=diag.log_likelihood,
            notes=diag.notes + ("degenerate joint sample: all pairs identical",),
        )
    return EstimateResult(
        log_c=log_c,
        alpha=alpha,
        theta=theta,
        method=Method.TWO_STEP_IFM,
        diagnostics=diag,
        epsilon=dataset.epsilon,
        t=dataset.t,
        log_c2=log_c2,
        alpha2=alpha2,
    )


def _default_start(dataset: TruncatedDataset, params0: ModelParams | None):
    """Starting point in (log c, alpha, theta) for the 3-parameter searches."""
    if params0 is not None:
        return math.log(params0.c), params0.alpha, params0.theta
    if dataset.n_joint >= 1:
        est = two_step_ifm(dataset)
        if math.isfinite(est.theta) and est.theta > 0.0 and 0.0 < est.alpha < 1.0:
            return est.log_c, est.alpha, est.theta
    log_c, alpha, _ = marginal_mle(dataset)
    return log_c, alpha, alpha  # delta = 1: neutral dependence


def _maximize3(neg_loglik_grad, u0: np.ndarray):
    """Quasi-Newton descent then a gradient root polish, in R^3.

    ``neg_loglik_grad`` maps unconstrained coordinates to (value, gradient).
    The polish step is kept only when it does not worsen the objective.
    Returns ``(u, iterations, descent_ok, notes)``.
    """
    res = minimize(
        neg_loglik_grad,
        u0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": _MAX_ITER, "ftol": 1e-14, "gtol": 1e-12},
    )
    u, iterations = res.x, int(res.nit)
    notes: list[str] = []
    if not res.success:
        notes.append(f"descent stopped early: {res.message}")
    polish = root(lambda v: neg_loglik_grad(v)[1], u, method="hybr", options={"xtol": _PARAM_TOL})
    if polish.success:
        value = neg_loglik_grad(polish.x)[0]
        if value <= res.fun + 1e-9 * (1.0 + abs(res.fun)):
            u = polish.x
            iterations += int(polish.nfev)
    ok = res.success or polish.success
    return u, iterations, ok, notes


def _unpack(u: np.ndarray) -> tuple[float, float, float]:
    """(log c, logit alpha, log theta) -> (log c, alpha, theta)."""
    return float(u[0]), float(expit(np.clip(u[1], -35.0, 35.0))), float(np.exp(u[2]))


def _finish3(
    dataset: TruncatedDataset,
    method: Method,
    u: np.ndarray,
    loglik: float,
    score,
    n_scale: int,
    iterations: int,
    solver_ok: bool,
    notes: list[str],
) -> EstimateResult:
    log_c, alpha, theta = _unpack(u)
    score_norm = float(np.max(np.abs(score)))
    converged = solver_ok and score_norm < _SCORE_TOL * max(n_scale, 1)
    diag = Diagnostics(
        score_norm=score_norm,
        iterations=iterations,
        converged=converged,
        log_likelihood=loglik,
        notes=tuple(notes),
    )
    return EstimateResult(
        log_c=log_c,
        alpha=alpha,
        theta=theta,
        method=method,
        diagnostics=diag,
        epsilon=dataset.epsilon,
        t=dataset.t,
    )


def joint_only_mle(
    dataset: TruncatedDataset, params0: ModelParams | None = None
) -> EstimateResult:
    """Maximize the joint-pair likelihood over (log c, alpha, theta).

    Component-only jumps are ignored entirely; the event rate entering the
    likelihood is the joint-jump intensity.
    """
    if dataset.n_joint < 3:
        raise ValueError("the joint-pairs likelihood needs at least three pairs")
    lx = np.log(dataset.joint[:, 0])
    ly = np.log(dataset.joint[:, 1])
    n_pairs = lx.size
    sum_lxy = float(np.sum(lx) + np.sum(ly))
    t = dataset.t
    log_eps = math.log(dataset.epsilon)

    def pieces(u):
        log_c, alpha, theta = _unpack(u)
        lam_joint = math.exp(log_c - alpha * log_eps - alpha / theta * LOG2)
        kappa = alpha * LOG2 / theta**2
        g1 = float(np.sum(log_power_sum(lx, ly, theta)))
        g2 = float(np.sum(log_power_sum_dtheta(lx, ly, theta)))
        ll = (
            -lam_joint * t
            + n_pairs * (log_c + math.log(alpha) + math.log(alpha + theta))
            + (theta - 1.0) * sum_lxy
            - (2.0 + alpha / theta) * g1
        )
        score = np.array(
            [
                n_pairs - lam_joint * t,
                lam_joint * t * (log_eps + LOG2 / theta)
                + n_pairs / alpha
                + n_pairs / (alpha + theta)
                - g1 / theta,
                -lam_joint * kappa * t
                + n_pairs / (alpha + theta)
                + sum_lxy
                + alpha / theta**2 * g1
                - (2.0 + alpha / theta) * g2,
            ]
        )
        return ll, score, alpha, theta

    def objective(u):
        ll, score, alpha, theta = pieces(u)
        grad = score * np.array([1.0, alpha * (1.0 - alpha), theta])
        return -ll, -grad

    start = _default_start(dataset, params0)
    u0 = np.array([start[0], logit(start[1]), math.log(start[2])])
    if _degenerate_pairs(dataset):
        ll, score, _, _ = pieces(u0)
        return _finish3(
            dataset,
            Method.JOINT_ONLY_MLE,
            u0,
            ll,
            score,
            n_pairs,
            0,
            False,
            ["degenerate joint sample: all pairs identical"],
        )
    u, iterations, ok, notes = _maximize3(objective, u0)
    ll, score, _, _ = pieces(u)
    return _finish3(dataset, Method.JOINT_ONLY_MLE, u, ll, score, n_pairs, iterations, ok, notes)


def full_mle(dataset: TruncatedDataset, params0: ModelParams | None = None) -> EstimateResult:
    """Maximize the complete-observation likelihood over (log c, alpha, theta).

    Joint pairs contribute the pair jump density; a component-only jump of
    size z contributes the marginal jump density thinned by the probability
    that its partner stayed below the threshold, which involves the factor
    ``1 - (1 + (z/eps)^-theta)^(-alpha/theta - 1)``.  That factor and its
    derivatives are evaluated through ``expm1``/``log1p`` with an asymptotic
    branch once ``(z/eps)^-theta`` underflows.
    """
    n_events = dataset.n_joint + dataset.n1_single + dataset.n2_single
    if n_events < 3:
        raise ValueError("the full likelihood needs at least three observed events")
    lx = np.log(dataset.joint[:, 0])
    ly = np.log(dataset.joint[:, 1])
    n_pairs = lx.size
    sum_lxy = float(np.sum(lx) + np.sum(ly))
    singles = np.concatenate([dataset.singles1, dataset.singles2])
    log_singles = np.log(singles)
    sum_log_singles = float(np.sum(log_singles))
    t = dataset.t
    log_eps = math.log(dataset.epsilon)
    lz = log_singles - log_eps  # scaled single-jump logs, all >= 0

    def single_terms(alpha: float, theta: float):
        """Sum of the thinning-factor logs and their alpha/theta scores."""
        if lz.size == 0:
            return 0.0, 0.0, 0.0
        beta = 1.0 + alpha / theta
        log_w = -theta * lz
        shallow = log_w > -700.0  # partner-below factor still representable
        w = np.where(shallow, np.exp(log_w), 0.0)
        u_val = np.log1p(w)
        with np.errstate(over="ignore"):
            growth = np.expm1(beta * u_val)
        s = np.where(
            shallow,
            np.log(-np.expm1(-beta * np.maximum(u_val, 1e-310))),
            math.log(beta) + log_w,
        )
        s_alpha = np.where(shallow, u_val / (theta * np.maximum(growth, 1e-310)), 1.0 / (theta + alpha))
        s_theta = np.where(
            shallow,
            -((alpha / theta**2) * u_val + beta * lz * w / (1.0 + w))
            / np.maximum(growth, 1e-310),
            -alpha / (theta * (theta + alpha)) - lz,
        )
        return float(np.sum(s)), float(np.sum(s_alpha)), float(np.sum(s_theta))

    def pieces(u):
        log_c, alpha, theta = _unpack(u)
        lam = math.exp(log_c - alpha * log_eps)
        lam_joint = lam * math.exp(-alpha / theta * LOG2)
        rho = 2.0 * lam - lam_joint
        kappa = alpha * LOG2 / theta**2
        g1 = float(np.sum(log_power_sum(lx, ly, theta)))
        g2 = float(np.sum(log_power_sum_dtheta(lx, ly, theta)))
        s_sum, s_alpha_sum, s_theta_sum = single_terms(alpha, theta)
        ll = (
            -rho * t
            + n_events * (log_c + math.log(alpha))
            + n_pairs * math.log(alpha + theta)
            + (theta - 1.0) * sum_lxy
            - (2.0 + alpha / theta) * g1
            - (alpha + 1.0) * sum_log_singles
            + s_sum
        )
        drho_alpha = -rho * log_eps + lam_joint * LOG2 / theta
        score = np.array(
            [
                n_events - rho * t,
                -t * drho_alpha
                + n_events / alpha
                + n_pairs / (alpha + theta)
                - g1 / theta
                - sum_log_singles
                + s_alpha_sum,
                lam_joint * kappa * t
                + n_pairs / (alpha + theta)
                + sum_lxy
                + alpha / theta**2 * g1
                - (2.0 + alpha / theta) * g2
                + s_theta_sum,
            ]
        )
        return ll, score, alpha, theta

    def objective(u):
        ll, score, alpha, theta = pieces(u)
        grad = score * np.array([1.0, alpha * (1.0 - alpha), theta])
        return -ll, -grad

    start = _default_start(dataset, params0)
    u0 = np.array([start[0], logit(start[1]), math.log(start[2])])
    degenerate = _degenerate_pairs(dataset) and lz.size == 0
    if degenerate:
        ll, score, _, _ = pieces(u0)
        return _finish3(
            dataset,
            Method.FULL_MLE,
            u0,
            ll,
            score,
            n_events,
            0,
            False,
            ["degenerate joint sample: all pairs identical"],
        )
    u, iterations, ok, notes = _maximize3(objective, u0)
    if _degenerate_pairs(dataset):
        ok = False
        notes = notes + ["degenerate joint sample: all pairs identical"]
    ll, score, _, _ = pieces(u)
    return _finish3(dataset, Method.FULL_MLE, u, ll, score, n_events, iterations, ok, notes)
