"""Sandwich covariance of the two-step estimator.

The two-step estimating equations are not a likelihood score, so their
asymptotic covariance is the inverse of a sandwich: ``G = D' M^-1 D`` where
``D`` is the expected negative Jacobian of the equations and ``M`` their
normalized second-moment matrix.  Everything reduces to closed forms in the
parameters, the threshold, and three scalar constants ``(a, b, m)`` — pair-law
expectations computed here by Monte Carlo or by tensor quadrature at unit
threshold (they are scale-free).

The classical ``M`` treats the two pooled marginal samples as independent.
They are not: every joint pair contributes one observation to *each* margin,
so the margin samples overlap.  The ``*_adjusted`` variants account for that
overlap; the plain functions keep the classical form, which is what the
limit covariance ``V`` and the reference values are built on.

Equal marginal parameters are required throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .model import (
    LOG2,
    CommonParameterError,
    ModelParams,
    TruncationConfig,
    log_power_sum,
    log_power_sum_d2theta,
    log_power_sum_dtheta,
    t_statistic_mean,
)
from .simulate import sample_joint_jump_pairs

__all__ = [
    "MonteCarlo",
    "Quadrature",
    "PairMoments",
    "pair_moments",
    "estimate_abm",
    "build_D",
    "build_M",
    "margin_overlap_adjustment",
    "sandwich",
    "limit_V",
    "limit_V_adjusted",
    "invert3",
    "GodambeReport",
    "godambe_report",
]

_B_FLOOR = 1e-6  # |b| below this violates the covariance-theorem hypothesis
_SINGULARITY = 1e-12


@dataclass(frozen=True)
class MonteCarlo:
    """Pair-law expectations from simulated joint pairs at unit threshold."""

    count: int = 1_000_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.count < 100_000:
            raise ValueError(f"Monte Carlo needs at least 1e5 pairs, got {self.count}")


@dataclass(frozen=True)
class Quadrature:
    """Tensor Gauss-Legendre integration of the unit-threshold pair density.

    The log-jump domain is split into panels [0, 0.5, 1, 2, 4, ...] doubling
    up to ``max_log`` (default ``max(64, 30/alpha)``, which leaves tail mass
    below 1e-8).
    """

    nodes_per_panel: int = 48
    max_log: float | None = None

    def __post_init__(self) -> None:
        if self.nodes_per_panel < 4:
            raise ValueError("quadrature needs at least 4 nodes per panel")


@dataclass(frozen=True)
class PairMoments:
    """Expectations over the joint-pair law at unit threshold.

    ``power_*`` are moments of ``log(X^theta + Y^theta)`` and its first two
    theta-derivatives; ``log_excess`` is ``E[log X] - 1/alpha`` (how much the
    joint-pair margin exceeds the plain marginal mean) and ``log_cross`` is
    ``E[(log X - 1/alpha)(log Y - 1/alpha)]`` — both feed the margin-overlap
    adjustment.
    """

    power_log: float
    power_dtheta: float
    power_d2theta: float
    log_x: float
    t_mean: float
    log_x_t_cov: float
    log_excess: float
    log_cross: float


def _require_common(params: ModelParams) -> tuple[float, float]:
    if not params.is_common:
        raise CommonParameterError("sandwich covariance requires equal margins")
    return params.alpha, params.theta


def _require_b(b: float) -> None:
    if not math.isfinite(b) or abs(b) < _B_FLOOR:
        raise ValueError(
            f"curvature constant b={b!r} is within {_B_FLOOR} of zero; "
            "the asymptotic covariance is not defined"
        )


def _moments_monte_carlo(params: ModelParams, spec: MonteCarlo) -> PairMoments:
    alpha, theta = params.alpha, params.theta
    pairs = sample_joint_jump_pairs(params, epsilon=1.0, count=spec.count, seed=spec.seed)
    lx = np.log(pairs[:, 0])
    ly = np.log(pairs[:, 1])
    g1 = log_power_sum(lx, ly, theta)
    g2 = log_power_sum_dtheta(lx, ly, theta)
    g3 = log_power_sum_d2theta(lx, ly, theta)
    t_val = (lx + ly) + (alpha / theta**2) * g1 - (2.0 + alpha / theta) * g2
    t_mean = float(np.mean(t_val))
    # m = Cov(log X + log Y, T) = 2 Cov(log X, T); the summed form halves the
    # Monte Carlo noise relative to using one coordinate
    cov_sum = float(np.mean((lx + ly) * t_val)) - float(np.mean(lx + ly)) * t_mean
    log_x = float(np.mean(lx + ly)) / 2.0
    return PairMoments(
        power_log=float(np.mean(g1)),
        power_dtheta=float(np.mean(g2)),
        power_d2theta=float(np.mean(g3)),
        log_x=log_x,
        t_mean=t_mean,
        log_x_t_cov=cov_sum / 2.0,
        log_excess=log_x - 1.0 / alpha,
        log_cross=float(np.mean((lx - 1.0 / alpha) * (ly - 1.0 / alpha))),
    )


def _moments_quadrature(params: ModelParams, spec: Quadrature) -> PairMoments:
    alpha, theta = params.alpha, params.theta
    top = spec.max_log if spec.max_log is not None else max(64.0, 30.0 / alpha)
    edges = [0.0, 0.5, 1.0]
    while edges[-1] < top:
        edges.append(edges[-1] * 2.0)
    ref, ref_w = leggauss(spec.nodes_per_panel)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        nodes.append(mid + half * ref)
        weights.append(half * ref_w)
    u = np.concatenate(nodes)
    wu = np.concatenate(weights)
    grid_x, grid_y = np.meshgrid(u, u, indexing="ij")
    cell = np.outer(wu, wu)
    g1 = log_power_sum(grid_x, grid_y, theta)
    # pair density at unit threshold, in log-jump coordinates (Jacobian e^{u+v})
    log_f = (
        (alpha / theta) * LOG2
        + math.log(alpha)
        + math.log(alpha + theta)
        + theta * (grid_x + grid_y)
        - (alpha / theta + 2.0) * g1
    )
    f = np.exp(log_f) * cell
    mass = float(f.sum())
    if abs(mass - 1.0) > 1e-6:
        raise ValueError(
            f"quadrature grid captures mass {mass!r}; extend max_log or add nodes"
        )
    f /= mass
    g2 = log_power_sum_dtheta(grid_x, grid_y, theta)
    g3 = log_power_sum_d2theta(grid_x, grid_y, theta)
    t_val = (grid_x + grid_y) + (alpha / theta**2) * g1 - (2.0 + alpha / theta) * g2
    t_mean = float((f * t_val).sum())
    log_x = float((f * grid_x).sum())
    cov = float((f * grid_x * t_val).sum()) - log_x * t_mean
    return PairMoments(
        power_log=float((f * g1).sum()),
        power_dtheta=float((f * g2).sum()),
        power_d2theta=float((f * g3).sum()),
        log_x=log_x,
        t_mean=t_mean,
        log_x_t_cov=cov,
        log_excess=log_x - 1.0 / alpha,
        log_cross=float((f * (grid_x - 1.0 / alpha) * (grid_y - 1.0 / alpha)).sum()),
    )


def pair_moments(params: ModelParams, method: MonteCarlo | Quadrature | None = None) -> PairMoments:
    """Joint-pair expectations at unit threshold by the requested method."""
    _require_common(params)
    if method is None:
        method = MonteCarlo()
    if isinstance(method, MonteCarlo):
        return _moments_monte_carlo(params, method)
    if isinstance(method, Quadrature):
        return _moments_quadrature(params, method)
    raise TypeError(f"method must be MonteCarlo or Quadrature, got {type(method).__name__}")


def estimate_abm(
    params: ModelParams, method: MonteCarlo | Quadrature | None = None
) -> tuple[float, float, float, float]:
    """The three scalar constants of the sandwich, plus the mean of T.

    ``a`` is the dependence-score sensitivity to the tail index, ``b`` the
    (positive) curvature of the dependence score in theta, and ``m`` twice
    the covariance of ``log X`` with the per-pair score ``T`` — all pair-law
    expectations, independent of the threshold.  Raises when ``b`` is too
    close to zero for the covariance to exist.
    """
    return estimate_abm_from_moments(params, pair_moments(params, method))


def invert3(mat) -> np.ndarray:
    """Closed-form adjugate inverse of a 3x3 matrix with a singularity guard."""
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {mat.shape}")
    cof = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            minor = np.delete(np.delete(mat, i, axis=0), j, axis=1)
            cof[i, j] = (-1.0) ** (i + j) * (
                minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0]
            )
    det = float(mat[0, 0] * cof[0, 0] + mat[0, 1] * cof[0, 1] + mat[0, 2] * cof[0, 2])
    scale = float(np.linalg.norm(mat))
    if not math.isfinite(det) or abs(det) <= _SINGULARITY * scale**3:
        raise ArithmeticError(f"matrix is numerically singular (det={det!r})")
    return cof.T / det


def _structure(params: ModelParams, config: TruncationConfig) -> tuple[float, float, float, float]:
    """(alpha, log eps, kappa, d) — the scalars every matrix below is built from."""
    alpha, theta = _require_common(params)
    log_eps = math.log(config.epsilon)
    kappa = alpha * LOG2 / theta**2
    share = 2.0 ** (-alpha / theta - 1.0)  # joint intensity over pooled intensity
    return alpha, log_eps, kappa, share


def build_D(
    params: ModelParams, config: TruncationConfig, a: float, b: float
) -> tuple[np.ndarray, np.ndarray]:
    """Expected negative Jacobian of the two-step equations, and its inverse.

    Normalized by the pooled event intensity; rows correspond to the
    (log c, alpha, theta) equations.  The upper-right zeros reflect the
    one-way coupling: marginal equations never involve theta.  The inverse
    is assembled in closed form (block-triangular structure).
    """
    _require_b(b)
    alpha, log_eps, kappa, share = _structure(params, config)
    d_mat = np.array(
        [
            [1.0, -log_eps, 0.0],
            [-log_eps, 1.0 / alpha**2 + log_eps**2, 0.0],
            [share * kappa, share * (a - kappa * log_eps), share * b],
        ]
    )
    d_inv = np.array(
        [
            [1.0 + alpha**2 * log_eps**2, alpha**2 * log_eps, 0.0],
            [alpha**2 * log_eps, alpha**2, 0.0],
            [
                -(kappa + a * alpha**2 * log_eps) / b,
                -a * alpha**2 / b,
                1.0 / (share * b),
            ],
        ]
    )
    return d_mat, d_inv


def build_M(params: ModelParams, config: TruncationConfig, b: float, m: float) -> np.ndarray:
    """Normalized second-moment matrix of the two-step estimating equations.

    Classical form: the two pooled marginal samples are treated as
    independent.  See :func:`margin_overlap_adjustment` for the correction.
    """
    alpha, log_eps, kappa, share = _structure(params, config)
    m13 = 2.0 * share * kappa
    m23 = -share * (2.0 * kappa * log_eps + m)
    return np.array(
        [
            [1.0, -log_eps, m13],
            [-log_eps, 1.0 / alpha**2 + log_eps**2, m23],
            [m13, m23, share * b],
        ]
    )


def margin_overlap_adjustment(
    params: ModelParams,
    config: TruncationConfig,
    log_excess: float,
    log_cross: float,
) -> np.ndarray:
    """Second-moment correction for the overlap of the pooled margins.

    Every joint pair places one observation in each margin, so the pooled
    count is inflated (variance ``1 + 2d`` in units of the mean rather than
    1) and the two marginal sums are correlated through the pair law.  The
    returned matrix added to :func:`build_M` gives the second moments under
    the actual data-generating law.  ``log_excess`` and ``log_cross`` come
    from :class:`PairMoments`.
    """
    _, log_eps, kappa, share = _structure(params, config)
    w = log_excess
    r = log_cross
    off = -(w + log_eps)
    return 2.0 * share * np.array(
        [
            [1.0, off, 0.0],
            [off, r + 2.0 * log_eps * w + log_eps**2, -kappa * w],
            [0.0, -kappa * w, 0.0],
        ]
    )


def sandwich(d_mat, m_mat) -> tuple[np.ndarray, np.ndarray]:
    """Godambe information ``G`` and its inverse from D and M.

    The returned pair is expressed for the scaled error vector whose first
    coordinate is the log-scale error divided by ``log epsilon`` — the
    convention in which the inverse converges to the limit matrix ``V`` as
    the threshold shrinks.  Requires a threshold different from 1, which is
    recovered from D itself.
    """
    d_mat = np.asarray(d_mat, dtype=float)
    m_mat = np.asarray(m_mat, dtype=float)
    log_eps = -d_mat[0, 1]
    if log_eps == 0.0:
        raise ValueError(
            "threshold 1 makes the scaled-error convention degenerate (log epsilon = 0)"
        )
    scale_down = np.diag([1.0 / log_eps, 1.0, 1.0])
    scale_up = np.diag([log_eps, 1.0, 1.0])
    g_inv = scale_down @ invert3(d_mat) @ m_mat @ invert3(d_mat).T @ scale_down
    g_mat = scale_up @ d_mat.T @ invert3(m_mat) @ d_mat @ scale_up
    return g_mat, g_inv


def limit_V(params: ModelParams, a: float, b: float, m: float) -> tuple[np.ndarray, float]:
    """Small-threshold limit covariance of the scaled two-step errors.

    The first two coordinates (scaled log-scale error and tail-index error)
    become perfectly correlated in the limit, so the matrix has the repeated
    alpha^2 block.  Also returns the limiting correlation between the
    marginal-block and dependence-block normal factors.
    """
    _require_b(b)
    alpha, theta = _require_common(params)
    share = 2.0 ** (-alpha / theta - 1.0)
    off = -(alpha**2) * (a + m) / b
    v33 = (
        1.0 / (b * share)
        - 3.0 * alpha**2 * LOG2**2 / (b**2 * theta**4)
        + a * alpha**2 * (a + 2.0 * m) / b**2
    )
    v_mat = np.array(
        [
            [alpha**2, alpha**2, off],
            [alpha**2, alpha**2, off],
            [off, off, v33],
        ]
    )
    radicand = (
        1.0 / (alpha**2 * share)
        - 3.0 * LOG2**2 / (b * theta**4)
        + (a / b) * (a + 2.0 * m)
    )
    corr = -(a + m) / math.sqrt(radicand)
    return v_mat, corr


def limit_V_adjusted(
    params: ModelParams,
    a: float,
    b: float,
    m: float,
    log_excess: float,
    log_cross: float,
) -> np.ndarray:
    """Small-threshold limit covariance under the margin-overlap correction.

    Same limit operation as :func:`limit_V` applied to the corrected
    second-moment matrix; all threshold terms cancel and the entries are
    again scale-free.
    """
    _require_b(b)
    alpha, theta = _require_common(params)
    share = 2.0 ** (-alpha / theta - 1.0)
    kappa = alpha * LOG2 / theta**2
    w = log_excess
    r = log_cross
    diag = alpha**2 + 2.0 * alpha**4 * share * r
    off = (alpha**2 / b) * (
        -(a + m) - 2.0 * a * alpha**2 * share * r + 2.0 * (share - 1.0) * kappa * w
    )
    base33 = (
        1.0 / (b * share)
        - 3.0 * alpha**2 * LOG2**2 / (b**2 * theta**4)
        + a * alpha**2 * (a + 2.0 * m) / b**2
    )
    bump33 = (2.0 / b**2) * (
        a**2 * alpha**4 * share * r
        + share * kappa**2
        - 2.0 * a * (share - 1.0) * alpha**2 * kappa * w
    )
    return np.array(
        [
            [diag, diag, off],
            [diag, diag, off],
            [off, off, base33 + bump33],
        ]
    )


@dataclass(frozen=True)
class GodambeReport:
    """Everything the sandwich computation produces, ready to serialize.

    The ``*_adjusted`` fields carry the margin-overlap-corrected variants
    (see :func:`margin_overlap_adjustment`); the plain fields follow the
    classical independent-margins form.
    """

    a: float
    b: float
    m: float
    mu_T: float
    d: float
    D: np.ndarray
    D_inv: np.ndarray
    M: np.ndarray
    G: np.ndarray
    G_inv: np.ndarray
    V: np.ndarray
    corr_N1_N2: float
    method: MonteCarlo | Quadrature
    M_adjusted: np.ndarray | None = None
    G_inv_adjusted: np.ndarray | None = None
    V_adjusted: np.ndarray | None = None

    def to_json(self, path: str | None = None) -> str:
        def rows(mat):
            return None if mat is None else [[float(v) for v in row] for row in mat]

        if isinstance(self.method, MonteCarlo):
            method = {"kind": "monte-carlo", "count": self.method.count, "seed": self.method.seed}
        else:
            method = {
                "kind": "quadrature",
                "nodes_per_panel": self.method.nodes_per_panel,
                "max_log": self.method.max_log,
            }
        payload = {
            "a": self.a,
            "b": self.b,
            "m": self.m,
            "mu_T": self.mu_T,
            "d": self.d,
            "labels": ["log_c", "alpha", "theta"],
            "D": rows(self.D),
            "D_inv": rows(self.D_inv),
            "M": rows(self.M),
            "G": rows(self.G),
            "G_inv": rows(self.G_inv),
            "V": rows(self.V),
            "corr_N1_N2": self.corr_N1_N2,
            "method": method,
            "M_adjusted": rows(self.M_adjusted),
            "G_inv_adjusted": rows(self.G_inv_adjusted),
            "V_adjusted": rows(self.V_adjusted),
        }
        text = json.dumps(payload)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_text(self) -> str:
        """Aligned 4-decimal tables for terminal display."""

        def block(name, mat):
            lines = [name + ":"]
            for row in mat:
                lines.append("  " + "  ".join(f"{v:10.4f}" for v in row))
            return lines

        lines = [
            f"a = {self.a:.4f}   b = {self.b:.4f}   m = {self.m:.4f}   "
            f"mu_T = {self.mu_T:.4f}   d = {self.d:.4f}"
        ]
        for name, mat in [
            ("D", self.D),
            ("D_inv", self.D_inv),
            ("M", self.M),
            ("G", self.G),
            ("G_inv", self.G_inv),
            ("V", self.V),
        ]:
            lines.extend(block(name, mat))
        lines.append(f"Corr(N1, N2) = {self.corr_N1_N2:.4f}")
        if self.V_adjusted is not None:
            lines.extend(block("V_adjusted (margin overlap)", self.V_adjusted))
        return "\n".join(lines)


def godambe_report(
    params: ModelParams,
    config: TruncationConfig,
    method: MonteCarlo | Quadrature | None = None,
    adjusted: bool = True,
) -> GodambeReport:
    """One-call assembly of the full sandwich computation."""
    alpha, theta = _require_common(params)
    if method is None:
        method = MonteCarlo()
    mom = pair_moments(params, method)
    a, b, m, mu_t = estimate_abm_from_moments(params, mom)
    d_mat, d_inv = build_D(params, config, a, b)
    m_mat = build_M(params, config, b, m)
    g_mat, g_inv = sandwich(d_mat, m_mat)
    v_mat, corr = limit_V(params, a, b, m)
    m_adj = g_inv_adj = v_adj = None
    if adjusted:
        m_adj = m_mat + margin_overlap_adjustment(params, config, mom.log_excess, mom.log_cross)
        _, g_inv_adj = sandwich(d_mat, m_adj)
        v_adj = limit_V_adjusted(params, a, b, m, mom.log_excess, mom.log_cross)
    return GodambeReport(
        a=a,
        b=b,
        m=m,
        mu_T=mu_t,
        d=2.0 ** (-alpha / theta - 1.0),
        D=d_mat,
        D_inv=d_inv,
        M=m_mat,
        G=g_mat,
        G_inv=g_inv,
        V=v_mat,
        corr_N1_N2=corr,
        method=method,
        M_adjusted=m_adj,
        G_inv_adjusted=g_inv_adj,
        V_adjusted=v_adj,
    )


def estimate_abm_from_moments(
    params: ModelParams, mom: PairMoments
) -> tuple[float, float, float, float]:
    """As :func:`estimate_abm`, reusing already-computed pair moments."""
    alpha, theta = _require_common(params)
    kappa = alpha * LOG2 / theta**2
    a = (
        -alpha * LOG2**2 / theta**3
        + LOG2 / theta**2
        + 1.0 / (alpha + theta) ** 2
        - mom.power_log / theta**2
        + mom.power_dtheta / theta
    )
    b = (
        kappa**2
        - 2.0 * alpha * LOG2 / theta**3
        + 1.0 / (alpha + theta) ** 2
        + (2.0 * alpha / theta**3) * mom.power_log
        - (2.0 * alpha / theta**2) * mom.power_dtheta
        + (2.0 + alpha / theta) * mom.power_d2theta
    )
    m = 2.0 * mom.log_x_t_cov
    _require_b(b)
    return a, b, m, t_statistic_mean(params)
