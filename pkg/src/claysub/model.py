"""Closed-form machinery of the bivariate stable Clayton subordinator.

The jump measure has marginal tail integrals ``c_k * x**(-alpha_k)`` coupled
by a Clayton Levy copula with parameter ``delta``.  Observing only jumps
exceeding a threshold ``epsilon`` in at least one component turns the process
into a compound Poisson process; everything downstream (simulation,
estimation, sandwich covariance) is built on the tail integrals, intensities,
densities and derivative formulas collected here.

All tail and intensity formulas are evaluated in log space so that tiny
thresholds (``epsilon**-alpha`` easily exceeds 1e100) never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOG2 = float(np.log(2.0))


class CommonParameterError(ValueError):
    """Raised when an operation defined only for equal margins gets unequal ones."""


@dataclass(frozen=True)
class ModelParams:
    """Marginal scales/indices and the Clayton dependence parameter.

    ``c1, c2 > 0`` are the jump intensities at unit jump size, ``alpha1,
    alpha2 in (0, 1)`` the stable indices (subordinator range), and
    ``delta > 0`` the Clayton parameter.  When both margins share (c, alpha)
    the dependence is often reparameterized as ``theta = alpha * delta``.
    """

    c1: float
    c2: float
    alpha1: float
    alpha2: float
    delta: float

    def __post_init__(self) -> None:
        if not (self.c1 > 0.0 and self.c2 > 0.0):
            raise ValueError(f"marginal scales must be positive, got c1={self.c1}, c2={self.c2}")
        if not (0.0 < self.alpha1 < 1.0 and 0.0 < self.alpha2 < 1.0):
            raise ValueError(
                "stable indices must lie strictly inside (0, 1), got "
                f"alpha1={self.alpha1}, alpha2={self.alpha2}"
            )
        if not self.delta > 0.0:
            raise ValueError(f"dependence parameter must be positive, got delta={self.delta}")

    @classmethod
    def common(cls, c: float, alpha: float, delta: float) -> "ModelParams":
        """Construct the equal-margins model c1 = c2 = c, alpha1 = alpha2 = alpha."""
        return cls(c1=c, c2=c, alpha1=alpha, alpha2=alpha, delta=delta)

    @property
    def is_common(self) -> bool:
        return self.c1 == self.c2 and self.alpha1 == self.alpha2

    @property
    def alpha(self) -> float:
        """Shared stable index; only defined when the margins agree."""
        if self.alpha1 != self.alpha2:
            raise CommonParameterError(
                "margins have different stable indices; 'alpha' is undefined"
            )
        return self.alpha1

    @property
    def c(self) -> float:
        """Shared marginal scale; only defined when the margins agree."""
        if self.c1 != self.c2:
            raise CommonParameterError("margins have different scales; 'c' is undefined")
        return self.c1

    @property
    def theta(self) -> float:
        """Dependence reparameterization theta = alpha * delta (equal indices only)."""
        return self.alpha * self.delta

    def _marginal(self, k: int) -> tuple[float, float]:
        if k == 1:
            return self.c1, self.alpha1
        if k == 2:
            return self.c2, self.alpha2
        raise ValueError(f"component index must be 1 or 2, got {k}")


@dataclass(frozen=True)
class TruncationConfig:
    """Observation threshold ``epsilon`` (jump size) and horizon ``t`` (time)."""

    epsilon: float
    t: float

    def __post_init__(self) -> None:
        if not self.epsilon > 0.0:
            raise ValueError(f"threshold must be positive, got epsilon={self.epsilon}")
        if not self.t > 0.0:
            raise ValueError(f"horizon must be positive, got t={self.t}")


@dataclass(frozen=True)
class IntensitySet:
    """Jump intensities of the threshold-observed compound Poisson process."""

    lambda1: float
    lambda2: float
    lambda_joint: float
    lambda1_single: float
    lambda2_single: float
    rho: float


@dataclass(frozen=True)
class LambdaJointDerivs:
    """Value and the six partials of the joint-jump intensity.

    Derivatives are taken with respect to (log c, alpha, theta) in the
    equal-margins parameterization, where
    ``lambda_joint = c * epsilon**-alpha * 2**(-alpha/theta)``.
    """

    value: float
    d_log_c: float
    d_alpha: float
    d_theta: float
    d_theta_log_c: float
    d_theta_alpha: float
    d_theta_theta: float


def marginal_tail(k: int, x, params: ModelParams):
    """Marginal tail integral ``c_k * x**(-alpha_k)`` of component ``k``."""
    c, alpha = params._marginal(k)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("marginal tail integral requires a positive jump size")
    out = np.exp(np.log(c) - alpha * np.log(x))
    return float(out) if out.ndim == 0 else out


def marginal_tail_inverse(k: int, level, params: ModelParams):
    """Generalized inverse of ``marginal_tail``: the jump size with tail mass ``level``."""
    c, alpha = params._marginal(k)
    level = np.asarray(level, dtype=float)
    if np.any(level <= 0.0):
        raise ValueError("tail inverse requires a positive level")
    out = np.exp(-(np.log(level) - np.log(c)) / alpha)
    return float(out) if out.ndim == 0 else out


def clayton(u, v, delta: float):
    """Clayton Levy copula ``(u**-delta + v**-delta)**(-1/delta)``.

    Computed through ``logaddexp`` so the margin identities hold exactly at
    the boundaries: an infinite argument returns the other argument and a
    zero argument returns zero, with no overflow in between.
    """
    if not delta > 0.0:
        raise ValueError(f"dependence parameter must be positive, got delta={delta}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u < 0.0) or np.any(v < 0.0):
        raise ValueError("copula arguments must be nonnegative")
    with np.errstate(divide="ignore"):
        log_u = np.log(u)
        log_v = np.log(v)
    out = np.exp(-np.logaddexp(-delta * log_u, -delta * log_v) / delta)
    return float(out) if out.ndim == 0 else out


def joint_tail(x, y, params: ModelParams):
    """Joint tail integral: the Clayton copula applied to the marginal tails."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("joint tail integral requires positive jump sizes")
    log_u = np.log(params.c1) - params.alpha1 * np.log(x)
    log_v = np.log(params.c2) - params.alpha2 * np.log(y)
    out = np.exp(-np.logaddexp(-params.delta * log_u, -params.delta * log_v) / params.delta)
    return float(out) if out.ndim == 0 else out


def intensities(params: ModelParams, config: TruncationConfig) -> IntensitySet:
    """Intensities of joint, component-only and pooled jumps above the threshold."""
    eps = config.epsilon
    lam1 = marginal_tail(1, eps, params)
    lam2 = marginal_tail(2, eps, params)
    lam_joint = joint_tail(eps, eps, params)
    return IntensitySet(
        lambda1=lam1,
        lambda2=lam2,
        lambda_joint=lam_joint,
        lambda1_single=lam1 - lam_joint,
        lambda2_single=lam2 - lam_joint,
        rho=lam1 + lam2 - lam_joint,
    )


def truncated_copula(u, v, params: ModelParams, config: TruncationConfig):
    """Levy copula of the threshold-observed joint-jump measure.

    Valid for arguments in ``(0, lambda_joint]``; equals the plain Clayton
    copula in the small-threshold limit.
    """
    delta = params.delta
    lam_joint = joint_tail(config.epsilon, config.epsilon, params)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    upper = lam_joint * (1.0 + 1e-12)
    if np.any(u <= 0.0) or np.any(v <= 0.0) or np.any(u > upper) or np.any(v > upper):
        raise ValueError(
            f"truncated copula arguments must lie in (0, {lam_joint:.6g}]"
        )
    # c_k**-delta * eps**(alpha_k*delta) is the -delta power of the marginal
    # intensity, so the subtracted constant is lambda1**-delta + lambda2**-delta.
    lam1 = marginal_tail(1, config.epsilon, params)
    lam2 = marginal_tail(2, config.epsilon, params)
    bracket = u ** (-delta) + v ** (-delta) - (lam1 ** (-delta) + lam2 ** (-delta))
    out = bracket ** (-1.0 / delta)
    return float(out) if out.ndim == 0 else out


def _log_pair_density(log_x, log_y, params: ModelParams, config: TruncationConfig):
    """log of the joint-jump density at (x, y) = (exp(log_x), exp(log_y))."""
    delta = params.delta
    a1d = params.alpha1 * delta
    a2d = params.alpha2 * delta
    log_c1, log_c2 = np.log(params.c1), np.log(params.c2)
    log_eps = np.log(config.epsilon)
    log_a = -delta * log_c1 + a1d * np.asarray(log_x, dtype=float)
    log_b = -delta * log_c2 + a2d * np.asarray(log_y, dtype=float)
    log_s = np.logaddexp(log_a, log_b)
    log_k = np.logaddexp(-delta * log_c1 + a1d * log_eps, -delta * log_c2 + a2d * log_eps)
    return (
        np.log(params.alpha1 * params.alpha2 * (1.0 + delta))
        + log_k / delta
        - delta * (log_c1 + log_c2)
        + (a1d - 1.0) * log_x
        + (a2d - 1.0) * log_y
        - (1.0 / delta + 2.0) * log_s
    )


def joint_jump_density(x, y, params: ModelParams, config: TruncationConfig):
    """Density of a joint jump pair given both components exceed the threshold."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < config.epsilon) or np.any(y < config.epsilon):
        raise ValueError("joint jump density is supported on [epsilon, inf)^2")
    out = np.exp(_log_pair_density(np.log(x), np.log(y), params, config))
    return float(out) if out.ndim == 0 else out


def joint_jump_survival(x, y, params: ModelParams, config: TruncationConfig):
    """Bivariate survival function of a joint jump pair; equals 1 at (eps, eps)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < config.epsilon) or np.any(y < config.epsilon):
        raise ValueError("joint jump survival is supported on [epsilon, inf)^2")
    delta = params.delta
    log_c1, log_c2 = np.log(params.c1), np.log(params.c2)
    log_eps = np.log(config.epsilon)
    log_a = -delta * log_c1 + params.alpha1 * delta * np.log(x)
    log_b = -delta * log_c2 + params.alpha2 * delta * np.log(y)
    log_k = np.logaddexp(
        -delta * log_c1 + params.alpha1 * delta * log_eps,
        -delta * log_c2 + params.alpha2 * delta * log_eps,
    )
    out = np.exp(-(np.logaddexp(log_a, log_b) - log_k) / delta)
    return float(out) if out.ndim == 0 else out


def dlog_lambda_joint_dtheta(params: ModelParams) -> float:
    """theta-derivative of log(lambda_joint): ``alpha * log 2 / theta**2``."""
    return params.alpha * LOG2 / params.theta ** 2


def lambda_joint_derivs(params: ModelParams, config: TruncationConfig) -> LambdaJointDerivs:
    """Joint-jump intensity and its six partials in (log c, alpha, theta).

    Equal margins only: ``lambda_joint = c * eps**-alpha * 2**(-alpha/theta)``
    with theta = alpha * delta.  The mixed and repeated theta-derivatives
    follow from the product form, e.g. the pure second theta-derivative is
    ``lambda_joint * kappa * (kappa - 2/theta)`` with
    ``kappa = alpha log2 / theta**2``.
    """
    if not params.is_common:
        raise CommonParameterError("joint-intensity derivatives require equal margins")
    alpha, theta = params.alpha, params.theta
    log_eps = np.log(config.epsilon)
    lam_joint = float(joint_tail(config.epsilon, config.epsilon, params))
    kappa = alpha * LOG2 / theta ** 2
    return LambdaJointDerivs(
        value=lam_joint,
        d_log_c=lam_joint,
        d_alpha=-lam_joint * (log_eps + LOG2 / theta),
        d_theta=lam_joint * kappa,
        d_theta_log_c=lam_joint * kappa,
        d_theta_alpha=lam_joint * (LOG2 / theta ** 2 - kappa * (log_eps + LOG2 / theta)),
        d_theta_theta=lam_joint * kappa * (kappa - 2.0 / theta),
    )


def log_power_sum(log_x, log_y, theta: float):
    """``log(x**theta + y**theta)`` from the logs of x and y, overflow-safe."""
    return np.logaddexp(theta * np.asarray(log_x, dtype=float), theta * np.asarray(log_y, dtype=float))


def log_power_sum_dtheta(log_x, log_y, theta: float):
    """theta-derivative of ``log(x**theta + y**theta)``.

    Equals the softmax-weighted mean of log x and log y, so it stays in
    ``[min(log x, log y), max(log x, log y)]`` for any theta.
    """
    log_x = np.asarray(log_x, dtype=float)
    log_y = np.asarray(log_y, dtype=float)
    diff = theta * (log_x - log_y)
    with np.errstate(over="ignore"):
        weight_x = 1.0 / (1.0 + np.exp(-diff))
    return weight_x * log_x + (1.0 - weight_x) * log_y


def log_power_sum_d2theta(log_x, log_y, theta: float):
    """Second theta-derivative of ``log(x**theta + y**theta)``."""
    log_x = np.asarray(log_x, dtype=float)
    log_y = np.asarray(log_y, dtype=float)
    diff = theta * (log_x - log_y)
    with np.errstate(over="ignore"):
        weight_x = 1.0 / (1.0 + np.exp(-diff))
    return weight_x * (1.0 - weight_x) * (log_x - log_y) ** 2


def t_statistic(x, y, params: ModelParams):
    """Per-pair dependence score ``T(x, y)`` of the equal-margins model.

    ``T = (log x + log y) + (alpha/theta**2) g - (2 + alpha/theta) g'`` where
    ``g = log(x**theta + y**theta)`` and ``g'`` its theta-derivative.  T is
    scale invariant, ``T(x, y) == T(x/s, y/s)``, so threshold-scaled and raw
    pairs give the same value.
    """
    if not params.is_common:
        raise CommonParameterError("the T statistic requires equal margins")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("the T statistic requires positive jump sizes")
    alpha, theta = params.alpha, params.theta
    log_x, log_y = np.log(x), np.log(y)
    g1 = log_power_sum(log_x, log_y, theta)
    g2 = log_power_sum_dtheta(log_x, log_y, theta)
    out = (log_x + log_y) + (alpha / theta ** 2) * g1 - (2.0 + alpha / theta) * g2
    return float(out) if out.ndim == 0 else out


def t_statistic_mean(params: ModelParams) -> float:
    """Expected T over the pair law: ``alpha log2/theta**2 - 1/(alpha+theta)``."""
    alpha, theta = params.alpha, params.theta
    return alpha * LOG2 / theta ** 2 - 1.0 / (alpha + theta)
