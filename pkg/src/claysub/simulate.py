"""Jump-path and joint-pair samplers for the bivariate Clayton subordinator.

A path is approximated by keeping only jumps whose first component exceeds a
cutoff ``xi`` chosen through a target intensity ``tau`` (the expected number
of kept jumps per unit time).  Given the first component of a jump, the
second is drawn by inverting the conditional distribution induced by the
Clayton Levy copula; the closed-form inverse used here is validated against
numerical inversion in the test suite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .model import (
    ModelParams,
    joint_tail,
    marginal_tail,
    marginal_tail_inverse,
)


@dataclass(frozen=True)
class SimulationConfig:
    """Target kept-jump intensity ``tau``, horizon ``t``, seed and stream mode.

    ``symmetrize=False`` keeps only jumps whose *first* component exceeds the
    cutoff, mirroring the usual one-sided path construction; it misses jump
    mass where the first component is below the cutoff but the second is
    large.  ``symmetrize=True`` adds the mirrored stream (second component
    above its cutoff, first component below) so the union covers all jumps
    exceeding the cutoff in either component.
    """

    tau: float
    t: float
    seed: int = 0
    symmetrize: bool = False

    def __post_init__(self) -> None:
        if not self.tau > 0.0:
            raise ValueError(f"target intensity must be positive, got tau={self.tau}")
        if not self.t > 0.0:
            raise ValueError(f"horizon must be positive, got t={self.t}")


@dataclass
class JumpStream:
    """Time-ordered simulated jumps ``(times[i], x[i], y[i])`` above cutoff ``xi``."""

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    xi: float
    t: float
    seed: int

    def __len__(self) -> int:
        return self.times.size

    @property
    def records(self) -> list[tuple[float, float, float]]:
        return list(zip(self.times.tolist(), self.x.tolist(), self.y.tolist()))

    def validate(self) -> None:
        if not (self.times.size == self.x.size == self.y.size):
            raise ValueError("stream arrays have mismatched lengths")
        if self.times.size and np.any(np.diff(self.times) <= 0.0):
            raise ValueError("jump times must be strictly increasing")
        if self.times.size and np.any(~((self.x >= self.xi) | (self.y >= self.xi))):
            raise ValueError("every record must exceed the cutoff in some component")
        if np.any((self.x == 0.0) & (self.y == 0.0)):
            raise ValueError("record with no jump in either component")

    def to_csv(self, path: str | None = None) -> str:
        """Plain ``time,x,y`` rows (metadata not included)."""
        lines = ["time,x,y"]
        for time, x, y in zip(self.times.tolist(), self.x.tolist(), self.y.tolist()):
            lines.append(f"{time!r},{x!r},{y!r}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_json(self, path: str | None = None) -> str:
        payload = {
            "xi": self.xi,
            "t": self.t,
            "seed": self.seed,
            "records": [list(r) for r in zip(self.times, self.x, self.y)],
        }
        text = json.dumps(payload)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json(cls, source: str) -> "JumpStream":
        """Load a stream from a JSON string or file path and validate it."""
        if "\n" in source or source.lstrip().startswith("{"):
            payload = json.loads(source)
        else:
            with open(source) as fh:
                payload = json.load(fh)
        records = np.asarray(payload["records"], dtype=float)
        if records.size == 0:
            records = records.reshape(0, 3)
        stream = cls(
            times=records[:, 0],
            x=records[:, 1],
            y=records[:, 2],
            xi=float(payload["xi"]),
            t=float(payload["t"]),
            seed=int(payload["seed"]),
        )
        stream.validate()
        return stream


def conditional_level_inverse(u, w, delta: float):
    """Tail level of the partner jump given level ``u`` and uniform draw ``w``.

    Inverts the conditional distribution ``F(v | u) = (1 + (u/v)**delta)**(-1-1/delta)``
    of the Clayton Levy copula in closed form:
    ``v = u * (w**(-delta/(1+delta)) - 1)**(-1/delta)``.
    """
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    # expm1 keeps precision for w near 1, where the bracket vanishes.
    with np.errstate(divide="ignore"):
        bracket = np.expm1(-(delta / (1.0 + delta)) * np.log(w))
        out = u * bracket ** (-1.0 / delta)
    return float(out) if out.ndim == 0 else out


def conditional_level_cdf(v, u, delta: float):
    """Conditional distribution ``F(v | u)`` of the partner tail level."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    out = (1.0 + (u / v) ** delta) ** (-1.0 - 1.0 / delta)
    return float(out) if out.ndim == 0 else out


def _draw_marked_jumps(params: ModelParams, anchor: int, tau: float, t: float, rng) -> tuple:
    """One anchored stream: Poisson count, uniform times, Pareto anchor jumps
    and copula-conditional partner jumps.  Returns (times, anchor_jump, partner_jump)."""
    other = 2 if anchor == 1 else 1
    count = int(rng.poisson(tau * t))
    times = np.sort(rng.uniform(0.0, t, size=count))
    u_unif = 1.0 - rng.random(count)  # in (0, 1]; guards the tail inverse at 0
    cutoff = marginal_tail_inverse(anchor, tau, params)
    anchor_jump = cutoff * u_unif ** (-1.0 / (params.alpha1 if anchor == 1 else params.alpha2))
    level = tau * u_unif  # tail level of the anchor jump
    w_unif = 1.0 - rng.random(count)
    partner_level = conditional_level_inverse(level, w_unif, params.delta)
    partner_jump = marginal_tail_inverse(other, np.maximum(partner_level, np.finfo(float).tiny), params)
    partner_jump = np.where(np.isinf(partner_level), 0.0, partner_jump)
    return times, anchor_jump, partner_jump


def simulate_path(params: ModelParams, sim_config: SimulationConfig) -> JumpStream:
    """Simulate the jump record of the subordinator over ``[0, t]``.

    Jump count is Poisson(tau * t); first components follow the exact
    conditional law above the cutoff (a Pareto tail), second components come
    from the copula-conditional transform and may be arbitrarily small.
    """
    seeds = np.random.SeedSequence(sim_config.seed).spawn(2)
    rng_fwd = np.random.default_rng(seeds[0])
    times, x, y = _draw_marked_jumps(params, 1, sim_config.tau, sim_config.t, rng_fwd)
    xi1 = float(marginal_tail_inverse(1, sim_config.tau, params))
    xi = xi1

    if sim_config.symmetrize:
        rng_rev = np.random.default_rng(seeds[1])
        times2, y2, x2 = _draw_marked_jumps(params, 2, sim_config.tau, sim_config.t, rng_rev)
        keep = x2 < xi1  # complement of the forward stream's coverage
        times = np.concatenate([times, times2[keep]])
        x = np.concatenate([x, x2[keep]])
        y = np.concatenate([y, y2[keep]])
        order = np.argsort(times, kind="stable")
        times, x, y = times[order], x[order], y[order]
        xi = min(xi1, float(marginal_tail_inverse(2, sim_config.tau, params)))

    return JumpStream(times=times, x=x, y=y, xi=xi, t=sim_config.t, seed=sim_config.seed)


def sample_joint_jump_pairs(
    params: ModelParams,
    epsilon: float,
    count: int,
    seed: int = 0,
    return_acceptance: bool = False,
):
    """Draw i.i.d. joint-jump pairs with both components above ``epsilon``.

    Proposals take the first component from its Pareto law above the
    threshold and the second from the copula-conditional transform; a
    proposal is accepted when the second component also exceeds the
    threshold, which happens with probability lambda_joint / lambda1
    (``2**(-alpha/theta)`` for equal margins).

    Returns an array of shape (count, 2); with ``return_acceptance=True``
    also returns the empirical acceptance rate of the rejection loop.
    """
    if count < 1:
        raise ValueError(f"need at least one pair, got count={count}")
    if epsilon <= 0.0:
        raise ValueError(f"threshold must be positive, got epsilon={epsilon}")
    rng = np.random.default_rng(seed)
    lam1 = marginal_tail(1, epsilon, params)
    accept_prob = joint_tail(epsilon, epsilon, params) / lam1
    xs, ys = [], []
    got = 0
    proposed = 0
    stalled = 0
    while got < count:
        batch = min(int((count - got) / accept_prob * 1.05) + 64, 4_000_000)
        u_unif = 1.0 - rng.random(batch)
        x = epsilon * u_unif ** (-1.0 / params.alpha1)
        level = lam1 * u_unif
        w_unif = 1.0 - rng.random(batch)
        partner_level = conditional_level_inverse(level, w_unif, params.delta)
        y = marginal_tail_inverse(2, np.maximum(partner_level, np.finfo(float).tiny), params)
        y = np.where(np.isinf(partner_level), 0.0, y)
        keep = y >= epsilon
        accepted = int(keep.sum())
        xs.append(x[keep])
        ys.append(y[keep])
        got += accepted
        proposed += batch
        stalled = 0 if accepted else stalled + 1
        if stalled >= 100:
            raise RuntimeError("pair rejection sampler made no progress in 100 rounds")
    pairs = np.column_stack([np.concatenate(xs)[:count], np.concatenate(ys)[:count]])
    if return_acceptance:
        return pairs, got / proposed
    return pairs


def sample_single_jumps(
    params: ModelParams, epsilon: float, count: int, seed: int = 0, component: int = 1
) -> np.ndarray:
    """Draw jumps of one component above ``epsilon`` whose partner stays below.

    The single-jump density is the marginal Pareto density times the
    conditional probability that the partner jump misses the threshold,
    ``1 - F(lambda_other | level)``; that factor is largest at the threshold,
    which gives the rejection bound.
    """
    if count < 0:
        raise ValueError(f"negative count {count}")
    if epsilon <= 0.0:
        raise ValueError(f"threshold must be positive, got epsilon={epsilon}")
    if count == 0:
        return np.empty(0)
    other = 2 if component == 1 else 1
    _, alpha_k = params._marginal(component)
    lam_k = marginal_tail(component, epsilon, params)
    lam_other = marginal_tail(other, epsilon, params)

    def miss_prob(level):
        return 1.0 - conditional_level_cdf(lam_other, level, params.delta)

    bound = miss_prob(lam_k)
    overall = (lam_k - joint_tail(epsilon, epsilon, params)) / (lam_k * bound)
    rng = np.random.default_rng(seed)
    out = []
    got = 0
    stalled = 0
    while got < count:
        batch = min(int((count - got) / overall * 1.05) + 64, 4_000_000)
        u_unif = 1.0 - rng.random(batch)
        z = epsilon * u_unif ** (-1.0 / alpha_k)
        keep = rng.random(batch) < miss_prob(lam_k * u_unif) / bound
        accepted = int(keep.sum())
        out.append(z[keep])
        got += accepted
        stalled = 0 if accepted else stalled + 1
        if stalled >= 100:
            raise RuntimeError("single-jump rejection sampler made no progress in 100 rounds")
    return np.concatenate(out)[:count]
