"""Threshold observation scheme: classify simulated jumps at a threshold.

A jump record ``(x, y)`` with both components at or above the threshold is a
*joint* observation; one component at or above and the partner below is a
*single*; records below the threshold in both components are unobservable
and discarded.  The resulting dataset, together with its counts, is what all
estimators consume.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, TruncationConfig, intensities
from .simulate import JumpStream, sample_joint_jump_pairs, sample_single_jumps


@dataclass
class TruncatedDataset:
    """Joint pairs, component-only singles, threshold and horizon."""

    joint: np.ndarray
    singles1: np.ndarray
    singles2: np.ndarray
    epsilon: float
    t: float

    def __post_init__(self) -> None:
        self.joint = np.asarray(self.joint, dtype=float).reshape(-1, 2)
        self.singles1 = np.asarray(self.singles1, dtype=float).reshape(-1)
        self.singles2 = np.asarray(self.singles2, dtype=float).reshape(-1)

    # --- counts -----------------------------------------------------------
    @property
    def n_joint(self) -> int:
        return self.joint.shape[0]

    @property
    def n1_single(self) -> int:
        return self.singles1.size

    @property
    def n2_single(self) -> int:
        return self.singles2.size

    @property
    def n1(self) -> int:
        return self.n_joint + self.n1_single

    @property
    def n2(self) -> int:
        return self.n_joint + self.n2_single

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    # --- pooled marginal views -------------------------------------------
    @property
    def margin1(self) -> np.ndarray:
        """All first-component observations >= epsilon (joint x's and singles)."""
        return np.concatenate([self.joint[:, 0], self.singles1])

    @property
    def margin2(self) -> np.ndarray:
        return np.concatenate([self.joint[:, 1], self.singles2])

    @property
    def pooled(self) -> np.ndarray:
        """Both marginal views concatenated; the Step-1 estimation sample."""
        return np.concatenate([self.margin1, self.margin2])

    def validate(self) -> None:
        eps = self.epsilon
        if not eps > 0.0 or not self.t > 0.0:
            raise ValueError("threshold and horizon must be positive")
        if self.joint.size and self.joint.min() < eps:
            raise ValueError("joint pair below the threshold")
        if (self.singles1.size and self.singles1.min() < eps) or (
            self.singles2.size and self.singles2.min() < eps
        ):
            raise ValueError("single observation below the threshold")

    # --- serialization ----------------------------------------------------
    def to_json(self, path: str | None = None) -> str:
        payload = {
            "epsilon": self.epsilon,
            "t": self.t,
            "joint": [list(row) for row in self.joint],
            "singles1": list(self.singles1),
            "singles2": list(self.singles2),
        }
        text = json.dumps(payload)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_csv(self, path: str | None = None) -> str:
        """Rows ``kind,x,y``; singles leave the unobserved component blank."""
        lines = ["kind,x,y"]
        for x, y in self.joint.tolist():
            lines.append(f"joint,{x!r},{y!r}")
        for x in self.singles1.tolist():
            lines.append(f"single1,{x!r},")
        for y in self.singles2.tolist():
            lines.append(f"single2,,{y!r}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json(cls, source: str) -> "TruncatedDataset":
        """Load from a JSON string or file path; invariants are re-checked."""
        if "\n" in source or source.lstrip().startswith("{"):
            payload = json.loads(source)
        else:
            with open(source) as fh:
                payload = json.load(fh)
        dataset = cls(
            joint=np.asarray(payload["joint"], dtype=float),
            singles1=np.asarray(payload["singles1"], dtype=float),
            singles2=np.asarray(payload["singles2"], dtype=float),
            epsilon=float(payload["epsilon"]),
            t=float(payload["t"]),
        )
        dataset.validate()
        return dataset


def truncate(stream: JumpStream, epsilon: float, t: float | None = None) -> TruncatedDataset:
    """Classify a jump stream at threshold ``epsilon`` over ``[0, t]``.

    The threshold is closed: jumps exactly equal to ``epsilon`` are kept.
    ``epsilon`` must not undercut the stream's simulation cutoff, and ``t``
    (default: the stream horizon) must not exceed it.
    """
    if t is None:
        t = stream.t
    if epsilon < stream.xi:
        raise ValueError(
            f"observation threshold {epsilon} is finer than the simulation cutoff {stream.xi}"
        )
    if t > stream.t:
        raise ValueError(f"observation horizon {t} exceeds the simulated horizon {stream.t}")
    in_window = stream.times <= t
    x = stream.x[in_window]
    y = stream.y[in_window]
    x_up = x >= epsilon
    y_up = y >= epsilon
    return TruncatedDataset(
        joint=np.column_stack([x[x_up & y_up], y[x_up & y_up]]),
        singles1=x[x_up & ~y_up],
        singles2=y[y_up & ~x_up],
        epsilon=epsilon,
        t=t,
    )


def simulate_counts(
    params: ModelParams, config: TruncationConfig, reps: int, seed: int = 0
) -> np.ndarray:
    """Draw ``reps`` pairs ``(n, n_joint)`` of observed-jump counts.

    The three underlying Poisson counts (joint, single-1, single-2) are
    independent, so count pairs can be simulated without jump sizes.
    """
    if reps < 1:
        raise ValueError("need at least one replicate")
    rates = intensities(params, config)
    rng = np.random.default_rng(seed)
    n_joint = rng.poisson(rates.lambda_joint * config.t, reps)
    n1s = rng.poisson(rates.lambda1_single * config.t, reps)
    n2s = rng.poisson(rates.lambda2_single * config.t, reps)
    return np.column_stack([2 * n_joint + n1s + n2s, n_joint])


def count_moments(datasets) -> tuple[float, float]:
    """Empirical ``E[n * n_joint]`` and ``Cov(n, n_joint)``.

    Accepts a sequence of :class:`TruncatedDataset` or an array-like of
    ``(n, n_joint)`` pairs such as :func:`simulate_counts` produces.
    """
    first = datasets[0] if len(datasets) else None
    if isinstance(first, TruncatedDataset):
        pairs = np.asarray([[ds.n, ds.n_joint] for ds in datasets], dtype=float)
    else:
        pairs = np.asarray(datasets, dtype=float).reshape(-1, 2)
    if pairs.shape[0] < 2:
        raise ValueError("count moments need at least two datasets")
    product_mean = float(np.mean(pairs[:, 0] * pairs[:, 1]))
    covariance = float(np.cov(pairs[:, 0], pairs[:, 1], ddof=1)[0, 1])
    return product_mean, covariance


def sample_truncated_dataset(
    params: ModelParams, config: TruncationConfig, seed: int = 0
) -> TruncatedDataset:
    """Draw a dataset directly from the observation scheme's exact law.

    Counts are Poisson with the closed-form intensities and jump sizes come
    from the exact joint-pair and single-jump distributions, so no path-level
    cutoff enters.  Useful for large-horizon studies where simulating every
    sub-threshold jump would be wasteful.
    """
    rates = intensities(params, config)
    seeds = np.random.SeedSequence(seed).spawn(4)
    rng = np.random.default_rng(seeds[0])
    n_joint = int(rng.poisson(rates.lambda_joint * config.t))
    n1s = int(rng.poisson(rates.lambda1_single * config.t))
    n2s = int(rng.poisson(rates.lambda2_single * config.t))
    joint = (
        sample_joint_jump_pairs(params, config.epsilon, n_joint, seed=seeds[1])
        if n_joint
        else np.empty((0, 2))
    )
    singles1 = (
        sample_single_jumps(params, config.epsilon, n1s, seed=seeds[2], component=1)
        if n1s
        else np.empty(0)
    )
    singles2 = (
        sample_single_jumps(params, config.epsilon, n2s, seed=seeds[3], component=2)
        if n2s
        else np.empty(0)
    )
    return TruncatedDataset(
        joint=joint, singles1=singles1, singles2=singles2, epsilon=config.epsilon, t=config.t
    )
