"""Shared fixtures and an independent quadrature oracle for expectations."""

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from claysub.godambe import Quadrature, pair_moments
from claysub.model import ModelParams, TruncationConfig


@pytest.fixture(scope="session")
def reference():
    """The parameter point used by most numeric oracles: c=1, alpha=0.5, delta=2."""
    return ModelParams.common(c=1.0, alpha=0.5, delta=2.0)


@pytest.fixture(scope="session")
def reference_config():
    return TruncationConfig(epsilon=1e-3, t=1.0)


@pytest.fixture(scope="session")
def reference_moments(reference):
    return pair_moments(reference, Quadrature())


def quad_expectation(params, fn, nodes_per_panel=40, top=None):
    """Expectation of ``fn(log_x, log_y)`` over the unit-threshold pair law.

    Deliberately uses a different panel layout (doubling from 1 instead of
    0.5, different node count) than the library's quadrature so the two are
    independent discretizations of the same integral.
    """
    alpha, theta = params.alpha, params.theta
    if top is None:
        top = max(72.0, 36.0 / alpha)
    edges = [0.0, 1.0]
    while edges[-1] < top:
        edges.append(edges[-1] * 2.0)
    ref, ref_w = leggauss(nodes_per_panel)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        nodes.append(mid + half * ref)
        weights.append(half * ref_w)
    u = np.concatenate(nodes)
    wu = np.concatenate(weights)
    grid_x, grid_y = np.meshgrid(u, u, indexing="ij")
    log_f = (
        (alpha / theta) * np.log(2.0)
        + np.log(alpha)
        + np.log(alpha + theta)
        + theta * (grid_x + grid_y)
        - (alpha / theta + 2.0) * np.logaddexp(theta * grid_x, theta * grid_y)
    )
    f = np.exp(log_f) * np.outer(wu, wu)
    mass = f.sum()
    assert abs(mass - 1.0) < 1e-8, f"oracle grid mass {mass}"
    return float((f * fn(grid_x, grid_y)).sum() / mass)
