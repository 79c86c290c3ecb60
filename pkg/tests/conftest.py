"""Shared builders for randomized test instances."""

import numpy as np
import pytest

from surfcut.core import ConvexPenalty, Problem, Volume


def random_penalty(rng):
    kind = rng.choice(["linear", "quadratic", "piecewise"])
    weight = float(rng.uniform(0.1, 3.0))
    if kind == "piecewise":
        n_bp = int(rng.integers(1, 4))
        bps = np.cumsum(rng.uniform(0.2, 1.5, n_bp))
        slopes = np.cumsum(rng.uniform(0.0, 2.0, n_bp + 1))
        return ConvexPenalty("piecewise", weight=weight,
                             breakpoints=tuple(bps), slopes=tuple(slopes))
    return ConvexPenalty(kind, weight=weight)


def random_mapping(rng, z, step_lo=0.2, step_hi=2.0):
    start = float(rng.uniform(-3.0, 3.0))
    return start + np.concatenate(([0.0], np.cumsum(rng.uniform(step_lo, step_hi, z - 1))))


def random_problem(rng, dims=None, num_surfaces=2, equidistant=False,
                   cost_hi=10.0, feasible_gap=True):
    """Small random instance with a guaranteed-feasible separation."""
    if dims is None:
        x = int(rng.integers(1, 3))
        y = int(rng.integers(1, 3))
        z = int(rng.integers(2, 7))
        dims = (x, y, z)
    x, y, z = dims
    if equidistant:
        mappings = np.broadcast_to(np.arange(z, dtype=float), dims).copy()
    else:
        mappings = np.stack(
            [random_mapping(rng, z) for _ in range(x * y)]
        ).reshape(x, y, z)
    costs = [Volume(rng.uniform(0.0, cost_hi, dims)) for _ in range(num_surfaces)]
    penalties = tuple(random_penalty(rng) for _ in range(num_surfaces))
    separation = None
    if num_surfaces > 1:
        if feasible_gap:
            extent = float((mappings[:, :, -1] - mappings[:, :, 0]).min())
            gaps = rng.uniform(0.0, 0.9 * extent / max(1, num_surfaces - 1),
                               num_surfaces - 1)
        else:
            gaps = rng.uniform(0.0, 2.0, num_surfaces - 1)
        separation = tuple(float(g) for g in gaps)
    return Problem(costs=costs, mappings=mappings, penalties=penalties,
                   separation=separation)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
