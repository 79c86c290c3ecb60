"""Independent brute-force evaluation and minimization of the energy.

Deliberately naive: the energy is computed straight from its definition
(data costs at mapped positions, convex penalty on position differences of
neighboring columns, hard minimum-separation), and the minimizer enumerates
every labeling.  Used to certify that the graph pipeline is globally
optimal on small instances; it shares no code with the graph construction.
"""

from __future__ import annotations

import numpy as np

from .core import Problem
from .errors import Infeasible, LabelOutOfRange, SearchSpaceTooLarge

SEARCH_SPACE_GUARD = 10**7
_CHUNK = 1 << 16


class _InfeasibleMarker:
    """Distinguished energy value for labelings violating the separation."""

    __slots__ = ()

    def __repr__(self):
        return "INFEASIBLE"


INFEASIBLE = _InfeasibleMarker()


def _check_labels(problem, labels):
    labels = np.asarray(labels, dtype=np.int64)
    lam = problem.num_surfaces
    X, Y, Z = problem.dims
    if labels.shape != (lam, X, Y):
        raise LabelOutOfRange(f"labels shape {labels.shape} != {(lam, X, Y)}")
    if labels.min() < 0 or labels.max() > Z - 1:
        raise LabelOutOfRange(f"labels outside [0, {Z - 1}]")
    return labels


def _positions_of(problem, labels):
    X, Y, _ = problem.dims
    xs, ys = np.meshgrid(np.arange(X), np.arange(Y), indexing="ij")
    return problem.mappings[xs[None], ys[None], labels]


def is_feasible(problem: Problem, labels) -> bool:
    """True iff every column satisfies every adjacent-pair separation gap."""
    labels = _check_labels(problem, labels)
    if problem.num_surfaces == 1:
        return True
    positions = _positions_of(problem, labels)
    gaps = np.asarray(problem.separation.gaps)[:, None, None]
    return bool(np.all(np.diff(positions, axis=0) >= gaps))


def energy(problem: Problem, labels):
    """Energy of one labeling, or the INFEASIBLE marker.

    Sums the data costs at the mapped surface positions, the per-surface
    convex penalty over 4-neighborhood column pairs, and applies the hard
    separation constraint.
    """
    labels = _check_labels(problem, labels)
    if not is_feasible(problem, labels):
        return INFEASIBLE

    X, Y, _ = problem.dims
    xs, ys = np.meshgrid(np.arange(X), np.arange(Y), indexing="ij")
    total = 0.0
    positions = _positions_of(problem, labels)
    first, second = problem.neighbor_pairs()
    for i in range(problem.num_surfaces):
        total += float(problem.costs[i].data[xs, ys, labels[i]].sum())
        if first.size:
            pa = positions[i, first[:, 0], first[:, 1]]
            pb = positions[i, second[:, 0], second[:, 1]]
            total += float(problem.penalties[i](pa - pb).sum())
    return total


def brute_force_minimize(problem: Problem):
    """Exhaustive global minimizer; ties broken lexicographically.

    The flat label vector is ordered surface-major then column-major, and
    labelings are enumerated in lexicographic order, so the first strict
    minimum is the lexicographically smallest minimizer.  Guarded by
    SEARCH_SPACE_GUARD on the number of labelings.

    Returns (labels, energy).  Raises Infeasible when no labeling passes.
    """
    lam = problem.num_surfaces
    X, Y, Z = problem.dims
    ncols = X * Y
    digits = lam * ncols
    total = Z**digits
    if total > SEARCH_SPACE_GUARD:
        raise SearchSpaceTooLarge(f"{Z}^{digits} = {total} labelings exceed the guard")

    costs = np.stack([c.data.reshape(ncols, Z) for c in problem.costs])   # (lam, C, Z)
    pos = problem.mappings.reshape(ncols, Z)                              # (C, Z)
    first, second = problem.neighbor_pairs()
    pair_a = first[:, 0] * Y + first[:, 1]
    pair_b = second[:, 0] * Y + second[:, 1]
    gaps = np.asarray(problem.separation.gaps) if lam > 1 else None

    best_energy = np.inf
    best_labels = None

    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        lab = np.empty((idx.size, digits), dtype=np.int64)
        rem = idx.copy()
        for d in range(digits - 1, -1, -1):
            lab[:, d] = rem % Z
            rem //= Z
        lab3 = lab.reshape(idx.size, lam, ncols)

        e = np.zeros(idx.size)
        p = np.empty((idx.size, lam, ncols))
        for i in range(lam):
            for c in range(ncols):
                e += costs[i, c][lab3[:, i, c]]
                p[:, i, c] = pos[c][lab3[:, i, c]]
            for a, b in zip(pair_a, pair_b):
                e += problem.penalties[i](p[:, i, a] - p[:, i, b])
        if lam > 1:
            feasible = np.all(np.diff(p, axis=1) >= gaps[None, :, None], axis=(1, 2))
            e[~feasible] = np.inf

        k = int(np.argmin(e))
        if e[k] < best_energy:
            best_energy = float(e[k])
            best_labels = lab3[k].copy()

    if best_labels is None or not np.isfinite(best_energy):
        raise Infeasible("no labeling satisfies the separation constraints")
    return best_labels.reshape(lam, X, Y), best_energy
