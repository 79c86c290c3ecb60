"""Core domain types: volumes, column mappings, the convex penalty family.

Columns are the (x, y)-indexed stacks of samples along z.  A column mapping
assigns each integer level k a real position; a regular grid is the special
case where the positions are 0, 1, ..., Z-1.  All positions and distances
are carried as 64-bit floats because mappings typically come from a
normalized displacement field with sub-unit offsets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatch,
    NonFiniteValue,
    NonMonotoneMapping,
    SurfcutError,
)

PENALTY_KINDS = ("linear", "quadratic", "piecewise")


@dataclass(frozen=True)
class ConvexPenalty:
    """Convex penalty psi with psi(0) = 0, nondecreasing on d >= 0.

    Signed inputs are evaluated at |d| (the even extension), which keeps the
    function convex overall.  Three kinds are supported:

    - linear:     weight * |d|
    - quadratic:  weight * d**2
    - piecewise:  weight * integral of a nondecreasing slope staircase;
      ``slopes[j]`` applies between ``breakpoints[j-1]`` and
      ``breakpoints[j]`` (the last slope extends to infinity).

    Convexity and monotonicity are validated at construction: slopes must be
    nonnegative and nondecreasing, breakpoints strictly increasing positive.
    """

    kind: str
    weight: float = 1.0
    breakpoints: tuple = ()
    slopes: tuple = ()

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise SurfcutError(f"unknown penalty kind {self.kind!r}")
        if not np.isfinite(self.weight) or self.weight <= 0:
            raise SurfcutError("penalty weight must be positive and finite")
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "slopes", tuple(float(s) for s in self.slopes))
        if self.kind == "piecewise":
            bp = np.asarray(self.breakpoints, dtype=np.float64)
            sl = np.asarray(self.slopes, dtype=np.float64)
            if sl.size != bp.size + 1:
                raise SurfcutError("piecewise penalty needs len(slopes) == len(breakpoints) + 1")
            if bp.size and (bp[0] <= 0 or np.any(np.diff(bp) <= 0)):
                raise SurfcutError("breakpoints must be strictly increasing and positive")
            if sl[0] < 0 or np.any(np.diff(sl) < 0):
                raise SurfcutError("slopes must be nonnegative and nondecreasing (convexity)")
            # knot k starts segment k; value at knot k precomputed for O(1) eval
            knots = np.concatenate(([0.0], bp))
            base = np.concatenate(([0.0], np.cumsum(sl[:-1] * np.diff(knots))))
            object.__setattr__(self, "_knots", knots)
            object.__setattr__(self, "_base", base)
            object.__setattr__(self, "_slope_arr", sl)
        elif self.breakpoints or self.slopes:
            raise SurfcutError("breakpoints/slopes only apply to the piecewise kind")

    def __call__(self, d):
        """Evaluate psi(|d|); accepts scalars or arrays."""
        d = np.abs(np.asarray(d, dtype=np.float64))
        if self.kind == "linear":
            out = self.weight * d
        elif self.kind == "quadratic":
            out = self.weight * d * d
        else:
            seg = np.searchsorted(self._knots, d, side="right") - 1
            out = self.weight * (self._base[seg] + self._slope_arr[seg] * (d - self._knots[seg]))
        return float(out) if out.ndim == 0 else out


def eval_penalty(penalty: ConvexPenalty, d) -> float:
    """Functional form of ConvexPenalty.__call__ for a single distance."""
    return penalty(d)


def one_sided_penalty(penalty: ConvexPenalty, r1, r2):
    """Zero when r1 < r2, else psi(r1 - r2).

    The asymmetric half of the smoothness term; each direction of a column
    pair pays only for surfaces dropping from r1 down to r2.
    """
    r1 = np.asarray(r1, dtype=np.float64)
    r2 = np.asarray(r2, dtype=np.float64)
    out = np.where(r1 < r2, 0.0, penalty(r1 - r2))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Volume:
    """Dense 3-D scalar grid with physical spacing, shape (X, Y, Z).

    The z index varies fastest in memory (C order), matching the raw file
    layout used on disk.
    """

    data: np.ndarray
    spacing: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 3 or min(data.shape) < 1:
            raise DimMismatch(f"volume data must be 3-D with positive dims, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise NonFiniteValue("volume contains non-finite values")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        if len(self.spacing) != 3 or any(s <= 0 for s in self.spacing):
            raise DimMismatch("spacing must be three positive values")

    @property
    def dims(self):
        return self.data.shape


@dataclass(frozen=True)
class ColumnMapping:
    """Strictly increasing real z-positions of one column's samples."""

    x: int
    y: int
    positions: np.ndarray

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=np.float64)
        object.__setattr__(self, "positions", pos)

    def __len__(self):
        return self.positions.size


def validate_mapping(mapping) -> None:
    """Raise unless the positions are finite and strictly increasing.

    Accepts a ColumnMapping or a plain 1-D sequence of positions.  Raises
    NonFiniteValue, or NonMonotoneMapping carrying the first index k where
    positions[k] <= positions[k-1].
    """
    pos = mapping.positions if isinstance(mapping, ColumnMapping) else mapping
    pos = np.asarray(pos, dtype=np.float64)
    if pos.ndim != 1 or pos.size == 0:
        raise DimMismatch("mapping positions must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(pos)):
        raise NonFiniteValue("mapping contains non-finite positions")
    bad = np.nonzero(np.diff(pos) <= 0)[0]
    if bad.size:
        raise NonMonotoneMapping(int(bad[0]) + 1)


def equidistant_mappings(dims) -> np.ndarray:
    """Regular-grid positions L(k) = k for every column, shape (X, Y, Z)."""
    x, y, z = dims
    return np.broadcast_to(np.arange(z, dtype=np.float64), (x, y, z)).copy()


@dataclass(frozen=True)
class SeparationConstraint:
    """Minimum positional gaps between adjacent surfaces, one per pair."""

    gaps: tuple

    def __post_init__(self):
        gaps = tuple(float(g) for g in np.atleast_1d(np.asarray(self.gaps, dtype=np.float64)))
        if any(not np.isfinite(g) or g < 0 for g in gaps):
            raise SurfcutError("separation gaps must be finite and >= 0")
        object.__setattr__(self, "gaps", gaps)

    def __len__(self):
        return len(self.gaps)


@dataclass(frozen=True)
class Problem:
    """One multi-surface segmentation instance.

    costs      one Volume per surface, identical dims
    mappings   (X, Y, Z) array of column positions, strictly increasing in z
    penalties  one ConvexPenalty per surface (a single penalty is broadcast)
    separation SeparationConstraint with num_surfaces - 1 gaps (None when
               there is a single surface)

    The neighborhood is the 4-neighborhood over (x, y).
    """

    costs: tuple
    mappings: np.ndarray
    penalties: tuple
    separation: SeparationConstraint = None

    def __post_init__(self):
        costs = tuple(c if isinstance(c, Volume) else Volume(c) for c in self.costs)
        object.__setattr__(self, "costs", costs)
        if not costs:
            raise SurfcutError("at least one cost volume required")
        dims = costs[0].dims
        if any(c.dims != dims for c in costs):
            raise DimMismatch("all cost volumes must share dims")

        mappings = np.ascontiguousarray(self.mappings, dtype=np.float64)
        if mappings.shape != dims:
            raise DimMismatch(f"mappings shape {mappings.shape} != volume dims {dims}")
        if not np.all(np.isfinite(mappings)):
            raise NonFiniteValue("mappings contain non-finite positions")
        if dims[2] > 1:
            diffs = np.diff(mappings, axis=2)
            if np.any(diffs <= 0):
                x, y, k = np.argwhere(diffs <= 0)[0]
                raise NonMonotoneMapping(
                    int(k) + 1, f"column ({x}, {y}) not strictly increasing at index {k + 1}"
                )
        object.__setattr__(self, "mappings", mappings)

        pens = self.penalties
        if isinstance(pens, ConvexPenalty):
            pens = (pens,) * len(costs)
        pens = tuple(pens)
        if len(pens) != len(costs):
            raise SurfcutError("need one penalty per surface")
        object.__setattr__(self, "penalties", pens)

        sep = self.separation
        if sep is not None and not isinstance(sep, SeparationConstraint):
            sep = SeparationConstraint(tuple(sep))
        if len(costs) > 1:
            if sep is None:
                sep = SeparationConstraint((0.0,) * (len(costs) - 1))
            if len(sep) != len(costs) - 1:
                raise SurfcutError("need num_surfaces - 1 separation gaps")
        object.__setattr__(self, "separation", sep)

    @property
    def num_surfaces(self):
        return len(self.costs)

    @property
    def dims(self):
        return self.costs[0].dims

    @property
    def num_columns(self):
        x, y, _ = self.dims
        return x * y

    def column_mapping(self, x, y) -> ColumnMapping:
        return ColumnMapping(x, y, self.mappings[x, y].copy())

    def neighbor_pairs(self):
        """Unordered 4-neighborhood pairs as two (P, 2) index arrays."""
        x, y, _ = self.dims
        ax, ay = np.meshgrid(np.arange(x - 1), np.arange(y), indexing="ij")
        first = np.stack([ax.ravel(), ay.ravel()], axis=1)
        second = first + np.array([1, 0])
        bx, by = np.meshgrid(np.arange(x), np.arange(y - 1), indexing="ij")
        f2 = np.stack([bx.ravel(), by.ravel()], axis=1)
        s2 = f2 + np.array([0, 1])
        return np.concatenate([first, f2]), np.concatenate([second, s2])


@dataclass(frozen=True)
class SegmentationResult:
    """Recovered surfaces: integer labels plus mapped real positions."""

    labels: np.ndarray     # (num_surfaces, X, Y) int64
    positions: np.ndarray  # (num_surfaces, X, Y) float64
    energy: float
    flow: int = 0

    def __post_init__(self):
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=np.float64))
