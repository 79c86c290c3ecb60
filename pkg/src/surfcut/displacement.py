"""Displacement-field front end.

A diffused gradient field of the input volume pulls voxel centers toward
salient intensity transitions.  After normalization the largest shift is
exactly half a voxel, so every center stays inside its own voxel; the
z-components of the shifts define the per-column irregular mappings, while
the full 3-D shifts drive trilinear resampling of the cost volumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from .core import Volume
from .errors import DimMismatch, NonMonotoneMapping, UnstableStep


@dataclass(frozen=True)
class VectorField:
    """Per-voxel 3-vectors, shape (X, Y, Z, 3), components ordered x, y, z."""

    data: np.ndarray
    spacing: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64)
        if data.ndim != 4 or data.shape[3] != 3:
            raise DimMismatch(f"vector field must have shape (X, Y, Z, 3), got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise DimMismatch("vector field contains non-finite components")
        object.__setattr__(self, "data", data)

    @property
    def dims(self):
        return self.data.shape[:3]

    def magnitudes(self):
        return np.sqrt(np.sum(self.data**2, axis=3))


def _replicated(data, axis, shift):
    """data shifted by +-1 along axis with edge replication."""
    idx = [slice(None)] * data.ndim
    pad = [slice(None)] * data.ndim
    if shift > 0:
        idx[axis] = slice(1, None)
        pad[axis] = slice(-1, None)
        return np.concatenate([data[tuple(idx)], data[tuple(pad)]], axis=axis)
    idx[axis] = slice(None, -1)
    pad[axis] = slice(None, 1)
    return np.concatenate([data[tuple(pad)], data[tuple(idx)]], axis=axis)


def _gradient(data):
    """Central differences with replicated borders, one array per axis."""
    return [
        0.5 * (_replicated(data, ax, +1) - _replicated(data, ax, -1)) for ax in range(3)
    ]


def _laplacian(u):
    out = -6.0 * u
    for ax in range(3):
        out += _replicated(u, ax, +1) + _replicated(u, ax, -1)
    return out


def edge_magnitude(volume: Volume) -> Volume:
    """Gradient-magnitude volume: ridges sit on intensity transitions.

    Feeding this to compute_gvf makes the diffused field point toward
    transitions from both sides, which is what center displacement needs; a
    raw intensity step would yield a one-signed field.
    """
    grad = _gradient(volume.data)
    return Volume(np.sqrt(grad[0] ** 2 + grad[1] ** 2 + grad[2] ** 2), volume.spacing)


def stable_step(mu: float, max_grad_sq: float) -> float:
    """Largest stable explicit time step for the diffusion update.

    The update u += dt * (mu * lap(u) - (u - g) * |g|^2) is a damped
    diffusion; the 3-D six-neighbor Laplacian has spectral radius 12, so
    stability requires dt * (12 * mu + max |g|^2) <= 2.
    """
    return 2.0 / (12.0 * mu + max_grad_sq)


def compute_gvf(volume: Volume, mu: float = 0.2, iterations: int = 80, dt=None) -> VectorField:
    """Feature-preserving diffusion of the volume gradient.

    With iterations == 0 the raw central-difference gradient is returned.
    The gradient is normalized internally (max vector norm 1) for a
    step-size bound independent of intensity range, then scaled back, so
    the output matches the raw gradient's units.  dt defaults to 90% of the
    stability bound capped at 1; a user-forced dt above the bound raises
    UnstableStep.
    """
    if mu <= 0:
        raise UnstableStep("mu must be positive")
    if iterations < 0:
        raise UnstableStep("iterations must be >= 0")

    grad = np.stack(_gradient(volume.data), axis=3)
    if iterations == 0:
        return VectorField(grad, volume.spacing)

    gmax = float(np.sqrt(np.sum(grad**2, axis=3)).max())
    if gmax == 0.0:
        return VectorField(grad, volume.spacing)

    g = grad / gmax
    sq = np.sum(g**2, axis=3)[..., None]
    bound = stable_step(mu, float(sq.max()))
    if dt is None:
        dt = min(1.0, 0.9 * bound)
    elif dt <= 0 or dt > bound:
        raise UnstableStep(f"dt={dt} outside (0, {bound:.6g}]")

    u = g.copy()
    for _ in range(iterations):
        u += dt * (mu * _laplacian(u) - (u - g) * sq)
    return VectorField(u * gmax, volume.spacing)


def normalize_and_shift(field: VectorField, delta: float = 1.0) -> np.ndarray:
    """Voxel-center shifts with the maximum shift equal to delta / 2.

    Returns the displacement of every center as an (X, Y, Z, 3) array; the
    shifted center is the integer grid position plus this displacement.  A
    zero field yields zero shifts (normalization factor 0 by convention).
    """
    if delta <= 0:
        raise DimMismatch("delta must be positive")
    peak = float(field.magnitudes().max())
    factor = 0.0 if peak == 0.0 else delta / (2.0 * peak)
    return factor * field.data


def mappings_from_shifts(shifts: np.ndarray, dims=None) -> np.ndarray:
    """Per-column positions k + shift_z(k), validated strictly increasing.

    Confinement of each shift to half a voxel makes monotonicity hold
    except in the degenerate boundary case where two adjacent centers both
    attain the extreme shift toward each other; that case raises
    NonMonotoneMapping rather than being silently perturbed.
    """
    shifts = np.asarray(shifts, dtype=np.float64)
    if dims is not None and tuple(dims) != shifts.shape[:3]:
        raise DimMismatch(f"shift dims {shifts.shape[:3]} != {tuple(dims)}")
    z = shifts.shape[2]
    mappings = np.arange(z, dtype=np.float64) + shifts[..., 2]
    if z > 1:
        bad = np.argwhere(np.diff(mappings, axis=2) <= 0)
        if bad.size:
            x, y, k = bad[0]
            raise NonMonotoneMapping(
                int(k) + 1, f"column ({x}, {y}) collapsed at index {k + 1}"
            )
    return mappings


def deform_cost_volume(cost: Volume, shifts: np.ndarray) -> Volume:
    """Resample a cost volume at the shifted centers (trilinear, clamped)."""
    if shifts.shape[:3] != cost.dims:
        raise DimMismatch(f"shift dims {shifts.shape[:3]} != cost dims {cost.dims}")
    x, y, z = cost.dims
    grid = np.meshgrid(
        np.arange(x, dtype=np.float64),
        np.arange(y, dtype=np.float64),
        np.arange(z, dtype=np.float64),
        indexing="ij",
    )
    coords = [grid[ax] + shifts[..., ax] for ax in range(3)]
    resampled = map_coordinates(cost.data, coords, order=1, mode="nearest")
    return Volume(resampled, cost.spacing)
