"""Synthetic ground truth with an explicit partial-volume intensity model.

Surfaces are continuous height fields z_i(x, y); each voxel's intensity is
the overlap-weighted blend of the layer intensities inside its z-extent
[k - 0.5, k + 0.5).  Boundary voxels therefore carry subvoxel position
information, which is what the displacement front end recovers.  The model
is 1-D along z per column, so the returned ground truth is exact.
"""

from __future__ import annotations

import numpy as np

from .core import Volume
from .errors import DimMismatch, FactorExceedsDim, SurfacesOutOfOrder, SurfcutError


def surface_field(spec: dict, x_dim: int, y_dim: int) -> np.ndarray:
    """Analytic height field from a small JSON-able spec.

    Families:
      {"type": "plane", "base": z0, "slope_x": gx, "slope_y": gy}
      {"type": "sinusoid", "base": z0, "amplitude": a, "period": px,
       "phase": p, "amplitude_y": ay, "period_y": py}  (y terms optional)

    A positional "coeffs" list is also accepted: [base, slope_x, slope_y]
    for planes, [base, amplitude, period, phase] for sinusoids.
    """
    if "coeffs" in spec:
        names = {
            "plane": ("base", "slope_x", "slope_y"),
            "sinusoid": ("base", "amplitude", "period", "phase"),
        }.get(spec.get("type"), ())
        spec = {"type": spec.get("type"), **dict(zip(names, spec["coeffs"]))}
    xs = np.arange(x_dim, dtype=np.float64)[:, None]
    ys = np.arange(y_dim, dtype=np.float64)[None, :]
    kind = spec.get("type")
    if kind == "plane":
        return (
            float(spec.get("base", 0.0))
            + float(spec.get("slope_x", 0.0)) * xs
            + float(spec.get("slope_y", 0.0)) * ys
            + np.zeros((x_dim, y_dim))
        )
    if kind == "sinusoid":
        z = float(spec.get("base", 0.0)) + np.zeros((x_dim, y_dim))
        amp = float(spec.get("amplitude", 0.0))
        if amp:
            period = float(spec.get("period", x_dim))
            z = z + amp * np.sin(2.0 * np.pi * xs / period + float(spec.get("phase", 0.0)))
        amp_y = float(spec.get("amplitude_y", 0.0))
        if amp_y:
            period_y = float(spec.get("period_y", y_dim))
            z = z + amp_y * np.sin(2.0 * np.pi * ys / period_y + float(spec.get("phase_y", 0.0)))
        return z
    raise SurfcutError(f"unknown surface family {kind!r}")


def generate_phantom(
    dims,
    surfaces,
    intensities,
    noise_sigma: float = 0.0,
    seed: int = 0,
    spacing=(1.0, 1.0, 1.0),
):
    """Render ordered surfaces into a volume with partial-volume blending.

    surfaces: list of (X, Y) height-field arrays or spec dicts, strictly
    ordered bottom to top everywhere.  intensities: one value per layer,
    len(surfaces) + 1 of them.  Returns (Volume, truth) where truth is the
    (num_surfaces, X, Y) array of exact surface positions.
    """
    x_dim, y_dim, z_dim = dims
    fields = [
        surface_field(s, x_dim, y_dim) if isinstance(s, dict) else np.asarray(s, dtype=np.float64)
        for s in surfaces
    ]
    for f in fields:
        if f.shape != (x_dim, y_dim):
            raise DimMismatch(f"surface field shape {f.shape} != {(x_dim, y_dim)}")
    truth = np.stack(fields)
    if truth.shape[0] > 1 and np.any(np.diff(truth, axis=0) <= 0):
        raise SurfacesOutOfOrder("surfaces must satisfy z_{i+1}(x, y) > z_i(x, y) everywhere")
    intensities = np.asarray(intensities, dtype=np.float64)
    if intensities.size != truth.shape[0] + 1:
        raise SurfcutError("need one intensity per layer: len(surfaces) + 1")

    # fraction of voxel [k - 0.5, k + 0.5) lying below each surface
    lower = np.arange(z_dim, dtype=np.float64) - 0.5
    below = np.clip(truth[:, :, :, None] - lower[None, None, None, :], 0.0, 1.0)
    data = intensities[0] * below[0]
    for j in range(1, truth.shape[0]):
        data += intensities[j] * (below[j] - below[j - 1])
    data += intensities[-1] * (1.0 - below[-1])

    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        data = data + rng.normal(0.0, noise_sigma, size=data.shape)
    return Volume(data, spacing), truth


def downsample(volume: Volume, factors) -> Volume:
    """Block-mean pooling; trailing remainders are cropped, spacing scales."""
    fx, fy, fz = (int(f) for f in factors)
    if min(fx, fy, fz) < 1:
        raise FactorExceedsDim("factors must be integers >= 1")
    x_dim, y_dim, z_dim = volume.dims
    if fx > x_dim or fy > y_dim or fz > z_dim:
        raise FactorExceedsDim(f"factors {(fx, fy, fz)} exceed dims {volume.dims}")
    nx, ny, nz = x_dim // fx, y_dim // fy, z_dim // fz
    cropped = volume.data[: nx * fx, : ny * fy, : nz * fz]
    pooled = cropped.reshape(nx, fx, ny, fy, nz, fz).mean(axis=(1, 3, 5))
    sx, sy, sz = volume.spacing
    return Volume(pooled, (sx * fx, sy * fy, sz * fz))


def downsample_positions(positions, factor: int):
    """Map continuous z-positions into block-mean downsampled coordinates.

    Downsampled voxel k averages original voxels [f*k, f*k + f - 1], whose
    joint center sits at f*k + (f - 1) / 2 in original coordinates.
    """
    f = int(factor)
    if f < 1:
        raise FactorExceedsDim("factor must be >= 1")
    return (np.asarray(positions, dtype=np.float64) - (f - 1) / 2.0) / f
