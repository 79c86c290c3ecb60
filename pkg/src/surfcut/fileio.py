"""File formats for volumes, mappings, vector fields, and surfaces.

Volumes are raw little-endian float32, z fastest then y then x, with a JSON
sidecar {"dims": [X, Y, Z], "spacing": [sx, sy, sz]} next to the raw file.
Column mappings and surfaces travel as small CSV files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import Volume
from .displacement import VectorField
from .errors import ColumnSetMismatch, DimMismatch, SurfcutError


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def save_volume(volume: Volume, path, extra=None) -> Path:
    """Write raw float32 data plus the JSON sidecar; returns the raw path."""
    path = Path(path)
    if path.suffix != ".raw":
        path = path.with_suffix(".raw")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(np.ascontiguousarray(volume.data, dtype="<f4").tobytes())
    meta = {"dims": list(volume.dims), "spacing": list(volume.spacing)}
    if extra:
        meta.update(extra)
    _sidecar(path).write_text(json.dumps(meta, sort_keys=True) + "\n")
    return path


def load_volume(path) -> Volume:
    path = Path(path)
    if path.suffix != ".raw":
        path = path.with_suffix(".raw")
    meta = json.loads(_sidecar(path).read_text())
    dims = tuple(int(d) for d in meta["dims"])
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    if raw.size != int(np.prod(dims)):
        raise DimMismatch(f"{path}: {raw.size} values, sidecar dims {dims}")
    spacing = tuple(float(s) for s in meta.get("spacing", (1.0, 1.0, 1.0)))
    return Volume(raw.astype(np.float64).reshape(dims), spacing)


def save_mappings(mappings: np.ndarray, path) -> Path:
    """CSV with header x,y,k,position, one row per (column, level)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    x_dim, y_dim, z_dim = mappings.shape
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "k", "position"])
        for x in range(x_dim):
            for y in range(y_dim):
                for k in range(z_dim):
                    writer.writerow([x, y, k, repr(float(mappings[x, y, k]))])
    return path


def load_mappings(path) -> np.ndarray:
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append((int(row["x"]), int(row["y"]), int(row["k"]), float(row["position"])))
    if not rows:
        raise SurfcutError(f"{path}: empty mapping file")
    xs, ys, ks, _ = zip(*rows)
    dims = (max(xs) + 1, max(ys) + 1, max(ks) + 1)
    if len(rows) != int(np.prod(dims)):
        raise ColumnSetMismatch(f"{path}: expected {np.prod(dims)} rows, got {len(rows)}")
    out = np.full(dims, np.nan)
    for x, y, k, pos in rows:
        out[x, y, k] = pos
    if np.any(np.isnan(out)):
        raise ColumnSetMismatch(f"{path}: missing (x, y, k) entries")
    return out


_COMPONENTS = ("x", "y", "z")


def save_vector_field(field: VectorField, prefix) -> list:
    """Three raw volumes <prefix>_x/_y/_z.raw with role-tagged sidecars."""
    prefix = Path(prefix)
    paths = []
    for ax, name in enumerate(_COMPONENTS):
        vol = Volume(field.data[..., ax], field.spacing)
        paths.append(
            save_volume(vol, prefix.parent / f"{prefix.name}_{name}.raw",
                        extra={"role": "gvf", "component": name})
        )
    return paths


def load_vector_field(prefix) -> VectorField:
    prefix = Path(prefix)
    comps = [load_volume(prefix.parent / f"{prefix.name}_{name}.raw") for name in _COMPONENTS]
    return VectorField(np.stack([c.data for c in comps], axis=3), comps[0].spacing)


def save_surfaces(labels, positions, path) -> Path:
    """CSV x,y,surface,label,position for recovered surfaces."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lam, x_dim, y_dim = labels.shape
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "surface", "label", "position"])
        for i in range(lam):
            for x in range(x_dim):
                for y in range(y_dim):
                    writer.writerow([x, y, i, int(labels[i, x, y]),
                                     repr(float(positions[i, x, y]))])
    return path


def load_surfaces(path):
    """Returns (labels, positions) arrays shaped (num_surfaces, X, Y)."""
    entries = {}
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            key = (int(row["surface"]), int(row["x"]), int(row["y"]))
            label = row.get("label")
            entries[key] = (int(label) if label not in (None, "") else -1,
                            float(row["position"]))
    if not entries:
        raise SurfcutError(f"{path}: empty surface file")
    surfaces, xs, ys = zip(*entries.keys())
    lam, x_dim, y_dim = max(surfaces) + 1, max(xs) + 1, max(ys) + 1
    if len(entries) != lam * x_dim * y_dim:
        raise ColumnSetMismatch(f"{path}: incomplete surface grid")
    labels = np.zeros((lam, x_dim, y_dim), dtype=np.int64)
    positions = np.zeros((lam, x_dim, y_dim))
    for (i, x, y), (label, pos) in entries.items():
        labels[i, x, y] = label
        positions[i, x, y] = pos
    return labels, positions


def save_truth(truth: np.ndarray, path) -> Path:
    """CSV x,y,surface,position for real-valued ground-truth surfaces."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lam, x_dim, y_dim = truth.shape
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "surface", "position"])
        for i in range(lam):
            for x in range(x_dim):
                for y in range(y_dim):
                    writer.writerow([x, y, i, repr(float(truth[i, x, y]))])
    return path


def load_truth(path) -> np.ndarray:
    entries = {}
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            entries[(int(row["surface"]), int(row["x"]), int(row["y"]))] = float(row["position"])
    if not entries:
        raise SurfcutError(f"{path}: empty truth file")
    surfaces, xs, ys = zip(*entries.keys())
    lam, x_dim, y_dim = max(surfaces) + 1, max(xs) + 1, max(ys) + 1
    if len(entries) != lam * x_dim * y_dim:
        raise ColumnSetMismatch(f"{path}: incomplete truth grid")
    out = np.zeros((lam, x_dim, y_dim))
    for (i, x, y), pos in entries.items():
        out[i, x, y] = pos
    return out


def load_contour(path) -> np.ndarray:
    """CSV with header x,y: one contour point per row."""
    pts = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            pts.append((float(row["x"]), float(row["y"])))
    if not pts:
        raise SurfcutError(f"{path}: empty contour file")
    return np.asarray(pts)
