"""Segmentation accuracy measures.

Surface measures compare per-column positions (unsigned mean positioning
error) or point sets (average symmetric surface distance, physical units).
Region and contour measures cover overlap (Jaccard), relative area
difference, and the symmetric max-min Hausdorff distance.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    ColumnSetMismatch,
    DimMismatch,
    EmptyContour,
    EmptySurface,
    ZeroReferenceArea,
)


def umsp(auto, ref) -> float:
    """Mean absolute per-column position difference, in mapping units."""
    auto = np.asarray(auto, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if auto.shape != ref.shape:
        raise ColumnSetMismatch(f"column sets differ: {auto.shape} vs {ref.shape}")
    if auto.size == 0:
        raise EmptySurface("no columns to compare")
    return float(np.mean(np.abs(auto - ref)))


def uassd(auto_points, ref_points, spacing=(1.0, 1.0, 1.0)) -> float:
    """Symmetric mean nearest-point distance between two surfaces.

    Points are (N, 3) index-space coordinates; spacing converts them to
    physical units before distances are taken.  Both directions are
    averaged.
    """
    a = np.atleast_2d(np.asarray(auto_points, dtype=np.float64))
    r = np.atleast_2d(np.asarray(ref_points, dtype=np.float64))
    if a.size == 0 or r.size == 0:
        raise EmptySurface("point sets must be nonempty")
    if a.shape[1] != r.shape[1]:
        raise DimMismatch("point sets must share dimensionality")
    s = np.asarray(spacing, dtype=np.float64)
    a = a * s
    r = r * s
    d_ar = cKDTree(r).query(a)[0]
    d_ra = cKDTree(a).query(r)[0]
    return float(0.5 * (d_ar.mean() + d_ra.mean()))


def jaccard(region_a, region_b) -> float:
    """Overlap |A & B| / |A | B|; 1.0 when both regions are empty."""
    a = np.asarray(region_a, dtype=bool)
    b = np.asarray(region_b, dtype=bool)
    if a.shape != b.shape:
        raise DimMismatch(f"region shapes differ: {a.shape} vs {b.shape}")
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return float(np.count_nonzero(a & b) / union)


def pad(area_auto: float, area_man: float) -> float:
    """Relative unsigned area difference against the reference area."""
    if area_man <= 0:
        raise ZeroReferenceArea("reference area must be positive")
    return float(abs(area_auto - area_man) / area_man)


def hausdorff(contour_a, contour_b) -> float:
    """Symmetric Hausdorff distance max(max-min, max-min) of two point lists."""
    a = np.atleast_2d(np.asarray(contour_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(contour_b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise EmptyContour("contours must be nonempty")
    if a.shape[1] != b.shape[1]:
        raise DimMismatch("contours must share dimensionality")
    d_ab = cKDTree(b).query(a)[0].max()
    d_ba = cKDTree(a).query(b)[0].max()
    return float(max(d_ab, d_ba))
