import numpy as np
import pytest

from surfcut.errors import (
    ColumnSetMismatch,
    DimMismatch,
    EmptyContour,
    EmptySurface,
    ZeroReferenceArea,
)
from surfcut.metrics import hausdorff, jaccard, pad, uassd, umsp


def _plane_points(z, nx=8, ny=8):
    xs, ys = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    return np.stack([xs.ravel(), ys.ravel(), np.full(nx * ny, float(z))], axis=1)


class TestUmsp:
    def test_identity(self):
        a = np.array([1.0, 2.0, 3.0])
        assert umsp(a, a) == 0.0

    def test_hand_value(self):
        assert umsp([2.0, 3.0], [2.5, 2.0]) == pytest.approx(0.75)

    def test_constant_offset(self):
        a = np.array([1.0, 4.0, 9.0])
        assert umsp(a + 0.3, a) == pytest.approx(0.3)

    def test_mismatch(self):
        with pytest.raises(ColumnSetMismatch):
            umsp([1.0, 2.0], [1.0, 2.0, 3.0])


class TestUassd:
    def test_identical(self):
        pts = _plane_points(4.0)
        assert uassd(pts, pts) == 0.0

    def test_parallel_planes_unit_spacing(self):
        assert uassd(_plane_points(3.0), _plane_points(5.0)) == pytest.approx(2.0)

    def test_physical_spacing(self):
        d = uassd(_plane_points(2.0), _plane_points(4.0), spacing=(6.54, 67.0, 3.23))
        assert d == pytest.approx(2 * 3.23, abs=1e-9)

    def test_scales_linearly_with_spacing(self):
        a, b = _plane_points(1.0), _plane_points(2.0)
        base = uassd(a, b, spacing=(1, 1, 1))
        assert uassd(a, b, spacing=(2, 2, 2)) == pytest.approx(2 * base)

    def test_empty(self):
        with pytest.raises(EmptySurface):
            uassd(np.empty((0, 3)), _plane_points(1.0))

    def test_symmetric(self):
        rng = np.random.default_rng(13)
        a = rng.uniform(0, 10, (40, 3))
        b = rng.uniform(0, 10, (25, 3))
        assert uassd(a, b) == pytest.approx(uassd(b, a))


class TestJaccard:
    def test_equal_nonempty(self):
        m = np.zeros((10, 10), dtype=bool)
        m[2:5, 2:5] = True
        assert jaccard(m, m) == 1.0

    def test_disjoint(self):
        a = np.zeros((10, 10), dtype=bool)
        b = np.zeros((10, 10), dtype=bool)
        a[:2], b[5:] = True, True
        assert jaccard(a, b) == 0.0

    def test_square_overlap(self):
        a = np.zeros((20, 20), dtype=bool)
        b = np.zeros((20, 20), dtype=bool)
        a[0:10, 0:10] = True
        b[5:15, 5:15] = True
        assert jaccard(a, b) == pytest.approx(25.0 / 175.0, abs=1e-12)

    def test_both_empty_convention(self):
        assert jaccard(np.zeros((4, 4), bool), np.zeros((4, 4), bool)) == 1.0

    def test_symmetry_and_range(self):
        rng = np.random.default_rng(14)
        a = rng.uniform(size=(12, 12)) > 0.5
        b = rng.uniform(size=(12, 12)) > 0.5
        assert jaccard(a, b) == jaccard(b, a)
        assert 0.0 <= jaccard(a, b) <= 1.0

    def test_dims(self):
        with pytest.raises(DimMismatch):
            jaccard(np.zeros((2, 2), bool), np.zeros((3, 3), bool))


class TestPad:
    def test_equal(self):
        assert pad(100.0, 100.0) == 0.0

    def test_below_and_above_symmetric(self):
        assert pad(80.0, 100.0) == pytest.approx(0.2)
        assert pad(120.0, 100.0) == pytest.approx(0.2)

    def test_zero_reference(self):
        with pytest.raises(ZeroReferenceArea):
            pad(5.0, 0.0)


class TestHausdorff:
    def test_identical(self):
        pts = np.array([[0.0, 0.0], [1.0, 2.0], [3.0, 1.0]])
        assert hausdorff(pts, pts) == 0.0

    def test_translated_circle(self):
        t = np.linspace(0, 2 * np.pi, 2000, endpoint=False)
        circle = np.stack([np.cos(t), np.sin(t)], axis=1)
        shifted = circle + np.array([3.0, 0.0])
        assert hausdorff(circle, shifted) == pytest.approx(3.0, abs=1e-3)

    def test_single_points(self):
        assert hausdorff([[0.0, 0.0]], [[3.0, 4.0]]) == pytest.approx(5.0)

    def test_empty(self):
        with pytest.raises(EmptyContour):
            hausdorff(np.empty((0, 2)), [[0.0, 0.0]])

    def test_adding_points_never_increases_directed_term(self):
        rng = np.random.default_rng(15)
        a = rng.uniform(0, 5, (30, 2))
        b = rng.uniform(0, 5, (20, 2))
        extra = rng.uniform(0, 5, (10, 2))
        from scipy.spatial import cKDTree

        directed = cKDTree(b).query(a)[0].max()
        directed_bigger_b = cKDTree(np.vstack([b, extra])).query(a)[0].max()
        assert directed_bigger_b <= directed + 1e-12

    def test_symmetric_as_implemented(self):
        rng = np.random.default_rng(16)
        a = rng.uniform(0, 5, (15, 2))
        b = rng.uniform(0, 5, (25, 2))
        assert hausdorff(a, b) == pytest.approx(hausdorff(b, a))
