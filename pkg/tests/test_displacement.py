import numpy as np
import pytest

from surfcut.core import Volume, validate_mapping
from surfcut.displacement import (
    VectorField,
    compute_gvf,
    deform_cost_volume,
    edge_magnitude,
    mappings_from_shifts,
    normalize_and_shift,
    stable_step,
)
from surfcut.errors import NonMonotoneMapping, UnstableStep


def _ramp_volume(dims, direction=(0.0, 0.0, 1.0), offset=0.0):
    x, y, z = dims
    gx, gy, gz = direction
    xs, ys, zs = np.meshgrid(np.arange(x), np.arange(y), np.arange(z), indexing="ij")
    return Volume(offset + gx * xs + gy * ys + gz * zs)


class TestComputeGvf:
    def test_constant_volume_zero_field(self):
        field = compute_gvf(Volume(np.full((4, 4, 6), 3.0)), iterations=40)
        assert np.all(field.data == 0.0)

    def test_zero_iterations_is_central_difference(self):
        rng = np.random.default_rng(5)
        vol = Volume(rng.uniform(0, 10, (5, 4, 6)))
        field = compute_gvf(vol, iterations=0)
        interior = vol.data
        gz = 0.5 * (interior[:, :, 2:] - interior[:, :, :-2])
        np.testing.assert_allclose(field.data[:, :, 1:-1, 2], gz, atol=1e-12)
        # replicated borders: one-sided half-difference at the ends
        np.testing.assert_allclose(
            field.data[:, :, 0, 2], 0.5 * (interior[:, :, 1] - interior[:, :, 0]),
            atol=1e-12,
        )

    def test_ridge_input_points_toward_ridge_from_both_sides(self):
        # edge-strength profile of a step at z0: a ridge; the diffused field's
        # z-components must point toward z0 from both sides
        z0 = 8
        dims = (3, 3, 17)
        zs = np.arange(dims[2], dtype=float)
        ridge = np.exp(-0.5 * (zs - z0) ** 2)
        vol = Volume(np.broadcast_to(ridge, dims).copy())
        field = compute_gvf(vol, mu=0.2, iterations=60)
        fz = field.data[1, 1, :, 2]
        assert np.all(fz[:z0] > 0)
        assert np.all(fz[z0 + 1 :] < 0)

    def test_step_edge_pipeline_property(self):
        # through the edge-magnitude front end, a raw intensity step gains a
        # displacement field pointing toward the step from both sides
        z0 = 7
        dims = (3, 3, 16)
        data = np.where(np.arange(dims[2]) >= z0 + 0.5, 100.0, 0.0)
        vol = Volume(np.broadcast_to(data, dims).copy())
        field = compute_gvf(edge_magnitude(vol), mu=0.2, iterations=60)
        fz = field.data[1, 1, :, 2]
        assert np.all(fz[:z0] >= 0) and fz[z0 - 1] > 0
        assert np.all(fz[z0 + 2 :] <= 0) and fz[z0 + 2] < 0

    def test_small_mu_converges_to_gradient_where_nonzero(self):
        rng = np.random.default_rng(6)
        vol = Volume(rng.uniform(0, 10, (4, 4, 8)))
        raw = compute_gvf(vol, iterations=0)
        diffused = compute_gvf(vol, mu=1e-8, iterations=400)
        mag = raw.magnitudes()
        strong = mag > 0.5 * mag.max()
        np.testing.assert_allclose(diffused.data[strong], raw.data[strong],
                                   rtol=1e-3, atol=1e-6)

    def test_forced_dt_above_bound_raises(self):
        vol = _ramp_volume((3, 3, 5))
        with pytest.raises(UnstableStep):
            compute_gvf(vol, mu=0.2, iterations=5, dt=10.0)

    def test_stable_step_bound(self):
        assert stable_step(0.2, 1.0) == pytest.approx(2.0 / 3.4)


class TestNormalizeAndShift:
    def test_zero_field_zero_shifts(self):
        field = VectorField(np.zeros((3, 3, 4, 3)))
        shifts = normalize_and_shift(field, delta=1.0)
        assert np.all(shifts == 0.0)

    def test_normalization_factor_value(self):
        data = np.zeros((2, 2, 2, 3))
        data[0, 0, 0] = (0.0, 0.0, 4.0)
        shifts = normalize_and_shift(VectorField(data), delta=1.0)
        # factor = 1 / (2 * 4) = 0.125
        assert shifts[0, 0, 0, 2] == pytest.approx(0.5)
        assert np.abs(shifts).max() == pytest.approx(0.5)

    def test_max_shift_is_half_delta_exactly(self):
        rng = np.random.default_rng(7)
        for trial in range(10):
            field = VectorField(rng.normal(0, 3, (4, 3, 5, 3)))
            delta = float(rng.uniform(0.5, 2.0))
            shifts = normalize_and_shift(field, delta)
            mags = np.sqrt((shifts**2).sum(axis=3))
            assert abs(mags.max() - delta / 2) <= 1e-12


class TestMappingsFromShifts:
    def test_zero_shifts_regular_grid(self):
        maps = mappings_from_shifts(np.zeros((2, 2, 5, 3)))
        np.testing.assert_array_equal(maps[0, 0], np.arange(5))

    def test_hand_example(self):
        shifts = np.zeros((1, 1, 3, 3))
        shifts[0, 0, :, 2] = (0.4, -0.4, 0.0)
        maps = mappings_from_shifts(shifts)
        np.testing.assert_allclose(maps[0, 0], [0.4, 0.6, 2.0])
        validate_mapping(maps[0, 0])

    def test_collapse_detected(self):
        shifts = np.zeros((1, 1, 2, 3))
        shifts[0, 0, :, 2] = (0.5, -0.5)
        with pytest.raises(NonMonotoneMapping):
            mappings_from_shifts(shifts)

    def test_normalized_fields_always_monotone(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            field = VectorField(rng.normal(0, 2, (3, 3, 6, 3)))
            shifts = normalize_and_shift(field, delta=1.0)
            maps = mappings_from_shifts(shifts)
            assert np.all(np.diff(maps, axis=2) > 0)


class TestDeformCostVolume:
    def test_identity(self):
        rng = np.random.default_rng(9)
        vol = Volume(rng.uniform(0, 5, (3, 4, 5)))
        out = deform_cost_volume(vol, np.zeros((3, 4, 5, 3)))
        np.testing.assert_allclose(out.data, vol.data)

    def test_full_voxel_shift_picks_neighbor(self):
        vol = Volume(np.arange(8, dtype=float).reshape(1, 1, 8) ** 2)
        shifts = np.zeros((1, 1, 8, 3))
        shifts[0, 0, 3, 2] = 1.0
        out = deform_cost_volume(vol, shifts)
        assert out.data[0, 0, 3] == vol.data[0, 0, 4]

    def test_exact_on_affine_volumes(self):
        rng = np.random.default_rng(10)
        vol = _ramp_volume((4, 5, 6), direction=(1.5, -2.0, 0.75), offset=3.0)
        shifts = rng.uniform(-0.4, 0.4, (4, 5, 6, 3))
        out = deform_cost_volume(vol, shifts)
        x, y, z = np.meshgrid(np.arange(4), np.arange(5), np.arange(6), indexing="ij")
        # border clamping replicates the edge sample, so the expected value
        # is the affine field at the clamped coordinates
        cx = np.clip(x + shifts[..., 0], 0, 3)
        cy = np.clip(y + shifts[..., 1], 0, 4)
        cz = np.clip(z + shifts[..., 2], 0, 5)
        expected = 3.0 + 1.5 * cx - 2.0 * cy + 0.75 * cz
        np.testing.assert_allclose(out.data, expected, atol=1e-12)

    def test_linear_ramp_quarter_shift(self):
        vol = Volume(np.arange(10, dtype=float).reshape(1, 1, 10))
        shifts = np.zeros((1, 1, 10, 3))
        shifts[..., 2] = 0.25
        out = deform_cost_volume(vol, shifts)
        np.testing.assert_allclose(out.data[0, 0, :-1], np.arange(9) + 0.25)
