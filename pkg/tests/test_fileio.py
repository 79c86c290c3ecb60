import json

import numpy as np
import pytest

from surfcut.core import Volume
from surfcut.displacement import VectorField
from surfcut.errors import ColumnSetMismatch, DimMismatch
from surfcut import fileio


class TestVolumeRoundTrip:
    def test_round_trip(self, tmp_path, rng):
        vol = Volume(rng.uniform(0, 100, (3, 4, 5)).astype(np.float32),
                     spacing=(6.54, 67.0, 3.23))
        path = fileio.save_volume(vol, tmp_path / "vol.raw")
        back = fileio.load_volume(path)
        assert back.dims == vol.dims
        assert back.spacing == vol.spacing
        np.testing.assert_array_equal(back.data, vol.data)

    def test_sidecar_contents(self, tmp_path):
        vol = Volume(np.zeros((2, 3, 4)))
        path = fileio.save_volume(vol, tmp_path / "v")
        meta = json.loads((tmp_path / "v.json").read_text())
        assert meta["dims"] == [2, 3, 4]
        assert path.suffix == ".raw"

    def test_z_fastest_layout(self, tmp_path):
        data = np.arange(8, dtype=np.float64).reshape(2, 2, 2)
        path = fileio.save_volume(Volume(data), tmp_path / "v.raw")
        raw = np.frombuffer(path.read_bytes(), dtype="<f4")
        # z varies fastest: consecutive values share (x, y)
        np.testing.assert_array_equal(raw[:2], data[0, 0])

    def test_size_mismatch_detected(self, tmp_path):
        vol = Volume(np.zeros((2, 2, 2)))
        path = fileio.save_volume(vol, tmp_path / "v.raw")
        meta = json.loads((tmp_path / "v.json").read_text())
        meta["dims"] = [2, 2, 3]
        (tmp_path / "v.json").write_text(json.dumps(meta))
        with pytest.raises(DimMismatch):
            fileio.load_volume(path)


class TestMappingsRoundTrip:
    def test_round_trip(self, tmp_path, rng):
        maps = np.cumsum(rng.uniform(0.1, 1.0, (3, 2, 4)), axis=2)
        path = fileio.save_mappings(maps, tmp_path / "maps.csv")
        np.testing.assert_allclose(fileio.load_mappings(path), maps)

    def test_missing_rows_detected(self, tmp_path):
        path = tmp_path / "maps.csv"
        path.write_text("x,y,k,position\n0,0,0,0.0\n0,0,1,1.0\n1,0,1,1.0\n")
        with pytest.raises(ColumnSetMismatch):
            fileio.load_mappings(path)


class TestVectorFieldRoundTrip:
    def test_round_trip(self, tmp_path, rng):
        field = VectorField(rng.normal(0, 1, (2, 3, 4, 3)), spacing=(1.0, 1.0, 2.0))
        paths = fileio.save_vector_field(field, tmp_path / "gvf")
        assert len(paths) == 3
        meta = json.loads((tmp_path / "gvf_z.json").read_text())
        assert meta["role"] == "gvf" and meta["component"] == "z"
        back = fileio.load_vector_field(tmp_path / "gvf")
        np.testing.assert_allclose(back.data, field.data, atol=1e-6)


class TestSurfacesRoundTrip:
    def test_round_trip(self, tmp_path, rng):
        labels = rng.integers(0, 5, (2, 3, 2))
        positions = labels + rng.uniform(-0.4, 0.4, labels.shape)
        path = fileio.save_surfaces(labels, positions, tmp_path / "s.csv")
        lab2, pos2 = fileio.load_surfaces(path)
        np.testing.assert_array_equal(lab2, labels)
        np.testing.assert_allclose(pos2, positions)

    def test_truth_round_trip(self, tmp_path, rng):
        truth = rng.uniform(0, 10, (2, 4, 3))
        path = fileio.save_truth(truth, tmp_path / "t.csv")
        np.testing.assert_allclose(fileio.load_truth(path), truth)

    def test_contour_load(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("x,y\n0.0,1.0\n2.5,3.5\n")
        pts = fileio.load_contour(path)
        np.testing.assert_allclose(pts, [[0.0, 1.0], [2.5, 3.5]])
