import io

import networkx as nx
import numpy as np
import pytest
from numpy.lib import format as npy_format
from numpy.testing import assert_allclose, assert_array_equal

from src.data import (
    Dataset,
    read_dataset_csv,
    read_matrix_csv,
    read_npy,
    read_tensor,
    split_dataset,
    synth_blobs,
    synth_graph,
    synth_points,
    write_dataset_csv,
    write_matrix_csv,
    write_npy,
)
from src.data.generators import blob_centers
from src.utils.errors import NpyFormatError, ValidationError


def raw_npy(array, version=(1, 0)):
    buffer = io.BytesIO()
    npy_format.write_array(buffer, array, version=version, allow_pickle=False)
    return buffer.getvalue()


class TestNpy:
    @pytest.mark.parametrize("dtype", [np.float32, np.float64])
    def test_round_trip_keeps_dtype(self, tmp_path, rng, dtype):
        array = rng.normal(size=(4, 6)).astype(dtype)
        loaded = read_npy(write_npy(tmp_path / "a.npy", array))
        assert loaded.dtype == dtype
        assert_array_equal(loaded, array)

    def test_readable_by_numpy(self, tmp_path, rng):
        array = rng.normal(size=(3, 2, 2, 5))
        path = write_npy(tmp_path / "a.npy", array)
        assert_array_equal(np.load(path), array)

    def test_version_two_rejected(self, tmp_path):
        path = tmp_path / "v2.npy"
        path.write_bytes(raw_npy(np.zeros((2, 2)), version=(2, 0)))
        with pytest.raises(NpyFormatError, match="unsupported version"):
            read_npy(path)

    def test_truncated_payload(self, tmp_path, rng):
        path = write_npy(tmp_path / "a.npy", rng.normal(size=(5, 5)))
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(NpyFormatError, match="truncated payload"):
            read_npy(path)

    def test_fortran_order_rejected(self, tmp_path):
        path = tmp_path / "f.npy"
        path.write_bytes(raw_npy(np.asfortranarray(np.arange(6.0).reshape(2, 3))))
        with pytest.raises(NpyFormatError, match="fortran-order"):
            read_npy(path)

    @pytest.mark.parametrize("array", [np.arange(6, dtype=np.int32), np.arange(4.0).astype(">f8")])
    def test_unsupported_dtype(self, tmp_path, array):
        path = tmp_path / "d.npy"
        path.write_bytes(raw_npy(array))
        with pytest.raises(NpyFormatError, match="unsupported dtype"):
            read_npy(path)

    def test_not_npy(self, tmp_path):
        path = tmp_path / "x.npy"
        path.write_bytes(b"hello world, not an array")
        with pytest.raises(NpyFormatError):
            read_npy(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            read_npy(tmp_path / "missing.npy")

    def test_integer_arrays_not_written(self, tmp_path):
        with pytest.raises(ValidationError):
            write_npy(tmp_path / "i.npy", np.arange(3))

    def test_tensor_layout_inference(self, tmp_path, rng):
        assert read_tensor(write_npy(tmp_path / "bd.npy", rng.normal(size=(4, 3)))).layout == "BD"
        assert read_tensor(write_npy(tmp_path / "img.npy", rng.normal(size=(2, 3, 4, 4)))).layout == "BDHW"

    def test_three_axes_need_a_layout(self, tmp_path, rng):
        path = write_npy(tmp_path / "bnd.npy", rng.normal(size=(2, 5, 3)))
        with pytest.raises(ValidationError, match="layout"):
            read_tensor(path)
        assert read_tensor(path, "BND").channels == 3


class TestSyntheticPoints:
    def test_segment_lies_on_first_axis(self):
        points = synth_points("segment", 200, seed=1, dim=3)
        assert points.shape == (200, 3)
        assert_array_equal(points[:, 1:], 0.0)
        assert np.all((points[:, 0] >= 0) & (points[:, 0] < 1))

    def test_cantor_avoids_middle_third(self):
        x = synth_points("cantor", 2000, seed=2, depth=1)[:, 0]
        assert not np.any((x >= 1 / 3) & (x < 2 / 3))
        assert np.any(x < 1 / 3) and np.any(x >= 2 / 3)

    def test_cantor_deeper_levels(self):
        x = synth_points("cantor", 2000, seed=3, depth=2)[:, 0]
        assert not np.any((x >= 1 / 9) & (x < 2 / 9))

    def test_deterministic(self):
        assert_array_equal(synth_points("uniform_cube", 50, seed=9), synth_points("uniform_cube", 50, seed=9))
        assert not np.array_equal(synth_points("uniform_cube", 50, seed=9), synth_points("uniform_cube", 50, seed=10))

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            synth_points("sphere", 10, seed=0)


class TestBlobs:
    def test_shape_and_balance(self):
        data = synth_blobs(3, 167, dim=2, seed=0)
        assert len(data) == 501 and data.features == 2 and data.classes == 3
        assert np.bincount(data.y).tolist() == [167, 167, 167]

    def test_adjacent_centers_at_separation(self):
        centers = blob_centers(4, 2, 5.0, np.random.default_rng(0))
        gaps = np.linalg.norm(centers - np.roll(centers, 1, axis=0), axis=1)
        assert_allclose(gaps, 5.0)

    def test_zero_separation_shares_a_center(self):
        assert_array_equal(blob_centers(3, 2, 0.0, np.random.default_rng(0)), 0.0)
        data = synth_blobs(3, 50, separation=0.0, seed=1)
        assert len(data) == 150

    def test_invalid_arguments(self):
        with pytest.raises(ValidationError):
            synth_blobs(1, 10)
        with pytest.raises(ValidationError):
            synth_blobs(3, 10, separation=-1.0)


class TestGraphs:
    def test_kinds(self):
        assert len(synth_graph("ring", 10).edges) == 10
        assert len(synth_graph("path", 10).edges) == 9
        star = synth_graph("star", 6)
        assert star.n == 6 and all(0 in edge for edge in star.edges)

    def test_random_connected(self):
        g = synth_graph("random_connected", 25, seed=4, p=0.05)
        assert g.n == 25 and nx.is_connected(g.to_networkx())

    def test_small_ring_rejected(self):
        with pytest.raises(ValidationError):
            synth_graph("ring", 2)


class TestTables:
    def test_dataset_round_trip(self, tmp_path):
        data = synth_blobs(2, 20, dim=3, seed=5)
        loaded = read_dataset_csv(write_dataset_csv(data, tmp_path / "d.csv"))
        assert_array_equal(loaded.x, data.x)
        assert_array_equal(loaded.y, data.y)

    def test_missing_label_column(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValidationError, match="label"):
            read_dataset_csv(path)

    def test_non_numeric_features(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,label\nx,0\ny,1\n")
        with pytest.raises(ValidationError, match="Non-numeric"):
            read_dataset_csv(path)

    def test_matrix_round_trip(self, tmp_path, rng):
        matrix = rng.normal(size=(4, 4))
        assert_array_equal(read_matrix_csv(write_matrix_csv(matrix, tmp_path / "m.csv")), matrix)

    def test_invalid_dataset(self):
        with pytest.raises(ValidationError):
            Dataset(np.zeros((3, 2)), np.array([0, 1]))
        with pytest.raises(ValidationError):
            Dataset(np.zeros((2, 2)), np.array([0, -1]))

    def test_split(self, rng):
        data = synth_blobs(2, 50, seed=0)
        train, val = split_dataset(data, 0.2, rng)
        assert len(train) == 80 and len(val) == 20
        rows = np.vstack([train.x, val.x])
        assert_array_equal(np.sort(rows, axis=0), np.sort(data.x, axis=0))

    def test_split_fraction_bounds(self, rng):
        with pytest.raises(ValidationError):
            split_dataset(synth_blobs(2, 5), 1.0, rng)

    def test_shortest_repr_floats_read_back_exactly(self, tmp_path):
        values = np.array([[0.1 + 0.2, 1.0 / 3.0], [2.0 / 3.0, np.pi], [1e-300, -5.551115123125783e-17]])
        assert_array_equal(read_matrix_csv(write_matrix_csv(values, tmp_path / "m.csv")), values)
        data = Dataset(values, np.array([0, 1, 0]))
        assert_array_equal(read_dataset_csv(write_dataset_csv(data, tmp_path / "d.csv")).x, values)
