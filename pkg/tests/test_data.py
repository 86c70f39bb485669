import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from manifold_masks.data import (
    DataMatrix,
    knn_graph,
    load_dataset,
    save_binary,
    synth_dataset,
)
from manifold_masks.errors import FormatError, MetadataError, ParameterError


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadDataset:
    def test_csv_basic(self, tmp_path):
        path = write(tmp_path, "pts.csv", "0,0\n1,0\n0,1\n")
        X = load_dataset(path)
        assert X.n == 3 and X.d == 2
        np.testing.assert_array_equal(X.points, [[0, 0], [1, 0], [0, 1]])

    def test_csv_with_image_shape(self, tmp_path):
        path = write(tmp_path, "pts.csv", "0,0\n1,0\n0,1\n")
        meta = write(tmp_path, "pts.meta", "image_shape=[1, 2]\n")
        X = load_dataset(path, meta=meta)
        assert X.image_shape == (1, 2)

    def test_image_shape_mismatch(self, tmp_path):
        path = write(tmp_path, "pts.csv", "0,0\n1,0\n0,1\n")
        meta = write(tmp_path, "pts.meta", "image_shape=[2, 2]\n")
        with pytest.raises(MetadataError):
            load_dataset(path, meta=meta)

    def test_ragged_rows(self, tmp_path):
        path = write(tmp_path, "pts.csv", "0,0\n1\n")
        with pytest.raises(FormatError):
            load_dataset(path)

    def test_non_finite_rejected(self, tmp_path):
        path = write(tmp_path, "pts.csv", "0,0\nnan,1\n")
        with pytest.raises(ParameterError):
            load_dataset(path)

    def test_param_cols_split(self, tmp_path):
        path = write(tmp_path, "pts.csv", "0,0,5\n1,0,6\n0,1,7\n")
        meta = write(tmp_path, "pts.meta", "param_cols=[2, 3]\n")
        X = load_dataset(path, meta=meta)
        assert X.d == 2
        np.testing.assert_array_equal(X.params.ravel(), [5, 6, 7])

    def test_binary_roundtrip(self, tmp_path, rng):
        pts = rng.random((5, 7))
        path = tmp_path / "pts.bin"
        save_binary(path, pts)
        X = load_dataset(path, format="f64le-binary")
        np.testing.assert_array_equal(X.points, pts)

    def test_binary_bad_magic(self, tmp_path):
        path = tmp_path / "pts.bin"
        path.write_bytes(b"JUNK" + b"\x00" * 16)
        with pytest.raises(FormatError):
            load_dataset(path, format="f64le-binary")


class TestSynthDataset:
    def test_swiss_roll_shapes(self):
        X = synth_dataset("swiss_roll", 500, seed=7)
        assert X.points.shape == (500, 3)
        assert X.params.shape == (500, 2)
        assert np.all(np.isfinite(X.points))

    def test_blob_shapes(self):
        X = synth_dataset("translating_blob", 100, seed=1, g=16)
        assert X.points.shape == (100, 256)
        assert X.image_shape == (16, 16)
        assert np.all((X.params >= 0) & (X.params < 16))

    def test_determinism(self):
        a = synth_dataset("translating_blob", 50, seed=3, g=8)
        b = synth_dataset("translating_blob", 50, seed=3, g=8)
        np.testing.assert_array_equal(a.points, b.points)
        np.testing.assert_array_equal(a.params, b.params)

    def test_seed_changes_data(self):
        a = synth_dataset("swiss_roll", 50, seed=3)
        b = synth_dataset("swiss_roll", 50, seed=4)
        assert not np.array_equal(a.points, b.points)

    def test_bad_options(self):
        with pytest.raises(ParameterError):
            synth_dataset("translating_blob", 10, seed=0, g=8, bogus=1)
        with pytest.raises(ParameterError):
            synth_dataset("no_such_kind", 10, seed=0)
        with pytest.raises(ParameterError):
            synth_dataset("swiss_roll", 1, seed=0)


class TestKnnGraph:
    def test_line_k1(self):
        X = DataMatrix(points=np.array([[0.0], [1.0], [3.0]]))
        G = knn_graph(X, 1)
        assert G.neighbors[:, 0].tolist() == [1, 0, 1]

    def test_tie_broken_by_lower_index(self):
        X = DataMatrix(points=np.array([[0.0], [1.0], [2.0]]))
        G = knn_graph(X, 2)
        assert G.neighbors[1].tolist() == [0, 2]

    def test_matches_brute_force(self, rng):
        X = DataMatrix(points=rng.random((50, 5)))
        G = knn_graph(X, 6)
        for i in range(50):
            dists = [
                (np.linalg.norm(X.points[i] - X.points[j]), j)
                for j in range(50)
                if j != i
            ]
            expected = [j for _, j in sorted(dists)[:6]]
            assert G.neighbors[i].tolist() == expected

    def test_distances_sorted_and_consistent(self, rng):
        X = DataMatrix(points=rng.random((30, 4)))
        G = knn_graph(X, 5)
        assert np.all(np.diff(G.distances, axis=1) >= 0)
        for i in range(30):
            for j, dist in zip(G.neighbors[i], G.distances[i]):
                assert dist == pytest.approx(np.linalg.norm(X.points[i] - X.points[j]))

    def test_k_out_of_range(self, rng):
        X = DataMatrix(points=rng.random((10, 2)))
        with pytest.raises(ParameterError):
            knn_graph(X, 10)
        with pytest.raises(ParameterError):
            knn_graph(X, 0)

    def test_duplicates_flagged(self):
        X = DataMatrix(points=np.array([[0.0], [0.0], [5.0]]))
        G = knn_graph(X, 1)
        assert G.has_duplicates

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_permutation_covariance(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.random((20, 3))
        perm = rng.permutation(20)
        G = knn_graph(DataMatrix(points=pts), 4)
        G_perm = knn_graph(DataMatrix(points=pts[perm]), 4)
        inverse = np.argsort(perm)
        for new_i, old_i in enumerate(perm):
            np.testing.assert_array_equal(
                G_perm.neighbors[new_i], inverse[G.neighbors[old_i]]
            )

    def test_boundary_separation(self, rng):
        X = DataMatrix(points=rng.random((25, 3)))
        G = knn_graph(X, 5)
        from manifold_masks.data import pairwise_distances

        D = pairwise_distances(X.points)
        for i in range(25):
            outside = sorted(set(range(25)) - set(G.neighbors[i]) - {i})
            assert G.distances[i].max() <= D[i, outside].min() + 1e-12
