import numpy as np
import pytest

from manifold_masks.data import DataMatrix, knn_graph, pairwise_distances, synth_dataset
from manifold_masks.embeddings import (
    Embedding,
    GeodesicDistances,
    classical_mds,
    geodesics,
    isomap,
    lle_embed,
    lle_weights,
    pca_embed,
)
from manifold_masks.errors import DisconnectedGraphError, ParameterError
from manifold_masks.metrics import residual_variance


class TestGeodesics:
    def test_collinear_path_sum(self):
        X = DataMatrix(points=np.array([[0.0], [1.0], [2.0]]))
        D = geodesics(X, knn_graph(X, 1))
        assert D.connected
        assert D.D[0, 2] == pytest.approx(2.0)

    def test_complete_graph_equals_euclidean(self, rng):
        X = DataMatrix(points=rng.random((12, 3)))
        D = geodesics(X, knn_graph(X, 11))
        np.testing.assert_allclose(D.D, pairwise_distances(X.points), atol=1e-12)

    def test_lower_bounded_by_euclidean(self):
        X = synth_dataset("swiss_roll", 300, seed=5)
        D = geodesics(X, knn_graph(X, 8))
        euclid = pairwise_distances(X.points)
        assert np.all(D.D >= euclid - 1e-9)

    def test_disconnection_reported_not_raised(self):
        X = DataMatrix(points=np.array([[0.0], [0.1], [100.0], [100.1]]))
        D = geodesics(X, knn_graph(X, 1))
        assert not D.connected
        assert np.isinf(D.D[0, 2])

    def test_symmetric_zero_diagonal(self, rng):
        X = DataMatrix(points=rng.random((20, 4)))
        D = geodesics(X, knn_graph(X, 4))
        np.testing.assert_allclose(D.D, D.D.T)
        np.testing.assert_array_equal(np.diag(D.D), 0.0)


class TestClassicalMds:
    def test_right_triangle_distances_reproduced(self):
        pts = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])
        D = GeodesicDistances(D=pairwise_distances(pts), connected=True)
        emb = classical_mds(D, 2)
        np.testing.assert_allclose(
            pairwise_distances(emb.Y), D.D, atol=1e-9
        )

    def test_line_recovered_up_to_sign_translation(self):
        coords = np.array([0.0, 1.0, 2.5, 4.0])
        D = GeodesicDistances(
            D=np.abs(coords[:, None] - coords[None, :]), connected=True
        )
        emb = classical_mds(D, 1)
        recovered = emb.Y[:, 0]
        centered = coords - coords.mean()
        assert np.allclose(recovered, centered, atol=1e-9) or np.allclose(
            recovered, -centered, atol=1e-9
        )

    def test_disconnected_raises(self):
        D = GeodesicDistances(D=np.array([[0.0, np.inf], [np.inf, 0.0]]), connected=False)
        with pytest.raises(DisconnectedGraphError):
            classical_mds(D, 1)

    def test_rank_deficit_warns_with_zero_columns(self):
        coords = np.array([0.0, 1.0, 2.0])
        D = GeodesicDistances(
            D=np.abs(coords[:, None] - coords[None, :]), connected=True
        )
        with pytest.warns(UserWarning):
            emb = classical_mds(D, 2)
        np.testing.assert_allclose(emb.Y[:, 1], 0.0, atol=1e-9)

    def test_deterministic_sign(self, rng):
        pts = rng.random((10, 3))
        D = GeodesicDistances(D=pairwise_distances(pts), connected=True)
        a = classical_mds(D, 3)
        b = classical_mds(D, 3)
        np.testing.assert_array_equal(a.Y, b.Y)
        for c in range(3):
            col = a.Y[:, c]
            assert col[np.argmax(np.abs(col))] >= 0


class TestIsomap:
    def test_complete_graph_matches_mds(self, rng):
        pts = rng.random((15, 3))
        X = DataMatrix(points=pts)
        emb, _ = isomap(X, 14, 2)
        D = GeodesicDistances(D=pairwise_distances(pts), connected=True)
        np.testing.assert_allclose(emb.Y, classical_mds(D, 2).Y, atol=1e-9)

    def test_swiss_roll_parameters_recovered(self):
        X = synth_dataset("swiss_roll", 500, seed=7)
        emb, _ = isomap(X, 10, 2)
        from manifold_masks.metrics import procrustes_align

        ref = Embedding(Y=X.params, eigenvalues=np.ones(2))
        _, disparity = procrustes_align(ref, emb)
        assert disparity / np.linalg.norm(X.params - X.params.mean(0)) < 0.1

    def test_blob_residual_variance(self):
        X = synth_dataset("translating_blob", 100, seed=2, g=12)
        emb, D = isomap(X, 8, 2)
        assert residual_variance(D, emb) < 0.1

    def test_largest_component_flag(self):
        pts = np.concatenate([np.arange(8.0), [100.0, 101.0, 102.0]])[:, None]
        X = DataMatrix(points=pts)
        with pytest.raises(DisconnectedGraphError):
            isomap(X, 2, 1)
        emb, D = isomap(X, 2, 1, use_largest_component=True)
        assert emb.n == 8 and D.connected


class TestLleWeights:
    def test_midpoint_weights(self):
        X = DataMatrix(points=np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))
        # collinear neighbors make the unregularized Gram singular; the
        # symmetric midpoint solution is reg-independent
        W = lle_weights(X, knn_graph(X, 2), reg=1e-3)
        row = W.W[1].toarray().ravel()
        assert row[0] == pytest.approx(0.5, abs=1e-6)
        assert row[2] == pytest.approx(0.5, abs=1e-6)

    def test_barycentric_weights(self):
        t = 0.3
        a, b = np.array([0.0, 0.0]), np.array([2.0, 1.0])
        mid = (1 - t) * a + t * b
        X = DataMatrix(points=np.vstack([a, mid, b]))
        # vanishing reg recovers the exact barycentric coordinates
        W = lle_weights(X, knn_graph(X, 2), reg=1e-9)
        row = W.W[1].toarray().ravel()
        assert row[0] == pytest.approx(1 - t, abs=1e-6)
        assert row[2] == pytest.approx(t, abs=1e-6)

    def test_rows_sum_to_one(self, rng):
        X = DataMatrix(points=rng.random((40, 5)))
        W = lle_weights(X, knn_graph(X, 5))
        np.testing.assert_allclose(np.asarray(W.W.sum(axis=1)).ravel(), 1.0, atol=1e-12)

    def test_beats_uniform_weights(self, rng):
        X = DataMatrix(points=rng.random((40, 5)))
        G = knn_graph(X, 5)
        W = lle_weights(X, G, reg=1e-6)
        solved = float(np.sum((X.points - W.W @ X.points) ** 2))
        uniform = 0.0
        for i in range(40):
            recon = X.points[G.neighbors[i]].mean(axis=0)
            uniform += float(np.sum((X.points[i] - recon) ** 2))
        assert solved <= uniform + 1e-9

    def test_support_restricted_to_neighbors(self, rng):
        X = DataMatrix(points=rng.random((25, 4)))
        G = knn_graph(X, 3)
        W = lle_weights(X, G)
        for i in range(25):
            support = set(W.W[i].indices)
            assert support <= set(int(j) for j in G.neighbors[i])

    def test_negative_reg_rejected(self, rng):
        X = DataMatrix(points=rng.random((10, 3)))
        with pytest.raises(ParameterError):
            lle_weights(X, knn_graph(X, 2), reg=-1.0)


class TestLleEmbed:
    def test_constraints(self, rng):
        X = DataMatrix(points=rng.random((50, 6)))
        W = lle_weights(X, knn_graph(X, 6))
        Y = lle_embed(W, 2)
        np.testing.assert_allclose(Y.Y.mean(axis=0), 0.0, atol=1e-8)
        np.testing.assert_allclose(Y.Y.T @ Y.Y / 50, np.eye(2), atol=1e-6)

    def test_error_matches_eigenvalue_sum(self, rng):
        from manifold_masks.metrics import embedding_error

        X = DataMatrix(points=rng.random((40, 5)))
        W = lle_weights(X, knn_graph(X, 5))
        Y = lle_embed(W, 3)
        err = embedding_error(W, Y)
        assert err == pytest.approx(40 * Y.eigenvalues.sum(), rel=1e-6, abs=1e-9)

    def test_line_monotone(self, line_dataset):
        X, coords = line_dataset
        W = lle_weights(X, knn_graph(X, 2))
        Y = lle_embed(W, 1)
        order = np.argsort(coords)
        diffs = np.diff(Y.Y[order, 0])
        assert np.all(diffs > 0) or np.all(diffs < 0)

    def test_ell_bounds(self, rng):
        X = DataMatrix(points=rng.random((10, 3)))
        W = lle_weights(X, knn_graph(X, 3))
        with pytest.raises(ParameterError):
            lle_embed(W, 9)


class TestPcaEmbed:
    def test_rank_one_data(self, rng):
        direction = np.array([1.0, 2.0, 3.0])
        coords = rng.random(20)
        X = DataMatrix(points=coords[:, None] * direction[None, :])
        emb = pca_embed(X, 1)
        total_var = np.var(X.points - X.points.mean(0), axis=0).sum()
        assert np.var(emb.Y[:, 0]) == pytest.approx(total_var, rel=1e-9)

    def test_full_rotation_preserves_distances(self, rng):
        X = DataMatrix(points=rng.random((15, 4)))
        emb = pca_embed(X, 4)
        np.testing.assert_allclose(
            pairwise_distances(emb.Y), pairwise_distances(X.points), atol=1e-9
        )

    def test_variance_ordering(self, rng):
        X = DataMatrix(points=rng.random((30, 6)))
        emb = pca_embed(X, 5)
        variances = np.var(emb.Y, axis=0)
        assert np.all(np.diff(variances) <= 1e-12)

    def test_m_out_of_range(self, rng):
        X = DataMatrix(points=rng.random((10, 3)))
        with pytest.raises(ParameterError):
            pca_embed(X, 4)
