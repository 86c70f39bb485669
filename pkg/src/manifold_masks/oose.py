"""Out-of-sample extension for LLE and Isomap, parameter estimation, and
the leave-one-out evaluation driver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataMatrix, knn_graph, pairwise_distances
from .embeddings import (
    Embedding,
    GeodesicDistances,
    classical_mds,
    geodesics,
    lle_embed,
    lle_weights,
    _solve_weights,
)
from .errors import DisconnectedGraphError, ParameterError
from .masks import Mask, apply_mask
from .metrics import (
    EvalReport,
    affected_set,
    oose_embedding_error,
    oose_error_isomap,
    procrustes_align,
)


@dataclass(frozen=True)
class OoseResult:
    """Embedding of a held-out point plus bookkeeping about the extension.

    ``affected`` lists the indices of training points whose neighborhoods
    would contain the test point, with ``n_train`` standing in for the test
    point itself.
    """

    y: np.ndarray  # (l,)
    weights: np.ndarray | None  # (k,) for LLE-style extensions
    neighbor_indices: np.ndarray  # (k,) training indices used
    affected: np.ndarray


def _test_neighbors(X_train: DataMatrix, x_test: np.ndarray, k: int):
    if k > X_train.n:
        raise ParameterError(f"k={k} exceeds training size {X_train.n}")
    dists = np.linalg.norm(X_train.points - x_test, axis=1)
    order = np.argsort(dists, kind="stable")[:k]
    return order, dists


def _affected_by_test(X_train: DataMatrix, x_test: np.ndarray, k: int) -> np.ndarray:
    """Training points that would adopt the test point as a k-NN, plus the
    test point itself (index n_train)."""
    n = X_train.n
    dist_train = pairwise_distances(X_train.points)
    np.fill_diagonal(dist_train, np.inf)
    kth = np.sort(dist_train, axis=1)[:, min(k, n - 1) - 1]
    to_test = np.linalg.norm(X_train.points - x_test, axis=1)
    # strict <: on exact ties the existing (lower-index) neighbor wins
    affected = np.flatnonzero(to_test < kth)
    return np.append(affected, n)


def lle_oose(
    X_train: DataMatrix,
    Y_train: Embedding,
    x_test: np.ndarray,
    k: int,
    reg: float = 1e-3,
) -> OoseResult:
    """Extend an LLE embedding to a new point.

    Solves the same constrained reconstruction weights against the test
    point's k nearest training points and applies them to the training
    embedding coordinates.
    """
    x_test = np.asarray(x_test, dtype=np.float64)
    nn, _ = _test_neighbors(X_train, x_test, k)
    w = _solve_weights(X_train.points[nn], x_test, reg)
    y = w @ Y_train.Y[nn]
    return OoseResult(
        y=y,
        weights=w,
        neighbor_indices=nn,
        affected=_affected_by_test(X_train, x_test, k),
    )


def isomap_oose(
    X_train: DataMatrix,
    D_geo: GeodesicDistances,
    emb: Embedding,
    x_test: np.ndarray,
    k: int,
) -> OoseResult:
    """Extend a classical-MDS/Isomap embedding to a new point.

    Geodesic distances from the test point are estimated by routing through
    its k nearest training points; the point is then embedded with the
    landmark formula driven by the stored eigenpairs.
    """
    x_test = np.asarray(x_test, dtype=np.float64)
    evals = emb.eigenvalues
    if np.any(evals <= 0):
        raise ParameterError(
            "isomap_oose needs strictly positive eigenvalues for every "
            f"embedding component, got {evals}"
        )
    nn, dists = _test_neighbors(X_train, x_test, k)
    # estimated geodesic: hop to a near training point, then follow the graph
    d_test = np.min(dists[nn][:, None] + D_geo.D[nn, :], axis=0)
    col_means = np.mean(D_geo.D**2, axis=0)
    vectors = emb.Y / np.sqrt(evals)[None, :]  # recover unit eigenvectors
    y = 0.5 / np.sqrt(evals) * ((col_means - d_test**2) @ vectors)
    return OoseResult(
        y=y,
        weights=None,
        neighbor_indices=nn,
        affected=_affected_by_test(X_train, x_test, k),
    )


def estimate_parameters(
    X_train: DataMatrix, x_test: np.ndarray, k: int, reg: float = 1e-3
) -> np.ndarray:
    """Appearance-based parameter (e.g. gaze) estimate for a new point.

    Reconstruction weights of the test point against its k nearest training
    points are applied to the training parameters.
    """
    if X_train.params is None:
        raise ParameterError("training data carries no ground-truth params")
    x_test = np.asarray(x_test, dtype=np.float64)
    nn, _ = _test_neighbors(X_train, x_test, k)
    w = _solve_weights(X_train.points[nn], x_test, reg)
    return w @ X_train.params[nn]


def _drop_point(X: DataMatrix, i: int) -> DataMatrix:
    keep = np.delete(np.arange(X.n), i)
    return DataMatrix(
        points=X.points[keep],
        params=None if X.params is None else X.params[keep],
    )


def _isomap_folds(masked: DataMatrix, k: int, ell: int, exact_folds: bool):
    """Yield (i, Y_train, D_fold, train_data) per left-out point."""
    n = masked.n
    G = knn_graph(masked, k)
    D_full = geodesics(masked, G)
    if not D_full.connected:
        raise DisconnectedGraphError("masked dataset's neighbor graph is disconnected")
    for i in range(n):
        train = _drop_point(masked, i)
        if exact_folds:
            D_fold = geodesics(train, knn_graph(train, k))
            if not D_fold.connected:
                raise DisconnectedGraphError(f"fold {i}: training graph disconnected")
        else:
            keep = np.delete(np.arange(n), i)
            D_fold = GeodesicDistances(
                D=D_full.D[np.ix_(keep, keep)], connected=True
            )
        yield i, classical_mds(D_fold, ell), D_fold, train


def leave_one_out(
    X: DataMatrix,
    mask: Mask,
    method: str,
    k: int,
    ell: int,
    reg: float = 1e-3,
    exact_folds: bool = False,
) -> EvalReport:
    """Score a mask by leave-one-out out-of-sample extension.

    ``isomap``: per fold, embed the masked training set, extend to the
    held-out masked point, align the assembled embedding to the full-data
    Isomap embedding, and report the mean per-point distance.

    ``lle``: per fold, run LLE on the masked training set, extend to the
    held-out point, and report the average reconstruction residual over
    the affected points under full-data weights.

    ``gaze``: per fold, estimate the held-out point's parameters from the
    masked training set and report the mean parameter-space error.
    """
    masked = apply_mask(X, mask)
    n = X.n
    context = {"m": mask.m, "k": k, "l": ell, "method": method}

    if method == "isomap":
        G_full = knn_graph(X, k)
        D_ref = geodesics(X, G_full)
        if not D_ref.connected:
            raise DisconnectedGraphError("full dataset's neighbor graph is disconnected")
        Y_ref = classical_mds(D_ref, ell)
        Y_oose = np.empty((n, ell))
        for i, Y_train, D_fold, train in _isomap_folds(masked, k, ell, exact_folds):
            res = isomap_oose(train, D_fold, Y_train, masked.points[i], k)
            Z = np.empty((n, ell))
            keep = np.delete(np.arange(n), i)
            Z[keep] = Y_train.Y
            Z[i] = res.y
            aligned, _ = procrustes_align(Y_ref, Embedding(Y=Z, eigenvalues=Y_train.eigenvalues))
            Y_oose[i] = aligned.Y[i]
        value = oose_error_isomap(Y_ref, Embedding(Y=Y_oose, eigenvalues=Y_ref.eigenvalues))
        return EvalReport(metric="oose_error", value=value, context=context)

    if method == "lle":
        G_full = knn_graph(X, k)
        W_full = lle_weights(X, G_full, reg)
        folds = []
        for i in range(n):
            train = _drop_point(masked, i)
            G_t = knn_graph(train, k)
            Y_train = lle_embed(lle_weights(train, G_t, reg), ell)
            res = lle_oose(train, Y_train, masked.points[i], k, reg)
            Z = np.empty((n, ell))
            keep = np.delete(np.arange(n), i)
            Z[keep] = Y_train.Y
            Z[i] = res.y
            folds.append(Z)
        value = oose_embedding_error(W_full, folds, G_full)
        return EvalReport(metric="oose_embedding_error", value=value, context=context)

    if method == "gaze":
        if X.params is None:
            raise ParameterError("gaze evaluation needs ground-truth params")
        errors = np.empty(n)
        for i in range(n):
            train = _drop_point(masked, i)
            theta = estimate_parameters(train, masked.points[i], k, reg)
            errors[i] = np.linalg.norm(theta - X.params[i])
        return EvalReport(metric="gaze_error", value=float(np.mean(errors)), context=context)

    raise ParameterError(f"unknown leave-one-out method {method!r}")
