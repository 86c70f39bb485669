"""Manifold learning and linear embeddings: Isomap, LLE, PCA."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, csgraph_from_dense, shortest_path

from .data import DataMatrix, NeighborGraph, knn_graph
from .errors import DisconnectedGraphError, NumericalError, ParameterError


@dataclass(frozen=True)
class GeodesicDistances:
    """All-pairs shortest-path distances over the symmetrized k-NN graph."""

    D: np.ndarray  # (n, n)
    connected: bool

    @property
    def n(self) -> int:
        return self.D.shape[0]


@dataclass(frozen=True)
class Embedding:
    """Low-dimensional coordinates plus the spectral values that produced them."""

    Y: np.ndarray  # (n, l)
    eigenvalues: np.ndarray  # (l,)

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    @property
    def dim(self) -> int:
        return self.Y.shape[1]


@dataclass(frozen=True)
class LleWeights:
    """Row-stochastic local reconstruction weights, supported on each
    point's neighbor list."""

    W: sp.csr_matrix  # (n, n), row i supported on neighbors of i
    k: int

    @property
    def n(self) -> int:
        return self.W.shape[0]


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make each column's largest-magnitude entry positive (removes the
    eigenvector sign ambiguity)."""
    out = vectors.copy()
    for c in range(out.shape[1]):
        idx = int(np.argmax(np.abs(out[:, c])))
        if out[idx, c] < 0:
            out[:, c] = -out[:, c]
    return out


def geodesics(X: DataMatrix, G: NeighborGraph) -> GeodesicDistances:
    """Shortest-path distances over the OR-symmetrized k-NN graph.

    An edge exists when either endpoint lists the other as a neighbor; edge
    weight is the Euclidean distance. Disconnection is reported via the
    ``connected`` flag, not raised.
    """
    n = X.n
    dense = np.full((n, n), np.inf)
    for i in range(n):
        for j, dist in zip(G.neighbors[i], G.distances[i]):
            j = int(j)
            dense[i, j] = dist
            dense[j, i] = dist
    np.fill_diagonal(dense, 0.0)
    graph = csgraph_from_dense(dense, null_value=np.inf)
    D = shortest_path(graph, method="D", directed=False)
    return GeodesicDistances(D=D, connected=bool(np.all(np.isfinite(D))))


def largest_component(X: DataMatrix, G: NeighborGraph) -> np.ndarray:
    """Indices of the largest connected component of the symmetrized graph."""
    n = X.n
    rows, cols = [], []
    for i in range(n):
        for j in G.neighbors[i]:
            rows.append(i)
            cols.append(int(j))
    adj = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    counts = np.bincount(labels)
    return np.flatnonzero(labels == int(np.argmax(counts)))


def classical_mds(D: GeodesicDistances, ell: int) -> Embedding:
    """Classical (Torgerson) MDS on a distance matrix.

    Double-centers the squared distances, takes the top eigenpairs
    (eigenvalues clamped at zero), and scales eigenvectors by the square
    roots of their eigenvalues.
    """
    n = D.n
    if not D.connected:
        raise DisconnectedGraphError(
            "distance matrix has infinite entries; restrict to the largest "
            "connected component first"
        )
    if not (1 <= ell < n):
        raise ParameterError(f"embedding dimension must be in [1, {n - 1}], got {ell}")
    Dsq = D.D**2
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    tau = -0.5 * J @ Dsq @ J
    tau = 0.5 * (tau + tau.T)  # symmetrize against roundoff
    evals, evecs = np.linalg.eigh(tau)
    order = np.argsort(-evals, kind="stable")[:ell]
    evals = evals[order]
    evecs = _fix_signs(evecs[:, order])
    tol = 1e-12 * max(float(np.abs(evals).max(initial=0.0)), 1.0)
    n_pos = int(np.sum(evals > tol))
    if n_pos < ell:
        warnings.warn(
            f"only {n_pos} positive eigenvalues for {ell} requested dimensions; "
            "trailing columns are zero",
            stacklevel=2,
        )
    evals = np.where(evals > tol, evals, 0.0)
    Y = evecs * np.sqrt(evals)[None, :]
    return Embedding(Y=Y, eigenvalues=evals)


def isomap(
    X: DataMatrix, k: int, ell: int, use_largest_component: bool = False
) -> tuple[Embedding, GeodesicDistances]:
    """k-NN graph -> geodesic distances -> classical MDS.

    With ``use_largest_component`` the pipeline restricts a disconnected
    dataset to its largest graph component (the embedding then covers only
    those points); otherwise disconnection raises.
    """
    G = knn_graph(X, k)
    D = geodesics(X, G)
    if not D.connected and use_largest_component:
        keep = largest_component(X, G)
        sub = DataMatrix(
            points=X.points[keep],
            params=None if X.params is None else X.params[keep],
        )
        G = knn_graph(sub, min(k, sub.n - 1))
        D = geodesics(sub, G)
    return classical_mds(D, ell), D


def _solve_weights(neighborhood: np.ndarray, point: np.ndarray, reg: float) -> np.ndarray:
    """Constrained least-squares weights reconstructing ``point`` from the
    rows of ``neighborhood``; weights sum to 1."""
    diffs = neighborhood - point
    C = diffs @ diffs.T
    k = C.shape[0]
    trace = np.trace(C)
    ridge = reg * (trace / k) if trace > 0 else reg
    C = C + ridge * np.eye(k)
    try:
        w = np.linalg.solve(C, np.ones(k))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular local Gram system: {exc}") from exc
    total = w.sum()
    if total == 0:
        raise NumericalError("local weights sum to zero; cannot normalize")
    return w / total


def lle_weights(X: DataMatrix, G: NeighborGraph, reg: float = 1e-3) -> LleWeights:
    """Local linear reconstruction weights for every point.

    Each row solves the regularized local Gram system over the point's k
    neighbors and is normalized to sum to 1.
    """
    if reg < 0:
        raise ParameterError(f"reg must be >= 0, got {reg}")
    n, k = X.n, G.k
    rows = np.repeat(np.arange(n), k)
    cols = G.neighbors.ravel()
    vals = np.empty(n * k)
    for i in range(n):
        w = _solve_weights(X.points[G.neighbors[i]], X.points[i], reg)
        vals[i * k : (i + 1) * k] = w
    W = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return LleWeights(W=W, k=k)


def lle_embed(W: LleWeights, ell: int) -> Embedding:
    """Spectral embedding minimizing the local reconstruction error.

    Takes the eigenvectors of (I-W)'(I-W) at the smallest nonzero
    eigenvalues, discarding the constant bottom eigenvector, and scales by
    sqrt(n) so the embedding has identity covariance.
    """
    n = W.n
    if not (1 <= ell <= n - 2):
        raise ParameterError(f"embedding dimension must be in [1, {n - 2}], got {ell}")
    IW = np.eye(n) - W.W.toarray()
    M = IW.T @ IW
    M = 0.5 * (M + M.T)
    # Row-stochastic W makes the constant vector an exact null mode of M.
    # Shift it to the top of the spectrum so it cannot mix with the tiny
    # nonzero eigenvalues we keep; on its orthogonal complement the
    # spectrum is unchanged.
    shift = max(float(np.linalg.norm(M, ord=2)), 1.0)
    M = M + (shift / n) * np.ones((n, n))
    try:
        evals, evecs = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    max_ev = float(evals[-1])
    keep = []
    for idx in range(n):
        v = evecs[:, idx]
        near_zero = evals[idx] < 1e-10 * max(max_ev, 1.0)
        constant = np.all(np.abs(v - v.mean()) < 1e-6)
        if near_zero and constant:
            continue  # the trivial translation mode
        keep.append(idx)
        if len(keep) == ell:
            break
    if len(keep) < ell:
        raise NumericalError(f"only {len(keep)} usable eigenvectors for ell={ell}")
    sel_vals = evals[keep]
    Y = _fix_signs(evecs[:, keep]) * np.sqrt(n)
    return Embedding(Y=Y, eigenvalues=sel_vals)


def pca_embed(X: DataMatrix, m: int) -> Embedding:
    """Projection onto the top principal components of the data covariance."""
    n, d = X.n, X.d
    if not (1 <= m <= min(n - 1, d)):
        raise ParameterError(f"m must be in [1, {min(n - 1, d)}], got {m}")
    centered = X.points - X.points.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(-evals, kind="stable")[:m]
    components = _fix_signs(evecs[:, order])
    return Embedding(Y=centered @ components, eigenvalues=np.maximum(evals[order], 0.0))


def save_embedding(csv_path, sidecar_path, emb: Embedding, **meta) -> None:
    """Write coordinates as CSV plus a JSON sidecar with eigenvalues and
    the algorithm parameters passed as keyword arguments."""
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in emb.Y:
            writer.writerow([f"{v:.17g}" for v in row])
    payload = {"eigenvalues": [float(v) for v in emb.eigenvalues], **meta}
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
