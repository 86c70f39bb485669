"""Structure-preservation metrics for scoring masks."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .data import DataMatrix, NeighborGraph, knn_graph, pairwise_distances
from .embeddings import Embedding, GeodesicDistances, LleWeights
from .errors import DegenerateDataError, ParameterError

RESULTS_HEADER = [
    "dataset",
    "algorithm",
    "m",
    "k",
    "l",
    "metric",
    "value",
    "trials",
    "stddev",
    "seed",
    "method",
]


@dataclass(frozen=True)
class EvalReport:
    """One scored metric with the context needed to tabulate it."""

    metric: str
    value: float
    context: dict = field(default_factory=dict)

    def row(self) -> list:
        ctx = self.context
        fmt = lambda v: "" if v is None else (f"{v:.17g}" if isinstance(v, float) else v)
        return [
            ctx.get("dataset", ""),
            ctx.get("algorithm", ""),
            ctx.get("m", ""),
            ctx.get("k", ""),
            ctx.get("l", ""),
            self.metric,
            f"{self.value:.17g}",
            ctx.get("trials", ""),
            fmt(ctx.get("stddev")),
            ctx.get("seed", ""),
            ctx.get("method", ""),
        ]


def append_results(path, reports) -> None:
    """Append EvalReport rows to a CSV results file, writing the header on
    first use."""
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(RESULTS_HEADER)
        for rep in reports:
            writer.writerow(rep.row())


def _upper_triangle(D: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(D.shape[0], k=1)
    return D[iu]


def residual_variance(D_geo: GeodesicDistances, Y: Embedding) -> float:
    """1 - r^2 between reference geodesic distances and embedded Euclidean
    distances over all point pairs."""
    if D_geo.n != Y.n:
        raise ParameterError(f"size mismatch: {D_geo.n} vs {Y.n}")
    if not D_geo.connected:
        raise ParameterError("reference geodesic distances must be connected")
    ref = _upper_triangle(D_geo.D)
    emb = _upper_triangle(pairwise_distances(Y.Y))
    if np.std(ref) == 0.0 or np.std(emb) == 0.0:
        raise DegenerateDataError("zero-variance distance vector; correlation undefined")
    r = float(np.corrcoef(ref, emb)[0, 1])
    return max(0.0, 1.0 - r * r)


def neighbor_preservation(X_full: DataMatrix, Y: Embedding, k: int) -> float:
    """Mean percentage of each point's k-NN in the full ambient data that
    survive as k-NN of the embedded coordinates."""
    if X_full.n != Y.n:
        raise ParameterError(f"size mismatch: {X_full.n} vs {Y.n}")
    full_graph = knn_graph(X_full, k)
    emb_graph = knn_graph(DataMatrix(points=Y.Y), k)
    overlaps = [
        len(set(full_graph.neighbors[i]) & set(emb_graph.neighbors[i]))
        for i in range(X_full.n)
    ]
    return 100.0 * float(np.mean(overlaps)) / k


def embedding_error(W_full: LleWeights, Y: Embedding) -> float:
    """Sum of squared local reconstruction residuals of an embedding under
    reference (full-data) LLE weights."""
    if W_full.n != Y.n:
        raise ParameterError(f"size mismatch: {W_full.n} vs {Y.n}")
    residual = Y.Y - W_full.W @ Y.Y
    return float(np.sum(residual**2))


def procrustes_align(Y_ref: Embedding, Y: Embedding) -> tuple[Embedding, float]:
    """Optimal similarity transform (translation, rotation/reflection,
    isotropic scaling) of Y onto Y_ref.

    Returns the aligned copy of Y and the Frobenius-norm residual.
    """
    if Y_ref.Y.shape != Y.Y.shape:
        raise ParameterError(f"shape mismatch: {Y_ref.Y.shape} vs {Y.Y.shape}")
    A = Y.Y - Y.Y.mean(axis=0)
    B = Y_ref.Y - Y_ref.Y.mean(axis=0)
    norm_a_sq = float(np.sum(A**2))
    if norm_a_sq == 0.0:
        raise DegenerateDataError("cannot align an all-identical point set")
    U, S, Vt = np.linalg.svd(A.T @ B)
    R = U @ Vt
    scale = float(S.sum()) / norm_a_sq
    aligned = scale * A @ R + Y_ref.Y.mean(axis=0)
    disparity = float(np.linalg.norm(Y_ref.Y - aligned))
    return Embedding(Y=aligned, eigenvalues=Y.eigenvalues), disparity


def oose_error_isomap(Y_full: Embedding, Y_oose: Embedding) -> float:
    """Mean per-point distance between the reference embedding and the
    Procrustes-aligned out-of-sample embedding."""
    aligned, _ = procrustes_align(Y_full, Y_oose)
    return float(np.mean(np.linalg.norm(Y_full.Y - aligned.Y, axis=1)))


def affected_set(G: NeighborGraph, i0: int) -> np.ndarray:
    """Indices of points whose neighborhoods contain i0, plus i0 itself."""
    reverse = np.flatnonzero(np.any(G.neighbors == i0, axis=1))
    return np.unique(np.append(reverse, i0))


def oose_embedding_error(
    W_full: LleWeights,
    leave_one_out_embeddings: list[np.ndarray],
    G: NeighborGraph,
) -> float:
    """Average over held-out points of the local reconstruction residuals
    restricted to the points affected by each extension."""
    n = W_full.n
    if len(leave_one_out_embeddings) != n:
        raise ParameterError(
            f"need {n} fold embeddings, got {len(leave_one_out_embeddings)}"
        )
    W = W_full.W
    total = 0.0
    for i0, Y_fold in enumerate(leave_one_out_embeddings):
        affected = affected_set(G, i0)
        residual = Y_fold[affected] - (W[affected] @ Y_fold)
        total += float(np.sum(residual**2))
    return total / n
