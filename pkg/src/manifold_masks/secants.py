"""Squared-secant structures feeding the mask selectors."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .data import DataMatrix, NeighborGraph
from .errors import DegenerateDataError, ParameterError


@dataclass(frozen=True)
class SecantMatrix:
    """Squared entries of normalized neighbor secants, one row per pair.

    Row r is the entrywise square of (x_i - x_j) / ||x_i - x_j|| for the
    unordered pair ``pair_index[r] = (i, j)`` with i < j; every row is
    nonnegative and sums to 1.
    """

    A: np.ndarray  # (|S_k|, d)
    pair_index: tuple[tuple[int, int], ...]

    @property
    def d(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class CliqueSecantArray:
    """Unnormalized squared clique secants, one (c, d) slice per point.

    ``B[l, :, i]`` holds the squared entries of the l-th pairwise difference
    within point i's neighborhood clique (the point plus its k neighbors),
    pairs enumerated lexicographically over the sorted clique indices.
    """

    B: np.ndarray  # (c, d, n)
    k: int

    @property
    def n(self) -> int:
        return self.B.shape[2]

    @property
    def d(self) -> int:
        return self.B.shape[1]

    @property
    def c(self) -> int:
        return self.B.shape[0]


def neighbor_pairs(G: NeighborGraph) -> list[tuple[int, int]]:
    """Distinct unordered neighbor pairs, lexicographically sorted."""
    pairs = set()
    for i in range(G.n):
        for j in G.neighbors[i]:
            pairs.add((min(i, int(j)), max(i, int(j))))
    return sorted(pairs)


def build_secants(X: DataMatrix, G: NeighborGraph) -> SecantMatrix:
    """Squared normalized secants over all distinct neighbor pairs.

    Directed duplicates (i in N(j) and j in N(i)) are merged: s and -s have
    identical squared entries.
    """
    pairs = neighbor_pairs(G)
    diffs = X.points[[p[0] for p in pairs]] - X.points[[p[1] for p in pairs]]
    norms = np.linalg.norm(diffs, axis=1)
    bad = np.where(norms == 0.0)[0]
    if bad.size:
        i, j = pairs[bad[0]]
        raise DegenerateDataError(
            f"zero-norm secant for neighbor pair ({i}, {j}): duplicate points"
        )
    A = (diffs / norms[:, None]) ** 2
    return SecantMatrix(A=A, pair_index=tuple(pairs))


def build_clique_array(X: DataMatrix, G: NeighborGraph) -> CliqueSecantArray:
    """Squared clique secants for every point.

    Point i's clique is itself plus its k neighbors; all C(k+1, 2) pairwise
    differences are squared entrywise, without normalization.
    """
    n, d, k = X.n, X.d, G.k
    if n < k + 1:
        raise ParameterError(f"need n >= k+1 = {k + 1}, got n={n}")
    c = (k + 1) * k // 2
    B = np.empty((c, d, n), dtype=np.float64)
    for i in range(n):
        clique = np.sort(np.append(G.neighbors[i], i))
        for ell, (a, b) in enumerate(combinations(clique, 2)):
            diff = X.points[a] - X.points[b]
            if not np.any(diff):
                raise DegenerateDataError(
                    f"zero-norm clique secant ({a}, {b}) in clique of point {i}"
                )
            B[ell, :, i] = diff**2
    return CliqueSecantArray(B=B, k=k)
