import numpy as np
import pytest

from manifold_masks.data import DataMatrix, knn_graph, synth_dataset
from manifold_masks.secants import CliqueSecantArray, SecantMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def line_dataset():
    """Unevenly spaced points on a straight line through 3-D space."""
    coords = np.array([0.0, 0.7, 1.5, 2.1, 3.4, 4.0, 5.2, 6.1, 7.3, 8.0])
    direction = np.array([1.0, 2.0, -1.0]) / np.linalg.norm([1.0, 2.0, -1.0])
    points = coords[:, None] * direction[None, :]
    return DataMatrix(points=points, params=coords[:, None]), coords


@pytest.fixture
def small_blob():
    return synth_dataset("translating_blob", 60, seed=11, g=8)


def random_secant_matrix(rng, n_secants, d):
    """Random rows that mimic squared normalized secants (sum to 1)."""
    raw = rng.random((n_secants, d)) ** 2
    raw /= raw.sum(axis=1, keepdims=True)
    pairs = tuple((0, i + 1) for i in range(n_secants))
    return SecantMatrix(A=raw, pair_index=pairs)


def random_clique_array(rng, c, d, n, k=2):
    return CliqueSecantArray(B=rng.random((c, d, n)), k=k)
