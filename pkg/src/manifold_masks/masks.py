"""Mask selection: greedy selectors, baselines, and exhaustive oracles."""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .data import DataMatrix
from .errors import CapacityError, DegenerateDataError, ParameterError
from .secants import CliqueSecantArray, SecantMatrix

ORACLE_SUBSET_LIMIT = 10**6


@dataclass(frozen=True)
class Mask:
    """An ordered selection of dimension indices out of [0, d).

    ``selected`` preserves selection order (greedy selectors emit nested
    masks: the first i entries form the size-i mask).
    """

    selected: tuple[int, ...]
    d: int

    def __post_init__(self):
        sel = tuple(int(j) for j in self.selected)
        object.__setattr__(self, "selected", sel)
        if len(set(sel)) != len(sel):
            raise ParameterError(f"duplicate indices in mask: {sel}")
        if sel and not all(0 <= j < self.d for j in sel):
            raise ParameterError(f"mask indices out of [0, {self.d}): {sel}")
        if len(sel) > self.d:
            raise ParameterError(f"mask of size {len(sel)} exceeds d={self.d}")

    @property
    def m(self) -> int:
        return len(self.selected)

    def indicator(self) -> np.ndarray:
        """0/1 membership vector of length d."""
        z = np.zeros(self.d)
        z[list(self.selected)] = 1.0
        return z

    def prefix(self, m: int) -> "Mask":
        """The nested sub-mask made of the first m selections."""
        if not (0 <= m <= self.m):
            raise ParameterError(f"prefix size {m} out of [0, {self.m}]")
        return Mask(selected=self.selected[:m], d=self.d)


def _check_m(m: int, d: int) -> None:
    if not (1 <= m <= d):
        raise ParameterError(f"mask size m must be in [1, {d}], got {m}")


def _lp_norm(residual: np.ndarray, p: str, axis=None) -> np.ndarray:
    if p == "L1":
        return np.abs(residual).sum(axis=axis)
    if p == "Linf":
        return np.abs(residual).max(axis=axis)
    raise ParameterError(f"p must be 'L1' or 'Linf', got {p!r}")


def global_objective(A: SecantMatrix, mask: Mask, p: str = "L1") -> float:
    """Distortion of masked squared secant norms from their m/d expectation."""
    target = mask.m / mask.d
    masked_norms = A.A[:, list(mask.selected)].sum(axis=1) if mask.m else np.zeros(A.A.shape[0])
    return float(_lp_norm(masked_norms - target, p))


def local_objective(B: CliqueSecantArray, mask: Mask) -> float:
    """Sum over points of cosine similarity between masked and full
    clique secant-norm vectors."""
    alpha = B.B.sum(axis=1)  # (c, n) full squared norms
    alpha_norm = np.linalg.norm(alpha, axis=0)
    if np.any(alpha_norm == 0.0):
        bad = int(np.argmin(alpha_norm))
        raise DegenerateDataError(f"all-zero clique secant norms at point {bad}")
    beta = B.B[:, list(mask.selected), :].sum(axis=1)
    beta_norm = np.linalg.norm(beta, axis=0)
    num = np.sum(beta * alpha, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.where(beta_norm > 0.0, num / (beta_norm * alpha_norm), 0.0)
    return float(sims.sum())


def maps_global(A: SecantMatrix, m: int, p: str = "L1") -> Mask:
    """Greedy selection matching masked secant norms to their expectation.

    At step i the remaining dimension whose addition brings the running
    column sum closest (in the chosen norm) to (i/d) * 1 is selected; ties
    go to the lowest index. The result is nested: its first i entries are
    the size-i mask.
    """
    d = A.d
    _check_m(m, d)
    _lp_norm(np.zeros(1), p)  # validate p up front
    running = np.zeros(A.A.shape[0])
    selected: list[int] = []
    remaining = np.ones(d, dtype=bool)
    for i in range(1, m + 1):
        target = i / d
        cand = np.flatnonzero(remaining)
        # residuals for every candidate column at once: (|S_k|, #cand)
        residual = A.A[:, cand] + (running - target)[:, None]
        costs = _lp_norm(residual, p, axis=0)
        choice = int(cand[np.argmin(costs)])  # argmin keeps lowest index on ties
        selected.append(choice)
        remaining[choice] = False
        running = running + A.A[:, choice]
    return Mask(selected=tuple(selected), d=d)


def maps_local(B: CliqueSecantArray, m: int) -> Mask:
    """Greedy selection maximizing summed cosine similarity between masked
    and full clique secant-norm vectors.

    Per-point similarity compares the vector of masked squared secant norms
    against the full ones, so a per-point scale factor costs nothing. Ties
    go to the lowest index; masks are nested.
    """
    c, d, n = B.B.shape
    _check_m(m, d)
    alpha = B.B.sum(axis=1)  # (c, n)
    alpha_norm = np.linalg.norm(alpha, axis=0)
    if np.any(alpha_norm == 0.0):
        bad = int(np.argmin(alpha_norm))
        raise DegenerateDataError(f"all-zero clique secant norms at point {bad}")

    # per-candidate constants: <B_j, alpha> and ||B_j||^2, both (d, n)
    cross_alpha = np.einsum("cjn,cn->jn", B.B, alpha)
    b_sq = np.einsum("cjn,cjn->jn", B.B, B.B)

    theta = np.zeros((c, n))
    selected: list[int] = []
    remaining = np.ones(d, dtype=bool)
    for _ in range(m):
        theta_alpha = np.sum(theta * alpha, axis=0)  # (n,)
        theta_sq = np.sum(theta**2, axis=0)  # (n,)
        cross_theta = np.einsum("cjn,cn->jn", B.B, theta)  # (d, n)
        num = theta_alpha[None, :] + cross_alpha
        beta_norm = np.sqrt(np.maximum(theta_sq[None, :] + 2.0 * cross_theta + b_sq, 0.0))
        with np.errstate(invalid="ignore", divide="ignore"):
            sims = np.where(beta_norm > 0.0, num / (beta_norm * alpha_norm[None, :]), 0.0)
        scores = sims.sum(axis=1)
        scores[~remaining] = -np.inf
        choice = int(np.argmax(scores))  # first max = lowest index on ties
        selected.append(choice)
        remaining[choice] = False
        theta = theta + B.B[:, choice, :]
    return Mask(selected=tuple(selected), d=d)


def pcoa(X: DataMatrix, m: int) -> Mask:
    """Baseline: the m dimensions of highest variance, in descending order."""
    _check_m(m, X.d)
    var = np.sum((X.points - X.points.mean(axis=0)) ** 2, axis=0)
    order = np.argsort(-var, kind="stable")  # stable: lowest index first on ties
    return Mask(selected=tuple(int(j) for j in order[:m]), d=X.d)


def random_mask(d: int, m: int, seed: int) -> Mask:
    """Uniform random m-subset via a seeded partial Fisher-Yates shuffle."""
    _check_m(m, d)
    rng = np.random.default_rng(seed)
    pool = np.arange(d)
    for i in range(m):
        j = int(rng.integers(i, d))
        pool[i], pool[j] = pool[j], pool[i]
    return Mask(selected=tuple(int(v) for v in pool[:m]), d=d)


def _guard_subsets(d: int, m: int) -> None:
    count = comb(d, m)
    if count > ORACLE_SUBSET_LIMIT:
        raise CapacityError(
            f"C({d},{m}) = {count} subsets exceeds the {ORACLE_SUBSET_LIMIT} oracle limit"
        )


def exact_mask_global(A: SecantMatrix, m: int, p: str = "L1") -> tuple[Mask, float]:
    """Exhaustive minimizer of the global-distortion objective.

    Returns the lexicographically smallest optimal subset and its objective.
    """
    d = A.d
    _check_m(m, d)
    _guard_subsets(d, m)
    target = m / d
    best_cost = np.inf
    best: tuple[int, ...] | None = None
    for subset in combinations(range(d), m):
        cost = float(_lp_norm(A.A[:, subset].sum(axis=1) - target, p))
        if cost < best_cost:  # strict: first (lexicographic) winner kept
            best_cost, best = cost, subset
    return Mask(selected=best, d=d), best_cost


def exact_mask_local(B: CliqueSecantArray, m: int) -> tuple[Mask, float]:
    """Exhaustive maximizer of the summed cosine-similarity objective."""
    d = B.d
    _check_m(m, d)
    _guard_subsets(d, m)
    alpha = B.B.sum(axis=1)
    alpha_norm = np.linalg.norm(alpha, axis=0)
    if np.any(alpha_norm == 0.0):
        bad = int(np.argmin(alpha_norm))
        raise DegenerateDataError(f"all-zero clique secant norms at point {bad}")
    best_score = -np.inf
    best: tuple[int, ...] | None = None
    for subset in combinations(range(d), m):
        beta = B.B[:, subset, :].sum(axis=1)
        beta_norm = np.linalg.norm(beta, axis=0)
        num = np.sum(beta * alpha, axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            sims = np.where(beta_norm > 0.0, num / (beta_norm * alpha_norm), 0.0)
        score = float(sims.sum())
        if score > best_score:
            best_score, best = score, subset
    return Mask(selected=best, d=d), best_score


def apply_mask(X: DataMatrix, mask: Mask) -> DataMatrix:
    """Restrict the data to the masked dimensions (ascending column order).

    params carry through unchanged; image_shape is dropped since the masked
    vector is no longer a full raster.
    """
    if mask.d != X.d:
        raise ParameterError(f"mask is for d={mask.d}, data has d={X.d}")
    cols = sorted(mask.selected)
    return DataMatrix(points=X.points[:, cols], params=X.params)


def save_mask(path, mask: Mask) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"d": mask.d, "selected": list(mask.selected)}, fh)
        fh.write("\n")


def load_mask(path) -> Mask:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return Mask(selected=tuple(payload["selected"]), d=int(payload["d"]))


def mask_to_pgm(path, mask: Mask, image_shape: tuple[int, int]) -> None:
    """Render selected pixels white (255) on black as an ASCII PGM raster."""
    h, w = image_shape
    if h * w != mask.d:
        raise ParameterError(f"image_shape {image_shape} does not match d={mask.d}")
    raster = np.zeros(mask.d, dtype=int)
    raster[list(mask.selected)] = 255
    lines = ["P2", f"{w} {h}", "255"]
    lines += [" ".join(str(v) for v in row) for row in raster.reshape(h, w)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
