"""Dataset containers, file ingestion, synthetic generators, and k-NN graphs."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    FormatError,
    MetadataError,
    ParameterError,
)

BINARY_MAGIC = b"MAPS"


@dataclass(frozen=True)
class DataMatrix:
    """n points in a d-dimensional ambient space.

    Parameters
    ----------
    points : (n, d) array
        One data point per row (pixel intensities or coordinates).
    image_shape : (height, width) tuple, optional
        Present when rows are rasterized images; height * width must equal d.
    params : (n, p) array, optional
        Ground-truth generating parameters (e.g. gaze coordinates).
    """

    points: np.ndarray
    image_shape: tuple[int, int] | None = None
    params: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 2:
            raise ParameterError(f"points must be 2-D, got shape {pts.shape}")
        n, d = pts.shape
        if n < 2 or d < 1:
            raise ParameterError(f"need n >= 2 and d >= 1, got n={n}, d={d}")
        if not np.all(np.isfinite(pts)):
            raise ParameterError("points contain non-finite values")
        if self.image_shape is not None:
            h, w = self.image_shape
            if h * w != d:
                raise MetadataError(
                    f"image_shape {self.image_shape} implies {h * w} dims, data has {d}"
                )
            object.__setattr__(self, "image_shape", (int(h), int(w)))
        if self.params is not None:
            par = np.asarray(self.params, dtype=np.float64)
            if par.ndim == 1:
                par = par[:, None]
            if par.shape[0] != n:
                raise MetadataError(
                    f"params has {par.shape[0]} rows, points has {n}"
                )
            if not np.all(np.isfinite(par)):
                raise ParameterError("params contain non-finite values")
            object.__setattr__(self, "params", par)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class NeighborGraph:
    """Exact k-nearest-neighbor lists under Euclidean distance.

    ``neighbors[i]`` holds the k nearest indices of point i in order of
    increasing distance (ties broken by lower index); ``distances[i]``
    holds the matching Euclidean distances.
    """

    k: int
    neighbors: np.ndarray  # (n, k) int
    distances: np.ndarray  # (n, k) float
    has_duplicates: bool = field(default=False)

    @property
    def n(self) -> int:
        return self.neighbors.shape[0]


def _parse_sidecar(path) -> dict:
    """Parse a key=value sidecar; values are JSON fragments."""
    meta = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FormatError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            try:
                meta[key.strip()] = json.loads(value.strip())
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: bad value {value!r}") from exc
    return meta


def _load_csv(path) -> np.ndarray:
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise FormatError(
                    f"{path}:{lineno}: ragged row ({len(fields)} fields, expected {width})"
                )
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric field") from exc
    if not rows:
        raise FormatError(f"{path}: empty file")
    return np.asarray(rows, dtype=np.float64)


def _load_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != BINARY_MAGIC:
            raise FormatError(f"{path}: bad magic bytes {magic!r}")
        header = fh.read(16)
        if len(header) != 16:
            raise FormatError(f"{path}: truncated header")
        n, d = struct.unpack("<QQ", header)
        payload = np.fromfile(fh, dtype="<f8", count=n * d)
    if payload.size != n * d:
        raise FormatError(f"{path}: expected {n * d} values, found {payload.size}")
    return payload.reshape(n, d)


def save_binary(path, points: np.ndarray) -> None:
    """Write the raw little-endian binary interchange format."""
    pts = np.ascontiguousarray(points, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<QQ", pts.shape[0], pts.shape[1]))
        pts.tofile(fh)


def load_dataset(path, format: str = "csv", meta=None) -> DataMatrix:
    """Load a dataset from CSV or raw binary, with an optional sidecar.

    The sidecar is a key=value text file; recognized keys are
    ``image_shape=[h,w]`` and ``param_cols=[start,end]`` (half-open column
    range split out of the raw matrix into ``params``).
    """
    if format == "csv":
        raw = _load_csv(path)
    elif format == "f64le-binary":
        raw = _load_binary(path)
    else:
        raise ParameterError(f"unknown format {format!r}")
    if not np.all(np.isfinite(raw)):
        raise ParameterError(f"{path}: non-finite values in data")

    image_shape = None
    params = None
    if meta is not None:
        sidecar = _parse_sidecar(meta)
        if "param_cols" in sidecar:
            start, end = (int(v) for v in sidecar["param_cols"])
            if not (0 <= start < end <= raw.shape[1]):
                raise MetadataError(
                    f"param_cols [{start},{end}) out of range for {raw.shape[1]} columns"
                )
            params = raw[:, start:end]
            keep = [j for j in range(raw.shape[1]) if not (start <= j < end)]
            raw = raw[:, keep]
        if "image_shape" in sidecar:
            h, w = (int(v) for v in sidecar["image_shape"])
            image_shape = (h, w)
    return DataMatrix(points=raw, image_shape=image_shape, params=params)


def blob_image(g: int, center, radius: float) -> np.ndarray:
    """Render a g x g Gaussian blob centered at (row, col) as a flat vector."""
    rows = np.arange(g, dtype=np.float64)
    rr, cc = np.meshgrid(rows, rows, indexing="ij")
    cy, cx = center
    img = np.exp(-((rr - cy) ** 2 + (cc - cx) ** 2) / (2.0 * radius**2))
    return img.ravel()


def synth_dataset(kind: str, n: int, seed: int, **options) -> DataMatrix:
    """Generate a synthetic manifold dataset, deterministic in the seed.

    ``swiss_roll``: 3-D points on the standard 2-parameter swiss roll;
    params columns are (roll angle, height).

    ``translating_blob``: g x g images of a Gaussian blob at uniformly random
    continuous grid positions; params are the (row, col) blob centers.
    Options: ``g`` (image side, default 16), ``radius`` (blob sigma in
    pixels, default 3g/16).
    """
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    if kind == "swiss_roll":
        unknown = set(options) - set()
        if unknown:
            raise ParameterError(f"swiss_roll takes no options, got {sorted(unknown)}")
        # sample uniformly in arc length so the outer windings are as dense
        # as the inner ones (uniform-in-angle sampling leaves the rim sparse
        # enough for k-NN shortcuts across windings)
        t_lo, t_hi = 1.5 * np.pi, 4.5 * np.pi

        def arclen(t):
            return 0.5 * (t * np.sqrt(1.0 + t**2) + np.arcsinh(t))

        t_grid = np.linspace(t_lo, t_hi, 20000)
        s_grid = arclen(t_grid)
        s = s_grid[0] + (s_grid[-1] - s_grid[0]) * rng.random(n)
        t = np.interp(s, s_grid, t_grid)
        # height range kept small relative to the 2*pi winding gap so that
        # desk-scale samples (n around 500, k around 10) never shortcut
        height = 10.0 * rng.random(n)
        points = np.column_stack([t * np.cos(t), height, t * np.sin(t)])
        params = np.column_stack([s, height])
        return DataMatrix(points=points, params=params)
    if kind == "translating_blob":
        unknown = set(options) - {"g", "radius"}
        if unknown:
            raise ParameterError(f"unknown blob options {sorted(unknown)}")
        g = int(options.get("g", 16))
        if g < 2:
            raise ParameterError(f"blob grid side must be >= 2, got {g}")
        radius = float(options.get("radius", 3.0 * g / 16.0))
        if radius <= 0:
            raise ParameterError(f"blob radius must be positive, got {radius}")
        centers = rng.random((n, 2)) * g
        points = np.stack([blob_image(g, c, radius) for c in centers])
        return DataMatrix(points=points, image_shape=(g, g), params=centers)
    raise ParameterError(f"unknown synthetic kind {kind!r}")


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Dense Euclidean distance matrix with an exact zero diagonal."""
    sq = np.sum(points**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * points @ points.T
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(d2)


def knn_graph(X: DataMatrix, k: int) -> NeighborGraph:
    """Exact k nearest neighbors by Euclidean distance.

    Ties in distance are broken by lower point index; self is excluded.
    Duplicate points (zero distance) are allowed but flagged.
    """
    n = X.n
    if not (1 <= k <= n - 1):
        raise ParameterError(f"k must be in [1, {n - 1}], got {k}")
    dist = pairwise_distances(X.points)
    # exclude self by pushing the diagonal past every finite distance
    masked = dist.copy()
    np.fill_diagonal(masked, np.inf)
    # stable sort on distance keeps lower indices first on ties
    order = np.argsort(masked, axis=1, kind="stable")[:, :k]
    neigh_dist = np.take_along_axis(dist, order, axis=1)
    has_dup = bool(np.any(neigh_dist == 0.0))
    return NeighborGraph(
        k=k,
        neighbors=order.astype(np.intp),
        distances=neigh_dist,
        has_duplicates=has_dup,
    )
