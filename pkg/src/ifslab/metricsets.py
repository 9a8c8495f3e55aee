"""Finite point clouds in R^m standing in for bounded closed sets.

Every distance here goes through :func:`pair_distances` so the brute-force
and tree-accelerated Hausdorff paths agree bit for bit.
"""
from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

_CHUNK = 1 << 22  # pair-matrix entries per brute-force block
_TREE_ABOVE = 250_000  # pair count above which "auto" uses the k-d tree


class DimensionError(ValueError):
    pass


class PointCloud:
    """Immutable non-empty finite point set.

    ``dedup`` is an optional grid cell size; when given, points landing in an
    already occupied cell are dropped (first inserted wins).
    """

    __slots__ = ("_points",)

    def __init__(self, points, dedup: float | None = None):
        pts = np.array(points, dtype=float, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if pts.size else pts.reshape(0, 1)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("a point cloud needs at least one point, given as an (n, m) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        if dedup:
            pts = pts[_first_in_cell(pts, dedup)]
        pts.setflags(write=False)
        self._points = pts

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def dimension(self) -> int:
        return self._points.shape[1]

    def __len__(self):
        return self._points.shape[0]

    def __iter__(self):
        return iter(self._points)

    def __repr__(self):
        return f"PointCloud(n={len(self)}, m={self.dimension})"

    def union(self, *others: "PointCloud", dedup: float | None = None) -> "PointCloud":
        for o in others:
            _check_dims(self, o)
        return PointCloud(np.vstack([self._points] + [o.points for o in others]), dedup=dedup)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self._points.min(axis=0), self._points.max(axis=0)


def _first_in_cell(pts: np.ndarray, cell: float) -> np.ndarray:
    """Indices of the first point in each occupied grid cell, in input order."""
    keys = np.floor(pts / cell).astype(np.int64)
    keys -= keys.min(axis=0)
    extent = keys.max(axis=0).astype(float) + 1
    if np.prod(extent) < 2.0**62:
        # pack the cell index into one integer; a 1-D sort is far cheaper than a row sort
        flat = np.zeros(len(keys), dtype=np.int64)
        for j in range(keys.shape[1]):
            flat = flat * np.int64(extent[j]) + keys[:, j]
        _, first = np.unique(flat, return_index=True)
    else:
        _, first = np.unique(keys, axis=0, return_index=True)
    return np.sort(first)


def _check_dims(a, b):
    da = a.dimension if isinstance(a, PointCloud) else np.shape(a)[-1]
    db = b.dimension if isinstance(b, PointCloud) else np.shape(b)[-1]
    if da != db:
        raise DimensionError(f"dimension mismatch: {da} vs {db}")


def as_cloud(x) -> PointCloud:
    return x if isinstance(x, PointCloud) else PointCloud(x)


def pair_distances(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix, shape (len(X), len(Y))."""
    diff = X[:, None, :] - Y[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def _nearest_brute(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    rows = max(1, _CHUNK // max(1, len(Y)))
    out = np.empty(len(X))
    for s in range(0, len(X), rows):
        out[s:s + rows] = pair_distances(X[s:s + rows], Y).min(axis=1)
    return out


def diameter(A) -> float:
    pts = as_cloud(A).points
    if len(pts) < 2:
        return 0.0
    if pts.shape[1] == 1:
        return float(pts.max() - pts.min())
    if len(pts) > 64 and pts.shape[1] <= 3:
        pts = _hull_vertices(pts)
    rows = max(1, _CHUNK // len(pts))
    best = 0.0
    for s in range(0, len(pts), rows):
        best = max(best, float(pair_distances(pts[s:s + rows], pts).max()))
    return best


def _hull_vertices(pts: np.ndarray) -> np.ndarray:
    from scipy.spatial import ConvexHull, QhullError

    try:
        return pts[ConvexHull(pts).vertices]
    except (QhullError, ValueError):
        return pts


def point_set_distance(x, A) -> float:
    A = as_cloud(A)
    x = np.asarray(x, dtype=float).reshape(1, -1)
    _check_dims(x, A)
    return float(np.sqrt(_sq_min(x, A.points)[0]))


def _sq_min(X, Y):
    diff = X[:, None, :] - Y[None, :, :]
    return (diff * diff).sum(axis=-1).min(axis=1)


def directed_hausdorff(A, B, method: str = "auto") -> float:
    """max over x in A of d(x, B)."""
    A, B = as_cloud(A), as_cloud(B)
    _check_dims(A, B)
    if method == "auto":
        method = "tree" if len(A) * len(B) > _TREE_ABOVE else "brute"
    if method == "brute":
        return float(_nearest_brute(A.points, B.points).max())
    if method != "tree":
        raise ValueError(f"unknown method {method!r}")
    tree = cKDTree(B.points)
    d, _ = tree.query(A.points, k=1)
    # The tree's own arithmetic may differ from the shared kernel by an ulp;
    # settle every near-maximal candidate against all its near neighbours.
    top = d.max()
    cand = A.points[d >= top * (1 - 1e-9)]
    nbrs = tree.query_ball_point(cand, r=top * (1 + 1e-9) + 1e-300)
    counts = np.array([len(n) for n in nbrs])
    rows = np.repeat(np.arange(len(cand)), counts)
    diff = B.points[np.concatenate(nbrs).astype(np.intp)] - cand[rows]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    return float(np.minimum.reduceat(dist, starts).max())


def hausdorff(A, B, method: str = "auto") -> float:
    A, B = as_cloud(A), as_cloud(B)
    _check_dims(A, B)
    return max(directed_hausdorff(A, B, method), directed_hausdorff(B, A, method))


def within_dilation(A, B, eps: float) -> bool:
    """True iff every point of A lies strictly within ``eps`` of B."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return directed_hausdorff(A, B) < eps


# -- CSV ---------------------------------------------------------------------

def read_cloud(path) -> PointCloud:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append([float(tok) for tok in line.split(",")])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no points")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: rows have differing column counts")
    return PointCloud(rows)


def format_cloud(cloud: PointCloud, comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        for line in comment.splitlines():
            buf.write(f"# {line}\n")
    for p in cloud.points:
        buf.write(",".join(repr(float(v)) for v in p))
        buf.write("\n")
    return buf.getvalue()


def write_cloud(cloud: PointCloud, path, comment: str | None = None) -> None:
    Path(path).write_text(format_cloud(cloud, comment), encoding="utf-8")
