"""Query selection and neighbourhood grouping: farthest point sampling, radius search, kNN.

Distances are compared as squared Euclidean norms of coordinate differences,
which keeps selections stable under rigid motions. Ties always resolve to the
smallest point index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PointCloud


class BadCount(ValueError):
    pass


class BadRadius(ValueError):
    pass


@dataclass(frozen=True)
class NeighborSet:
    query_index: int
    indices: tuple[int, ...]
    radius: float
    padded: bool = False

    def __len__(self) -> int:
        return len(self.indices)


def _points(cloud) -> np.ndarray:
    return cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)


def _sq_dist(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Squared distances, ``centers`` (..., Q, 3) against ``points`` (..., n, 3) -> (..., Q, n)."""
    diff = points[..., None, :, :] - centers[..., :, None, :]
    return diff[..., 0] ** 2 + diff[..., 1] ** 2 + diff[..., 2] ** 2


def fps_batch(points: np.ndarray, k: int, start_index: int = 0) -> np.ndarray:
    """Farthest point sampling over a batch of clouds of shape (B, n, 3); returns (B, k) indices."""
    points = np.asarray(points, dtype=np.float64)
    b, n, _ = points.shape
    if not 1 <= k <= n:
        raise BadCount(f"k={k} must lie in [1, {n}]")
    if not 0 <= start_index < n:
        raise IndexError(f"start_index {start_index} out of range for {n} points")
    rows = np.arange(b)
    out = np.empty((b, k), dtype=np.int64)
    out[:, 0] = start_index
    min_d2 = _sq_dist(points, points[:, start_index][:, None, :])[:, 0, :]
    min_d2[:, start_index] = -1.0
    for i in range(1, k):
        nxt = np.argmax(min_d2, axis=1)
        out[:, i] = nxt
        d2 = _sq_dist(points, points[rows, nxt][:, None, :])[:, 0, :]
        min_d2 = np.minimum(min_d2, d2)
        min_d2[rows, nxt] = -1.0
    return out


def farthest_point_sample(cloud: PointCloud, k: int, start_index: int = 0) -> tuple[int, ...]:
    """Greedy farthest point sampling starting from ``start_index``.

    Each pick maximises the minimum distance to the points already chosen.

    Raises
    ------
    BadCount
        If ``k`` is not in ``[1, len(cloud)]``.
    """
    return tuple(int(i) for i in fps_batch(_points(cloud)[None], k, start_index)[0])


def group_radius(points: np.ndarray, queries: np.ndarray, r: float, max_n: int):
    """Fixed-width radius grouping for many queries at once.

    Parameters
    ----------
    points : (..., n, 3) array
    queries : (..., Q) integer array of query indices
    r : float
        Ball radius (inclusive).
    max_n : int
        Group width.

    Returns
    -------
    indices : (..., Q, max_n) int array
    padded : (..., Q) bool array
    """
    if not r > 0:
        raise BadRadius(f"radius must be positive, got {r}")
    if max_n < 1:
        raise BadCount(f"max_n must be >= 1, got {max_n}")
    points = np.asarray(points, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.int64)
    n = points.shape[-2]
    centers = np.take_along_axis(points, queries[..., None], axis=-2)
    d2 = _sq_dist(points, centers)
    inside = d2 <= r * r
    count = inside.sum(axis=-1)
    by_dist = np.argsort(np.where(inside, d2, np.inf), axis=-1, kind="stable")
    width = min(max_n, n)
    slot = np.arange(width)
    valid = slot < np.minimum(count, max_n)[..., None]
    chosen = np.sort(np.where(valid, by_dist[..., :width], n), axis=-1)
    if width < max_n:
        chosen = np.concatenate([chosen, np.full(chosen.shape[:-1] + (max_n - width,), n)], axis=-1)
    first, second = by_dist[..., 0], by_dist[..., min(1, n - 1)]
    pad = np.where(first != queries, first, second)
    pad = np.where(count >= 2, pad, queries)
    chosen = np.where(chosen == n, pad[..., None], chosen)
    return chosen, count < max_n


def radius_neighbors(cloud: PointCloud, query_index: int, r: float, max_n: int) -> NeighborSet:
    """All points within distance ``r`` of the query (the query included).

    When more than ``max_n`` points qualify, the ``max_n`` nearest are kept.
    When fewer qualify, the nearest non-query member (or the query itself if it
    is alone) is repeated until the set has ``max_n`` entries.
    """
    pts = _points(cloud)
    if not 0 <= query_index < pts.shape[0]:
        raise IndexError(f"query_index {query_index} out of range")
    idx, padded = group_radius(pts, np.array([query_index]), r, max_n)
    return NeighborSet(int(query_index), tuple(int(i) for i in idx[0]), float(r), bool(padded[0]))


def knn(cloud: PointCloud, query_index: int, k: int) -> NeighborSet:
    """The ``k`` nearest points to the query, itself included; returned in index order."""
    pts = _points(cloud)
    n = pts.shape[0]
    if not 1 <= k <= n:
        raise BadCount(f"k={k} must lie in [1, {n}]")
    if not 0 <= query_index < n:
        raise IndexError(f"query_index {query_index} out of range")
    d2 = _sq_dist(pts, pts[query_index][None])[0]
    by_dist = np.argsort(d2, kind="stable")[:k]
    return NeighborSet(
        int(query_index),
        tuple(int(i) for i in np.sort(by_dist)),
        float(np.sqrt(d2[by_dist[-1]])),
        False,
    )
