"""Shared value types, validation and seeded randomness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORMAL_TOL = 1e-6


class NotOrthogonal(ValueError):
    """Matrix deviates from orthogonality by more than the tolerance."""


class NotProper(ValueError):
    """Orthogonal matrix with determinant -1 (a reflection)."""


class NonFinite(ValueError):
    """Input contains NaN or Inf."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Ordered set of 3D points with optional unit normals.

    Parameters
    ----------
    points : (n, 3) array_like
        Cartesian coordinates, one point per row.
    normals : (n, 3) array_like, optional
        Unit normals, one per point.
    """

    points: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
            raise ValueError(f"points must have shape (n>=1, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise NonFinite("point coordinates must be finite")
        object.__setattr__(self, "points", pts)
        if self.normals is not None:
            nrm = _frozen(self.normals)
            if nrm.shape != pts.shape:
                raise ValueError(f"normals shape {nrm.shape} != points shape {pts.shape}")
            if not np.all(np.isfinite(nrm)):
                raise NonFinite("normals must be finite")
            dev = np.abs(np.linalg.norm(nrm, axis=1) - 1.0)
            if np.any(dev > NORMAL_TOL):
                raise ValueError(f"normals must be unit length (max deviation {dev.max():.3g})")
            object.__setattr__(self, "normals", nrm)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def has_normals(self) -> bool:
        return self.normals is not None

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        if self.has_normals != other.has_normals:
            return False
        same = np.array_equal(self.points, other.points)
        if self.has_normals:
            same = same and np.array_equal(self.normals, other.normals)
        return same

    __hash__ = None


def validate_rotation(m, tol: float = 1e-10) -> np.ndarray:
    """Check that ``m`` is a proper rotation and return it as a read-only array.

    Raises
    ------
    NotOrthogonal
        If ``max |m m^T - I|`` exceeds ``tol``.
    NotProper
        If the determinant is -1 (within ``tol``).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite("rotation entries must be finite")
    dev = np.max(np.abs(m @ m.T - np.eye(3)))
    if dev > tol:
        raise NotOrthogonal(f"orthogonality deviation {dev:.3g} exceeds {tol:.3g}")
    det = np.linalg.det(m)
    if abs(det - 1.0) > tol:
        raise NotProper(f"determinant {det:.6f} is not +1")
    return _frozen(m)


def apply_rigid(cloud: PointCloud, r, t=(0.0, 0.0, 0.0)) -> PointCloud:
    """Return ``r p + t`` for every point; normals are rotated only."""
    r = np.asarray(r, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64).reshape(3)
    if np.array_equal(r, np.eye(3)) and not np.any(t):
        return cloud
    points = cloud.points @ r.T + t
    normals = None if cloud.normals is None else cloud.normals @ r.T
    return PointCloud(points, normals)


def make_rng(seed: int, *stream) -> np.random.Generator:
    """Generator keyed by ``seed`` and an optional stream path (counter-based splitting)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, stream)]))


def derive_seed(seed: int, *stream) -> int:
    """Deterministic 64-bit child seed for ``(seed, *stream)``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, stream)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
