"""Synthetic labelled shapes and rotation sampling."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import PointCloud, derive_seed, make_rng

SHAPE_KINDS = ("sphere", "cube", "cylinder", "cone", "torus")

SPHERE_RADIUS = 1.0
CUBE_HALF = 0.5
CYLINDER_RADIUS = 0.35
CYLINDER_HALF_HEIGHT = 0.5
CONE_RADIUS = 0.5
CONE_HALF_HEIGHT = 0.5
TORUS_R = 0.35
TORUS_r = 0.15


@dataclass(frozen=True)
class ShapeSpec:
    kind: str = "cylinder"
    n_points: int = 256
    noise_sigma: float = 0.0
    with_normals: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}; expected one of {SHAPE_KINDS}")
        if self.n_points < 8:
            raise ValueError("n_points must be at least 8")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    samples: tuple[tuple[PointCloud, int], ...]
    class_names: tuple[str, ...]
    split: str
    seeds: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def class_counts(self) -> dict[str, int]:
        counts = {name: 0 for name in self.class_names}
        for _, label in self.samples:
            counts[self.class_names[label]] += 1
        return counts

    @property
    def labels(self) -> np.ndarray:
        return np.array([label for _, label in self.samples], dtype=np.int64)

    def stacked_points(self) -> np.ndarray:
        return np.stack([c.points for c, _ in self.samples])


def _unit(v):
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _sphere(rng, n):
    nrm = _unit(rng.normal(size=(n, 3)))
    return SPHERE_RADIUS * nrm, nrm


def _cube(rng, n):
    face = rng.integers(0, 6, size=n)
    axis, sign = face // 2, np.where(face % 2 == 0, 1.0, -1.0)
    pts = rng.uniform(-CUBE_HALF, CUBE_HALF, size=(n, 3))
    rows = np.arange(n)
    pts[rows, axis] = sign * CUBE_HALF
    nrm = np.zeros((n, 3))
    nrm[rows, axis] = sign
    return pts, nrm


def _cylinder(rng, n):
    r, h = CYLINDER_RADIUS, CYLINDER_HALF_HEIGHT
    side_area = 2 * np.pi * r * 2 * h
    cap_area = np.pi * r * r
    part = rng.choice(3, size=n, p=np.array([side_area, cap_area, cap_area]) / (side_area + 2 * cap_area))
    phi = rng.uniform(0, 2 * np.pi, size=n)
    z = rng.uniform(-h, h, size=n)
    rad = r * np.sqrt(rng.uniform(0, 1, size=n))
    side = part == 0
    cap_z = np.where(part == 1, h, -h)
    pts = np.where(
        side[:, None],
        np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1),
        np.stack([rad * np.cos(phi), rad * np.sin(phi), cap_z], axis=1),
    )
    nrm = np.where(
        side[:, None],
        np.stack([np.cos(phi), np.sin(phi), np.zeros(n)], axis=1),
        np.stack([np.zeros(n), np.zeros(n), np.sign(cap_z)], axis=1),
    )
    return pts, nrm


def _cone(rng, n):
    r, hh = CONE_RADIUS, CONE_HALF_HEIGHT
    height = 2 * hh
    slant = np.hypot(r, height)
    side_area = np.pi * r * slant
    base_area = np.pi * r * r
    side = rng.uniform(0, side_area + base_area, size=n) < side_area
    phi = rng.uniform(0, 2 * np.pi, size=n)
    t = np.sqrt(rng.uniform(0, 1, size=n))  # area grows linearly with distance from the apex
    side_pts = np.stack([t * r * np.cos(phi), t * r * np.sin(phi), hh - t * height], axis=1)
    base_pts = np.stack([t * r * np.cos(phi), t * r * np.sin(phi), np.full(n, -hh)], axis=1)
    side_nrm = np.stack([height * np.cos(phi), height * np.sin(phi), np.full(n, r)], axis=1) / slant
    base_nrm = np.tile([0.0, 0.0, -1.0], (n, 1))
    pts = np.where(side[:, None], side_pts, base_pts)
    nrm = np.where(side[:, None], side_nrm, base_nrm)
    return pts, nrm


def _torus(rng, n):
    big, small = TORUS_R, TORUS_r
    theta = np.empty(0)
    while theta.size < n:
        cand = rng.uniform(0, 2 * np.pi, size=2 * n)
        keep = rng.uniform(0, big + small, size=2 * n) < big + small * np.cos(cand)
        theta = np.concatenate([theta, cand[keep]])
    theta = theta[:n]
    phi = rng.uniform(0, 2 * np.pi, size=n)
    ring = big + small * np.cos(theta)
    pts = np.stack([ring * np.cos(phi), ring * np.sin(phi), small * np.sin(theta)], axis=1)
    nrm = np.stack([np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), np.sin(theta)], axis=1)
    return pts, nrm


_GENERATORS = {
    "sphere": _sphere,
    "cube": _cube,
    "cylinder": _cylinder,
    "cone": _cone,
    "torus": _torus,
}


def gen_shape(spec: ShapeSpec) -> PointCloud:
    """Area-uniform samples on the surface of ``spec.kind``, centred at the origin.

    Sizes: sphere radius 1, cube half-extent 0.5, cylinder radius 0.35 and
    height 1, cone base radius 0.5 and height 1, torus radii 0.35 / 0.15.
    Noise is Gaussian jitter along the analytic normal.
    """
    rng = make_rng(spec.seed, SHAPE_KINDS.index(spec.kind))
    pts, nrm = _GENERATORS[spec.kind](rng, spec.n_points)
    if spec.noise_sigma > 0:
        pts = pts + spec.noise_sigma * rng.normal(size=(spec.n_points, 1)) * nrm
    return PointCloud(pts, _unit(nrm) if spec.with_normals else None)


def quaternion_to_matrix(q) -> np.ndarray:
    """Unit quaternions ``(w, x, y, z)`` of shape (..., 4) to rotation matrices (..., 3, 3)."""
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)], axis=-1),
            np.stack([2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)], axis=-1),
            np.stack([2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)], axis=-1),
        ],
        axis=-2,
    )


def random_rotations(rng: np.random.Generator, n: int, mode: str = "arbitrary") -> np.ndarray:
    """``n`` rotation matrices: uniform about z (``z_only``) or Haar-uniform on SO(3)."""
    if mode in ("z", "z_only"):
        ang = rng.uniform(0.0, 2 * np.pi, size=n)
        c, s = np.cos(ang), np.sin(ang)
        out = np.zeros((n, 3, 3))
        out[:, 0, 0] = c
        out[:, 0, 1] = -s
        out[:, 1, 0] = s
        out[:, 1, 1] = c
        out[:, 2, 2] = 1.0
        return out
    if mode == "arbitrary":
        q = rng.normal(size=(n, 4))
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        return quaternion_to_matrix(q)
    if mode == "none":
        return np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    raise ValueError(f"unknown rotation mode {mode!r}")


def random_rotation(seed, mode: str = "arbitrary") -> np.ndarray:
    """One rotation, drawn from ``seed`` (an int or a Generator)."""
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed, 0x20)
    return random_rotations(rng, 1, mode)[0]


def make_dataset(
    per_class: int,
    template: ShapeSpec = ShapeSpec(),
    train_fraction: float = 0.8,
    seed: int = 0,
    classes=SHAPE_KINDS,
) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified train/test split with ``per_class`` shapes of every kind.

    Each sample gets its own seed derived from ``(seed, class, index)``; the
    first ``round(train_fraction * per_class)`` samples of a class go to train.
    """
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    if not 0.0 <= train_fraction <= 1.0:
        raise ValueError("train_fraction must lie in [0, 1]")
    n_train = int(round(train_fraction * per_class))
    train, test, train_seeds, test_seeds = [], [], [], []
    for label, kind in enumerate(classes):
        for i in range(per_class):
            s = derive_seed(seed, label, i)
            cloud = gen_shape(replace(template, kind=kind, seed=s))
            if i < n_train:
                train.append((cloud, label))
                train_seeds.append(s)
            else:
                test.append((cloud, label))
                test_seeds.append(s)
    names = tuple(classes)
    return (
        LabeledDataset(tuple(train), names, "train", tuple(train_seeds)),
        LabeledDataset(tuple(test), names, "test", tuple(test_seeds)),
    )
