import numpy as np
import pytest
from scipy import stats

from wfalign.core import validate_rotation
from wfalign.synthdata import (
    SHAPE_KINDS,
    ShapeSpec,
    gen_shape,
    make_dataset,
    random_rotation,
    random_rotations,
)


def test_sphere_surface():
    pts = gen_shape(ShapeSpec("sphere", 2000)).points
    assert np.abs(np.linalg.norm(pts, axis=1) - 1.0).max() <= 1e-12


def test_cube_surface():
    pts = gen_shape(ShapeSpec("cube", 2000)).points
    on_face = np.abs(np.abs(pts) - 0.5) <= 1e-12
    assert np.all(on_face.sum(axis=1) >= 1)
    assert np.all(np.abs(pts) <= 0.5 + 1e-12)


def test_torus_surface():
    pts = gen_shape(ShapeSpec("torus", 2000)).points
    ring = np.hypot(pts[:, 0], pts[:, 1]) - 0.35
    assert np.abs(np.hypot(ring, pts[:, 2]) - 0.15).max() <= 1e-12


def test_cylinder_surface():
    pts = gen_shape(ShapeSpec("cylinder", 2000)).points
    rad = np.hypot(pts[:, 0], pts[:, 1])
    side = np.abs(rad - 0.35) <= 1e-12
    cap = (np.abs(np.abs(pts[:, 2]) - 0.5) <= 1e-12) & (rad <= 0.35 + 1e-12)
    assert np.all(side | cap)


def test_cone_surface():
    pts = gen_shape(ShapeSpec("cone", 2000)).points
    rad = np.hypot(pts[:, 0], pts[:, 1])
    side = np.abs(rad - 0.5 * (0.5 - pts[:, 2])) <= 1e-12
    base = (np.abs(pts[:, 2] + 0.5) <= 1e-12) & (rad <= 0.5 + 1e-12)
    assert np.all(side | base)


@pytest.mark.parametrize("kind", SHAPE_KINDS)
def test_normals_and_determinism(kind):
    a = gen_shape(ShapeSpec(kind, 300, noise_sigma=0.01, with_normals=True, seed=4))
    b = gen_shape(ShapeSpec(kind, 300, noise_sigma=0.01, with_normals=True, seed=4))
    assert a == b
    assert np.abs(np.linalg.norm(a.normals, axis=1) - 1).max() <= 1e-12
    assert gen_shape(ShapeSpec(kind, 300, seed=5)) != gen_shape(ShapeSpec(kind, 300, seed=6))


def test_noise_moves_along_normal():
    clean = gen_shape(ShapeSpec("sphere", 500, seed=1))
    noisy = gen_shape(ShapeSpec("sphere", 500, noise_sigma=0.05, seed=1))
    radial = np.linalg.norm(noisy.points, axis=1) - 1.0
    assert 0.03 < radial.std() < 0.07
    dirs = noisy.points / np.linalg.norm(noisy.points, axis=1, keepdims=True)
    np.testing.assert_allclose(dirs, clean.points, atol=1e-12)


def test_spec_validation():
    with pytest.raises(ValueError):
        ShapeSpec("blob")
    with pytest.raises(ValueError):
        ShapeSpec("cube", n_points=7)
    with pytest.raises(ValueError):
        ShapeSpec("cube", noise_sigma=-1)


def test_z_only_fixes_axis():
    for seed in range(50):
        r = random_rotation(seed, "z_only")
        assert np.array_equal(r @ [0.0, 0.0, 1.0], [0.0, 0.0, 1.0])
        validate_rotation(r, 1e-12)


def test_arbitrary_rotations_valid_and_deterministic():
    rots = random_rotations(np.random.default_rng(0), 2000, "arbitrary")
    for r in rots[:500]:
        validate_rotation(r, 1e-12)
    assert np.array_equal(random_rotation(9), random_rotation(9))


def test_arbitrary_mean_direction():
    rots = random_rotations(np.random.default_rng(1), 100_000, "arbitrary")
    assert np.linalg.norm(rots[:, :, 0].mean(axis=0)) <= 0.02


def test_haar_angle_distribution():
    rots = random_rotations(np.random.default_rng(2), 20_000, "arbitrary")
    cos = np.clip((np.trace(rots, axis1=1, axis2=2) - 1) / 2, -1, 1)
    theta = np.arccos(cos)
    edges = np.linspace(0, np.pi, 11)
    observed, _ = np.histogram(theta, edges)
    cdf = (edges - np.sin(edges)) / np.pi  # integral of (1 - cos t) / pi
    expected = np.diff(cdf) * len(theta)
    assert stats.chisquare(observed, expected).pvalue > 1e-3


def test_make_dataset_split():
    tr, te = make_dataset(10, ShapeSpec(n_points=64), 0.8, seed=3)
    assert len(tr) == 40 and len(te) == 10
    assert set(tr.class_counts.values()) == {8} and set(te.class_counts.values()) == {2}
    assert not set(tr.seeds) & set(te.seeds)
    again, _ = make_dataset(10, ShapeSpec(n_points=64), 0.8, seed=3)
    assert all(a == b and la == lb for (a, la), (b, lb) in zip(tr.samples, again.samples))
    assert tr.stacked_points().shape == (40, 64, 3)
