import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from wfalign.core import NonFinite
from wfalign.linalg3 import det3, matmul3, outer_accumulate, svd3, svd3_batch, sym_eig3, sym_eig3_batch

from conftest import rand_rot

RZ90 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])


def _is_signed_permutation(m):
    a = np.abs(m)
    return np.allclose(np.sort(a, axis=0), [[0, 0, 0], [0, 0, 0], [1, 1, 1]])


def test_eig_diagonal():
    e = sym_eig3(np.diag([3.0, 2.0, 1.0]))
    np.testing.assert_array_equal(e.eigenvalues, [3.0, 2.0, 1.0])
    assert _is_signed_permutation(e.eigenvectors)


def test_eig_zero():
    e = sym_eig3(np.zeros((3, 3)))
    np.testing.assert_array_equal(e.eigenvalues, [0.0, 0.0, 0.0])
    np.testing.assert_allclose(e.eigenvectors.T @ e.eigenvectors, np.eye(3), atol=1e-15)
    np.testing.assert_array_equal(e.gap_ratios, [0.0, 0.0])


def test_eig_known_factors(rng):
    for _ in range(20):
        q = rand_rot(rng)
        a = q @ np.diag([5.0, 2.0, 0.5]) @ q.T
        e = sym_eig3(a)
        np.testing.assert_allclose(e.eigenvalues, [5.0, 2.0, 0.5], atol=1e-10)
        rec = e.eigenvectors @ np.diag(e.eigenvalues) @ e.eigenvectors.T
        assert np.max(np.abs(rec - a)) <= 1e-10


def test_eig_sign_canonical(rng):
    a = rng.normal(size=(3, 3))
    e = sym_eig3(a + a.T)
    for k in range(3):
        col = e.eigenvectors[:, k]
        assert col[np.argmax(np.abs(col))] > 0


def test_eig_gap_ratios():
    e = sym_eig3(np.diag([4.0, 2.0, 1.0]))
    np.testing.assert_allclose(e.gap_ratios, [0.5, 0.25])


def test_eig_rejects_nonfinite():
    with pytest.raises(NonFinite):
        sym_eig3(np.array([[np.inf, 0, 0], [0, 1, 0], [0, 0, 1]]))


def test_eig_residuals(rng):
    a = rng.uniform(-10, 10, size=(2000, 3, 3))
    a = a + np.swapaxes(a, 1, 2)
    w, v, _ = sym_eig3_batch(a)
    res = np.einsum("nij,njk->nik", a, v) - v * w[:, None, :]
    bound = 1e-9 * np.maximum(1.0, np.linalg.norm(a, axis=(1, 2), ord=2))
    assert np.all(np.linalg.norm(res, axis=1).max(axis=1) <= bound)
    assert np.all(np.diff(w, axis=1) <= 0)


sym_entries = arrays(np.float64, (6,), elements=st.floats(-10, 10, allow_nan=False))


def _sym(x):
    return np.array([[x[0], x[1], x[2]], [x[1], x[3], x[4]], [x[2], x[4], x[5]]])


@settings(max_examples=300, deadline=None)
@given(sym_entries)
def test_eig_reconstruction_property(x):
    a = _sym(x)
    e = sym_eig3(a)
    rec = e.eigenvectors @ np.diag(e.eigenvalues) @ e.eigenvectors.T
    assert np.max(np.abs(rec - a)) <= 1e-9 * max(1.0, np.max(np.abs(a)))
    assert e.eigenvalues[0] >= e.eigenvalues[1] >= e.eigenvalues[2]


@settings(max_examples=100, deadline=None)
@given(sym_entries, st.integers(0, 2**32 - 1))
def test_eig_similarity_invariance(x, seed):
    a = _sym(x)
    q = rand_rot(np.random.default_rng(seed))
    w1 = sym_eig3(a).eigenvalues
    w2 = sym_eig3(q @ a @ q.T).eigenvalues
    assert np.max(np.abs(w1 - w2)) <= 1e-9 * max(1.0, np.max(np.abs(a)))


def test_eig_near_ties(rng):
    for eps in (1e-6, 1e-10, 1e-14, 0.0):
        q = rand_rot(rng)
        a = q @ np.diag([1.0, 1.0 - eps, 0.3]) @ q.T
        e = sym_eig3(a)
        rec = e.eigenvectors @ np.diag(e.eigenvalues) @ e.eigenvectors.T
        assert np.max(np.abs(rec - a)) <= 1e-12
        np.testing.assert_allclose(e.eigenvectors.T @ e.eigenvectors, np.eye(3), atol=1e-12)


def test_eig_deterministic(rng):
    a = rng.normal(size=(3, 3))
    a = a + a.T
    e1, e2 = sym_eig3(a), sym_eig3(a.copy())
    assert np.array_equal(e1.eigenvectors, e2.eigenvectors)
    assert np.array_equal(e1.eigenvalues, e2.eigenvalues)


def test_eig_batch_matches_single(rng):
    a = rng.normal(size=(50, 3, 3))
    a = a + np.swapaxes(a, 1, 2)
    w, v, g = sym_eig3_batch(a)
    for i in (0, 17, 49):
        e = sym_eig3(a[i])
        assert np.array_equal(e.eigenvalues, w[i])
        assert np.array_equal(e.eigenvectors, v[i])


def test_svd_identity():
    s = svd3(np.eye(3))
    np.testing.assert_array_equal(s.sigma, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(s.u @ s.v.T, np.eye(3), atol=1e-15)
    assert _is_signed_permutation(s.u) and _is_signed_permutation(s.v)


def test_svd_diag_rank2():
    s = svd3(np.diag([2.0, 1.0, 0.0]))
    np.testing.assert_allclose(s.sigma, [2.0, 1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(s.u.T @ s.u, np.eye(3), atol=1e-15)


def test_svd_known_factors(rng):
    for _ in range(50):
        u0, v0 = rand_rot(rng), rand_rot(rng)
        s0 = np.sort(rng.uniform(0.1, 5.0, size=3))[::-1]
        a = u0 @ np.diag(s0) @ v0.T
        s = svd3(a)
        np.testing.assert_allclose(s.sigma, s0, atol=1e-10)


def test_svd_invariants(rng):
    a = rng.uniform(-10, 10, size=(5000, 3, 3))
    u, s, v = svd3_batch(a)
    rec = np.einsum("nij,nj,nkj->nik", u, s, v)
    scale = np.maximum(1.0, np.abs(a).max(axis=(1, 2)))
    assert np.all(np.abs(rec - a).max(axis=(1, 2)) <= 1e-9 * scale)
    eye = np.eye(3)
    assert np.abs(np.einsum("nji,njk->nik", u, u) - eye).max() <= 1e-10
    assert np.abs(np.einsum("nji,njk->nik", v, v) - eye).max() <= 1e-10
    assert np.all(s >= 0) and np.all(np.diff(s, axis=1) <= 0)


def test_svd_rank_one_and_zero():
    for a in (np.outer([1.0, 2.0, 3.0], [0.5, -1.0, 2.0]), np.zeros((3, 3))):
        s = svd3(a)
        np.testing.assert_allclose(s.u @ np.diag(s.sigma) @ s.v.T, a, atol=1e-13)
        np.testing.assert_allclose(s.u.T @ s.u, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(s.v.T @ s.v, np.eye(3), atol=1e-12)


def test_svd_of_rotation_is_ones(rng):
    for _ in range(100):
        np.testing.assert_allclose(svd3(rand_rot(rng)).sigma, 1.0, atol=1e-10)


def test_svd_rejects_nonfinite():
    with pytest.raises(NonFinite):
        svd3(np.full((3, 3), np.nan))


def test_helpers():
    assert det3(np.eye(3)) == 1.0
    assert det3(RZ90) == 1.0
    np.testing.assert_array_equal(outer_accumulate([[1, 0, 0], [0, 1, 0]]), np.diag([1.0, 1.0, 0.0]))
    a = np.arange(9.0).reshape(3, 3)
    np.testing.assert_allclose(matmul3(a, RZ90), a @ RZ90)


def test_outer_accumulate_symmetric(rng):
    m = outer_accumulate(rng.normal(size=(17, 3)))
    assert np.array_equal(m, m.T)
