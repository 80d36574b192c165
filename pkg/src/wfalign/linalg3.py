"""Dense 3x3 linear algebra: Jacobi eigensolver, one-sided Jacobi SVD and helpers.

All routines are vectorised over leading batch axes. Each matrix in a batch
follows exactly the rotation sequence it would follow on its own, so batched
and single calls agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NonFinite

EIG_TOL = 1e-14
SVD_TOL = 1e-15
MAX_SWEEPS = 50
GAP_EPS = 1e-300

_PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class EigenDecomposition3:
    """Eigenvalues in descending order; column ``k`` of ``eigenvectors`` pairs with ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gap_ratios: np.ndarray


@dataclass(frozen=True)
class Svd3:
    """``a = u @ diag(sigma) @ v.T`` with ``sigma`` non-negative and descending."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


def _check_finite(a):
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix entries must be finite")


def _rotation_params(app, aqq, apq, active):
    """Jacobi rotation ``(t, c, s)`` zeroing ``apq``; identity where inactive."""
    rotate = active & (apq != 0.0)
    safe_apq = np.where(rotate, apq, 1.0)
    with np.errstate(over="ignore"):
        theta = (aqq - app) / (2.0 * safe_apq)
    big = np.abs(theta) > 1e150
    theta_c = np.where(big, 1.0, theta)
    t = np.where(theta_c >= 0.0, 1.0, -1.0) / (np.abs(theta_c) + np.sqrt(theta_c * theta_c + 1.0))
    t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
    t = np.where(rotate, t, 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    return t, c, s, rotate


def _jacobi_sym(a: np.ndarray):
    """Cyclic Jacobi on a batch of symmetric matrices, shape (N, 3, 3)."""
    a = a.copy()
    n = a.shape[0]
    v = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    scale = np.sqrt(np.sum(a * a, axis=(1, 2)))
    thresh = EIG_TOL * scale
    active = np.ones(n, dtype=bool)
    for _ in range(MAX_SWEEPS):
        off = np.sqrt(2.0 * (a[:, 0, 1] ** 2 + a[:, 0, 2] ** 2 + a[:, 1, 2] ** 2))
        active &= off > thresh
        if not active.any():
            break
        for p, q in _PAIRS:
            r = 3 - p - q
            apq = a[:, p, q]
            t, c, s, rotate = _rotation_params(a[:, p, p], a[:, q, q], apq, active)
            arp = a[:, r, p].copy()
            arq = a[:, r, q].copy()
            a[:, p, p] = a[:, p, p] - t * apq
            a[:, q, q] = a[:, q, q] + t * apq
            new_pq = np.where(rotate, 0.0, apq)
            a[:, p, q] = new_pq
            a[:, q, p] = new_pq
            new_rp = c * arp - s * arq
            new_rq = s * arp + c * arq
            a[:, r, p] = new_rp
            a[:, p, r] = new_rp
            a[:, r, q] = new_rq
            a[:, q, r] = new_rq
            vp = v[:, :, p].copy()
            vq = v[:, :, q].copy()
            v[:, :, p] = c[:, None] * vp - s[:, None] * vq
            v[:, :, q] = s[:, None] * vp + c[:, None] * vq
    w = np.stack([a[:, 0, 0], a[:, 1, 1], a[:, 2, 2]], axis=1)
    return w, v


def _canonical_signs(vecs: np.ndarray) -> np.ndarray:
    """+1/-1 per column so that the largest-magnitude component becomes positive."""
    idx = np.argmax(np.abs(vecs), axis=-2)
    lead = np.take_along_axis(vecs, idx[..., None, :], axis=-2)[..., 0, :]
    return np.where(lead < 0.0, -1.0, 1.0)


def sym_eig3_batch(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched :func:`sym_eig3`; returns ``(eigenvalues, eigenvectors, gap_ratios)``.

    ``a`` has shape (..., 3, 3).
    """
    a = np.asarray(a, dtype=np.float64)
    _check_finite(a)
    lead_shape = a.shape[:-2]
    a = a.reshape(-1, 3, 3)
    a = 0.5 * (a + np.swapaxes(a, -1, -2))
    w, v = _jacobi_sym(a)
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    v = v * _canonical_signs(v)[:, None, :]
    denom = np.maximum(w[:, 0], GAP_EPS)
    gaps = np.stack([(w[:, 0] - w[:, 1]) / denom, (w[:, 1] - w[:, 2]) / denom], axis=1)
    return (
        w.reshape(*lead_shape, 3),
        v.reshape(*lead_shape, 3, 3),
        gaps.reshape(*lead_shape, 2),
    )


def sym_eig3(a) -> EigenDecomposition3:
    """Eigendecomposition of a symmetric 3x3 matrix by cyclic Jacobi sweeps.

    The input is symmetrised by averaging with its transpose. Eigenvalues are
    returned in descending order and every eigenvector is signed so that its
    largest-magnitude component is positive.

    Raises
    ------
    NonFinite
        If any entry is NaN or Inf.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {a.shape}")
    w, v, g = sym_eig3_batch(a[None])
    return EigenDecomposition3(w[0], v[0], g[0])


def _complete_basis(u: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Replace columns of each frame where ``keep`` is False with an orthonormal completion."""
    out = u.copy()
    eye = np.eye(3)
    for b in np.flatnonzero(~keep.all(axis=1)):
        basis = [out[b, :, k] for k in range(3) if keep[b, k]]
        for k in range(3):
            if keep[b, k]:
                continue
            best, best_norm = None, -1.0
            for e in eye:
                r = e.copy()
                for q in basis:
                    r = r - (q @ r) * q
                nrm = np.linalg.norm(r)
                if nrm > best_norm + 1e-12:
                    best, best_norm = r, nrm
            col = best / best_norm
            for q in basis:
                col = col - (q @ col) * q
            col = col / np.linalg.norm(col)
            out[b, :, k] = col
            basis.append(col)
    return out


def svd3_batch(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched :func:`svd3`; returns ``(u, sigma, v)``."""
    a = np.asarray(a, dtype=np.float64)
    _check_finite(a)
    lead_shape = a.shape[:-2]
    b = a.reshape(-1, 3, 3).copy()
    n = b.shape[0]
    v = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    active = np.ones(n, dtype=bool)
    for _ in range(MAX_SWEEPS):
        rotated_any = np.zeros(n, dtype=bool)
        for p, q in _PAIRS:
            bp = b[:, :, p]
            bq = b[:, :, q]
            alpha = bp[:, 0] ** 2 + bp[:, 1] ** 2 + bp[:, 2] ** 2
            beta = bq[:, 0] ** 2 + bq[:, 1] ** 2 + bq[:, 2] ** 2
            gamma = bp[:, 0] * bq[:, 0] + bp[:, 1] * bq[:, 1] + bp[:, 2] * bq[:, 2]
            need = active & (np.abs(gamma) > SVD_TOL * np.sqrt(alpha * beta))
            # gamma plays the role of the off-diagonal Gram entry of a^T a
            t, c, s, rotate = _rotation_params(alpha, beta, gamma, need)
            rotated_any |= rotate
            bp, bq = bp.copy(), bq.copy()
            b[:, :, p] = c[:, None] * bp - s[:, None] * bq
            b[:, :, q] = s[:, None] * bp + c[:, None] * bq
            vp = v[:, :, p].copy()
            vq = v[:, :, q].copy()
            v[:, :, p] = c[:, None] * vp - s[:, None] * vq
            v[:, :, q] = s[:, None] * vp + c[:, None] * vq
        active &= rotated_any
        if not active.any():
            break
    sigma = np.sqrt(b[:, 0, :] ** 2 + b[:, 1, :] ** 2 + b[:, 2, :] ** 2)
    order = np.argsort(-sigma, axis=1, kind="stable")
    sigma = np.take_along_axis(sigma, order, axis=1)
    b = np.take_along_axis(b, order[:, None, :], axis=2)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    sign = _canonical_signs(v)
    v = v * sign[:, None, :]
    b = b * sign[:, None, :]
    keep = sigma > np.finfo(np.float64).tiny
    u = b / np.where(keep, sigma, 1.0)[:, None, :]
    if not keep.all():
        u = _complete_basis(u, keep)
        sigma = np.where(keep, sigma, 0.0)
    return (
        u.reshape(*lead_shape, 3, 3),
        sigma.reshape(*lead_shape, 3),
        v.reshape(*lead_shape, 3, 3),
    )


def svd3(a) -> Svd3:
    """Singular value decomposition of a 3x3 matrix.

    Computed by one-sided Jacobi: plane rotations are applied to the columns
    of ``a`` until they are mutually orthogonal, which diagonalises ``a^T a``
    implicitly. Left singular vectors are recovered as ``a v_k / sigma_k``;
    columns with zero singular value are completed to an orthonormal frame.

    Raises
    ------
    NonFinite
        If any entry is NaN or Inf.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {a.shape}")
    u, s, v = svd3_batch(a[None])
    return Svd3(u[0], s[0], v[0])


def det3(a) -> float:
    """Determinant by cofactor expansion along the first row."""
    a = np.asarray(a, dtype=np.float64)
    return float(
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def matmul3(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.array([[sum(a[i, k] * b[k, j] for k in range(3)) for j in range(3)] for i in range(3)])


def outer_accumulate(columns) -> np.ndarray:
    """Sum of ``x x^T`` over 3-vectors; the result is exactly symmetric."""
    x = np.asarray(columns, dtype=np.float64).reshape(-1, 3)
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            out[i, j] = out[j, i] = np.dot(x[:, i], x[:, j])
    return out
