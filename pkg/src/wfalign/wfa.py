"""Weight-feature alignment.

Every neighbourhood is expressed in its own PCA frame ``V_i`` and then mapped
onto the PCA frame ``U`` of the first layer's weight vectors, so the layer
always sees its input in the orientation of its own kernel:

    R_i = U V_i^T,    p~_j = R_i (p_j - pbar_i),    y_i = W~^T X'_i + b

Axis signs follow the first-quadrant rule: ``V_i`` is signed so that
``p_i - pbar_i`` has non-negative coordinates, ``U`` so that ``-wbar`` does.
Axes whose reference projection is too small to decide a sign are flagged and
fall back to "largest component positive"; frames whose spectrum has a
near-tie are flagged degenerate. Both flags mark results that are not
guaranteed rotation invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import PointCloud
from .linalg3 import sym_eig3_batch
from .neighbors import NeighborSet

SIGN_TOL = 1e-6
GAP_TOL = 1e-3
RANK_TOL = 1e-10
_SCALE_EPS = 1e-12

#: The six ways of pairing local axes with weight axes. Entry ``k`` of an
#: order names the local axis (0-based, by descending eigenvalue) sent to ``u_k``.
AXIS_ORDERS: tuple[tuple[int, int, int], ...] = (
    (0, 1, 2),
    (2, 1, 0),
    (2, 0, 1),
    (0, 2, 1),
    (1, 0, 2),
    (1, 2, 0),
)
DEFAULT_ORDER = (0, 1, 2)
REVERSED_ORDER = (2, 1, 0)


class RankDeficientWeights(ValueError):
    pass


class ZeroBarycenter(ValueError):
    """Weight barycentre too close to zero to orient any axis.

    The fully flagged fallback frame is still available as ``frame``.
    """

    def __init__(self, message, frame):
        super().__init__(message)
        self.frame = frame


def parse_order(order) -> tuple[int, int, int]:
    """Accept ``(0, 1, 2)``-style tuples or 1-based strings such as ``"321"``."""
    if isinstance(order, str):
        order = tuple(int(ch) - 1 for ch in order.strip())
    order = tuple(int(k) for k in order)
    if sorted(order) != [0, 1, 2]:
        raise ValueError(f"axis order must be a permutation of three axes, got {order}")
    return order


def order_name(order) -> str:
    return "".join(str(k + 1) for k in parse_order(order))


@dataclass(frozen=True)
class WFAConfig:
    sign_tol: float = SIGN_TOL
    gap_tol: float = GAP_TOL
    rank_tol: float = RANK_TOL
    order: tuple[int, int, int] = DEFAULT_ORDER

    def __post_init__(self):
        object.__setattr__(self, "order", parse_order(self.order))
        if self.sign_tol < 0 or self.gap_tol < 0 or self.rank_tol < 0:
            raise ValueError("tolerances must be non-negative")


@dataclass(frozen=True, eq=False)
class LayerWeights:
    """Weights ``w`` (3 x d, columns are the weight points) and bias (d,) of the first layer."""

    w: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64)
        bias = np.array(self.bias, dtype=np.float64).reshape(-1)
        if w.ndim != 2 or w.shape[0] != 3 or w.shape[1] < 3:
            raise ValueError(f"weights must have shape (3, d>=3), got {w.shape}")
        if bias.shape != (w.shape[1],):
            raise ValueError(f"bias must have shape ({w.shape[1]},), got {bias.shape}")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "bias", bias)

    @property
    def d(self) -> int:
        return self.w.shape[1]

    @property
    def w_bar(self) -> np.ndarray:
        return self.w.mean(axis=1)

    @property
    def centered(self) -> np.ndarray:
        return self.w - self.w_bar[:, None]


@dataclass(frozen=True, eq=False)
class WeightFrame:
    u: np.ndarray
    eigenvalues: np.ndarray
    w_bar: np.ndarray
    ambiguous_axes: tuple[bool, bool, bool]
    gap_ratios: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def ambiguous(self) -> bool:
        return any(self.ambiguous_axes)

    def degenerate(self, gap_tol: float = GAP_TOL) -> bool:
        return bool(np.any(self.gap_ratios < gap_tol))


@dataclass(frozen=True, eq=False)
class LocalFrame:
    v: np.ndarray
    eigenvalues: np.ndarray
    barycenter: np.ndarray
    degenerate: bool
    ambiguous_axes: tuple[bool, bool, bool]
    gap_ratios: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def ambiguous(self) -> bool:
        return any(self.ambiguous_axes)

    @property
    def clean(self) -> bool:
        return not (self.degenerate or self.ambiguous)


@dataclass(frozen=True, eq=False)
class AlignedNeighborhood:
    r: np.ndarray
    aligned: np.ndarray  # 3 x n_r
    source: NeighborSet
    degenerate: bool
    ambiguous_axes: tuple[bool, bool, bool]

    @property
    def clean(self) -> bool:
        return not (self.degenerate or any(self.ambiguous_axes))


def _orient(vecs, ref, threshold):
    """First-quadrant signs for eigenvector columns against reference vectors.

    ``vecs`` (..., 3, 3), ``ref`` (..., 3), ``threshold`` (...). Returns the
    re-signed frames and the (..., 3) ambiguity mask.
    """
    proj = np.einsum("...ik,...i->...k", vecs, ref)
    ambiguous = np.abs(proj) < threshold[..., None]
    flip = (proj < 0.0) & ~ambiguous
    return vecs * np.where(flip, -1.0, 1.0)[..., None, :], ambiguous


def weight_frame(
    weights: LayerWeights,
    sign_tol: float = SIGN_TOL,
    rank_tol: float = RANK_TOL,
    strict: bool = True,
) -> WeightFrame:
    """PCA frame of the weight points, oriented so that ``-wbar`` lies in the first octant.

    With ``strict=False`` no exception is raised; the best available frame is
    returned with the affected axes flagged instead.

    Raises
    ------
    RankDeficientWeights
        If the second eigenvalue of ``W~ W~^T`` is not above ``rank_tol``.
    ZeroBarycenter
        If ``|wbar| < sign_tol``; the fully flagged frame rides on the exception.
    """
    wt = weights.centered
    w_bar = weights.w_bar
    cov = wt @ wt.T
    evals, evecs, gaps = sym_eig3_batch(cov)
    if strict and not evals[1] > rank_tol:
        raise RankDeficientWeights(
            f"second weight eigenvalue {evals[1]:.3g} does not exceed rank_tol {rank_tol:.3g}"
        )
    norm = float(np.linalg.norm(w_bar))
    if norm < sign_tol:
        frame = WeightFrame(evecs, evals, w_bar, (True, True, True), gaps)
        if strict:
            raise ZeroBarycenter(f"|wbar| = {norm:.3g} is below sign_tol", frame)
        return frame
    u, amb = _orient(evecs, -w_bar, np.asarray(sign_tol * norm))
    return WeightFrame(u, evals, w_bar, tuple(bool(a) for a in amb), gaps)


def local_frames_batch(groups, query_points, sign_tol: float = SIGN_TOL, gap_tol: float = GAP_TOL):
    """Oriented PCA frames for many neighbourhoods at once.

    Parameters
    ----------
    groups : (..., K, 3) array
        Neighbour coordinates, padded duplicates included.
    query_points : (..., 3) array

    Returns
    -------
    dict with ``barycenter`` (..., 3), ``offsets`` (..., K, 3), ``v`` (..., 3, 3),
    ``eigenvalues`` (..., 3), ``gap_ratios`` (..., 2), ``degenerate`` (...) and
    ``ambiguous`` (..., 3).
    """
    groups = np.asarray(groups, dtype=np.float64)
    k = groups.shape[-2]
    bary = groups.sum(axis=-2) / k
    offsets = groups - bary[..., None, :]
    cov = np.einsum("...ki,...kj->...ij", offsets, offsets)
    cov = 0.5 * (cov + np.swapaxes(cov, -1, -2))
    evals, evecs, gaps = sym_eig3_batch(cov)
    d = np.asarray(query_points, dtype=np.float64) - bary
    dnorm = np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2 + d[..., 2] ** 2)
    rms = np.sqrt(np.maximum(cov[..., 0, 0] + cov[..., 1, 1] + cov[..., 2, 2], 0.0) / k)
    eps = _SCALE_EPS * rms + 1e-300
    v, amb = _orient(evecs, d, sign_tol * np.maximum(dnorm, eps))
    return {
        "barycenter": bary,
        "offsets": offsets,
        "v": v,
        "eigenvalues": evals,
        "gap_ratios": gaps,
        "degenerate": np.any(gaps < gap_tol, axis=-1),
        "ambiguous": amb,
    }


def local_frame(
    cloud: PointCloud,
    neighbors: NeighborSet,
    sign_tol: float = SIGN_TOL,
    gap_tol: float = GAP_TOL,
) -> LocalFrame:
    """Oriented PCA frame of one neighbourhood.

    The barycentre is the mean over all members, including the query and any
    padded duplicates. Degeneracy is a flag, never an error.
    """
    if len(neighbors) < 3:
        raise ValueError("a neighbourhood needs at least 3 members (after padding)")
    pts = cloud.points
    f = local_frames_batch(pts[list(neighbors.indices)], pts[neighbors.query_index], sign_tol, gap_tol)
    return LocalFrame(
        v=f["v"],
        eigenvalues=f["eigenvalues"],
        barycenter=f["barycenter"],
        degenerate=bool(f["degenerate"]),
        ambiguous_axes=tuple(bool(a) for a in f["ambiguous"]),
        gap_ratios=f["gap_ratios"],
    )


def alignment_rotation(wf: WeightFrame, lf: LocalFrame, order=DEFAULT_ORDER) -> np.ndarray:
    """``U P V_i^T``: local axis ``order[k]`` is sent to weight axis ``u_k``.

    With the default order this is ``U V_i^T``. The result is orthogonal but
    may be a reflection.
    """
    order = parse_order(order)
    return wf.u @ lf.v[:, list(order)].T


def align_neighborhood(
    cloud: PointCloud,
    neighbors: NeighborSet,
    wf: WeightFrame,
    cfg: WFAConfig = WFAConfig(),
) -> AlignedNeighborhood:
    lf = local_frame(cloud, neighbors, cfg.sign_tol, cfg.gap_tol)
    r = alignment_rotation(wf, lf, cfg.order)
    x = cloud.points[list(neighbors.indices)] - lf.barycenter
    return AlignedNeighborhood(r, r @ x.T, neighbors, lf.degenerate, lf.ambiguous_axes)


def align_groups(points, queries, nbr_idx, u, cfg: WFAConfig = WFAConfig()):
    """Vectorised alignment of many groups.

    Parameters
    ----------
    points : (..., n, 3) array
    queries : (..., Q) int array
    nbr_idx : (..., Q, K) int array
    u : (3, 3) weight frame, or None to skip alignment (centred coordinates only)

    Returns
    -------
    aligned : (..., Q, K, 3) array, rows are ``R_i (p_j - pbar_i)``
    clean : (..., Q) bool array, frames neither degenerate nor ambiguous
    frames : dict from :func:`local_frames_batch`
    """
    points = np.asarray(points, dtype=np.float64)
    lead = points.shape[:-2]
    flat_idx = nbr_idx.reshape(*lead, -1)
    groups = np.take_along_axis(points, flat_idx[..., None], axis=-2).reshape(*nbr_idx.shape, 3)
    qpts = np.take_along_axis(points, queries[..., None], axis=-2)
    f = local_frames_batch(groups, qpts, cfg.sign_tol, cfg.gap_tol)
    clean = ~(f["degenerate"] | f["ambiguous"].any(axis=-1))
    if u is None:
        return f["offsets"], clean, f
    local = np.einsum("...ki,...ij->...kj", f["offsets"], f["v"])
    aligned = local[..., list(cfg.order)] @ np.asarray(u).T
    return aligned, clean, f


def project_normals(normals, r) -> np.ndarray:
    """Express normals in the aligned frame: ``n -> r n``."""
    normals = np.asarray(normals, dtype=np.float64)
    return normals @ np.asarray(r, dtype=np.float64).T


def wfa_feature_layer(an: AlignedNeighborhood, weights: LayerWeights) -> np.ndarray:
    """First-layer response ``W~^T X'_i + b``, shape (d, n_r)."""
    x = np.asarray(an.aligned)
    if x.shape[0] != 3:
        raise ValueError(f"aligned coordinates must have 3 rows, got {x.shape}")
    return weights.centered.T @ x + weights.bias[:, None]


def random_layer_weights(rng: np.random.Generator, d: int = 64, offset: float = 0.5) -> LayerWeights:
    """Gaussian weight points with a non-zero barycentre, for tests and reports."""
    w = rng.normal(size=(3, d)) + offset * rng.normal(size=(3, 1))
    return LayerWeights(w, rng.normal(size=d) * 0.1)
