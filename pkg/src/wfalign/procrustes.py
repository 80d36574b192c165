"""Orthogonal Procrustes, nearest-neighbour correspondences and point-to-point ICP.

Point sets are 3 x n matrices with one point per column and are assumed to be
centred already, so every alignment here is a pure rotation (or reflection).
The brute-force sampler is an independent oracle used to check the closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import PointCloud, make_rng
from .linalg3 import svd3
from .neighbors import NeighborSet
from .synthdata import random_rotations
from .wfa import (
    LayerWeights,
    WFAConfig,
    ZeroBarycenter,
    alignment_rotation,
    local_frame,
    weight_frame,
)

BRUTE_CHUNK = 8192


class TooFewPoints(ValueError):
    pass


@dataclass(frozen=True)
class CorrespondenceMap:
    pi: np.ndarray
    distances: np.ndarray  # squared


@dataclass(frozen=True, eq=False)
class AlignmentResult:
    r: np.ndarray
    cost: float
    iterations: int
    history: tuple[float, ...] = field(default=())


def _as_3n(x, name) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != 3:
        raise ValueError(f"{name} must have shape (3, n), got {x.shape}")
    return x


def residual_cost(source, target, r) -> float:
    """Sum of squared residuals ``|target_k - r source_k|^2`` for paired columns."""
    res = target - r @ source
    return float(np.sum(res * res))


def kabsch(source, target, proper: bool = False) -> AlignmentResult:
    """Orthogonal matrix maximising ``tr(R source target^T)``.

    With ``H = source target^T = U_H S V_H^T`` the optimum is ``V_H U_H^T``.
    By default reflections are allowed; ``proper=True`` flips the singular
    pair with the smallest singular value when needed to obtain det +1.

    Raises
    ------
    TooFewPoints
        If fewer than 3 column pairs are given.
    """
    source = _as_3n(source, "source")
    target = _as_3n(target, "target")
    if source.shape != target.shape:
        raise ValueError(f"source {source.shape} and target {target.shape} must pair up")
    if source.shape[1] < 3:
        raise TooFewPoints(f"need at least 3 points, got {source.shape[1]}")
    f = svd3(source @ target.T)
    v = f.v
    if proper and np.linalg.det(v @ f.u.T) < 0:
        v = v.copy()
        v[:, 2] = -v[:, 2]
    r = v @ f.u.T
    return AlignmentResult(r, residual_cost(source, target, r), 1)


def nearest_correspondence(source, target, r=None) -> CorrespondenceMap:
    """For each source column ``k``, the target column nearest to ``r source_k``.

    Ties go to the smallest target index.
    """
    source = _as_3n(source, "source")
    target = _as_3n(target, "target")
    moved = source if r is None else np.asarray(r) @ source
    diff = target[:, None, :] - moved[:, :, None]
    d2 = diff[0] ** 2 + diff[1] ** 2 + diff[2] ** 2
    pi = np.argmin(d2, axis=1)
    return CorrespondenceMap(pi, d2[np.arange(d2.shape[0]), pi])


def icp(
    source,
    target,
    max_iters: int = 50,
    cost_tol: float = 1e-12,
    r0=None,
    proper: bool = False,
) -> AlignmentResult:
    """Point-to-point ICP over rotations, alternating correspondences and Kabsch.

    Starts from ``r0`` (identity by default) and stops when the relative cost
    improvement drops below ``cost_tol`` or after ``max_iters`` Kabsch steps.
    A step that would raise the cost is rejected, so ``history`` never increases.
    """
    source = _as_3n(source, "source")
    target = _as_3n(target, "target")
    if source.shape[1] < 3 or target.shape[1] < 3:
        raise TooFewPoints("ICP needs at least 3 source and 3 target points")
    r = np.eye(3) if r0 is None else np.asarray(r0, dtype=np.float64).copy()
    corr = nearest_correspondence(source, target, r)
    cost = float(corr.distances.sum())
    history = [cost]
    it = 0
    while it < max_iters:
        it += 1
        step = kabsch(source, target[:, corr.pi], proper=proper)
        new_corr = nearest_correspondence(source, target, step.r)
        new_cost = float(new_corr.distances.sum())
        if new_cost > cost:
            break
        improvement = (cost - new_cost) / cost if cost > 0 else 0.0
        r, corr, cost = step.r, new_corr, new_cost
        history.append(cost)
        if improvement < cost_tol:
            break
    return AlignmentResult(r, cost, it, tuple(history))


def _chunked_rotations(seed: int, num_samples: int):
    for start in range(0, num_samples, BRUTE_CHUNK):
        rng = make_rng(seed, 0xB0, start // BRUTE_CHUNK)
        yield random_rotations(rng, min(BRUTE_CHUNK, num_samples - start), "arbitrary")


def brute_force_best_rotation(source, target, num_samples: int, seed: int = 0) -> AlignmentResult:
    """Best of the identity and ``num_samples`` uniformly random rotations for paired columns.

    Residuals are evaluated directly, without the trace identity, so this stays
    independent of :func:`kabsch`.
    """
    source = _as_3n(source, "source")
    target = _as_3n(target, "target")
    best_r = np.eye(3)
    best = residual_cost(source, target, best_r)
    for rots in _chunked_rotations(seed, num_samples):
        res = target[None] - rots @ source[None]
        costs = np.sum(res * res, axis=(1, 2))
        k = int(np.argmin(costs))
        if costs[k] < best:
            best, best_r = float(costs[k]), rots[k]
    return AlignmentResult(best_r, best, num_samples)


def nn_objective(source, target, r) -> float:
    """``sum_k min_j |target_j - r source_k|^2``: the registration objective with re-computed matches."""
    return float(nearest_correspondence(source, target, r).distances.sum())


def _brute_nn_best(source, target, num_samples, seed):
    best_r, best = np.eye(3), nn_objective(source, target, np.eye(3))
    for rots in _chunked_rotations(seed, num_samples):
        moved = rots @ source[None]  # (S, 3, n)
        diff = target[None, :, None, :] - moved[:, :, :, None]  # (S, 3, n, m)
        d2 = np.sum(diff * diff, axis=1).min(axis=2).sum(axis=1)
        k = int(np.argmin(d2))
        if d2[k] < best:
            best, best_r = float(d2[k]), rots[k]
    return best_r, best


def verify_theorem1(
    cloud: PointCloud,
    neighbors: NeighborSet,
    weights: LayerWeights,
    cfg: WFAConfig = WFAConfig(),
    num_samples: int = 2000,
    seed: int = 0,
    tol: float = 1e-9,
) -> dict:
    """How close the WFA rotation comes to minimising the registration objective.

    The source set is the centred neighbourhood, the target set the centred
    weight points, matched by nearest neighbour under the candidate rotation.
    The WFA rotation is compared against ICP started from it and against the
    best of ``num_samples`` random rotations. ``gap`` is the WFA objective minus
    the best objective found; it is reported rather than asserted to be zero.
    """
    flags = {"zero_barycenter": False}
    try:
        wf = weight_frame(weights, cfg.sign_tol, cfg.rank_tol)
    except ZeroBarycenter as exc:
        wf = exc.frame
        flags["zero_barycenter"] = True
    lf = local_frame(cloud, neighbors, cfg.sign_tol, cfg.gap_tol)
    r_wfa = alignment_rotation(wf, lf, cfg.order)
    x = (cloud.points[list(neighbors.indices)] - lf.barycenter).T
    w = weights.centered
    scale2 = max(float(np.sum(x * x)), float(np.sum(w * w)) * x.shape[1] / w.shape[1], 1e-300)

    obj_wfa = nn_objective(x, w, r_wfa)
    refined = icp(x, w, max_iters=100, cost_tol=1e-14, r0=r_wfa)
    _, obj_brute = _brute_nn_best(x, w, num_samples, seed)
    best = min(obj_wfa, refined.cost, obj_brute)
    gap = obj_wfa - best
    return {
        "objective_wfa": obj_wfa,
        "objective_icp": refined.cost,
        "objective_brute_force": obj_brute,
        "best_objective": best,
        "gap": gap,
        "relative_gap": gap / scale2,
        "within_tol": bool(gap <= tol * scale2),
        "icp_iterations": refined.iterations,
        "num_samples": num_samples,
        "r_wfa": r_wfa.tolist(),
        "det_r_wfa": float(np.linalg.det(r_wfa)),
        "local_degenerate": lf.degenerate,
        "local_ambiguous_axes": list(lf.ambiguous_axes),
        "weight_ambiguous_axes": list(wf.ambiguous_axes),
        **flags,
    }
