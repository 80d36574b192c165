"""A small point classifier whose first layer is weight-feature aligned.

Pipeline per cloud: farthest point sampling picks the query points, each query
gets a fixed-width radius group, the group is aligned into the weight frame
and fed through a shared per-point MLP, features are max-pooled per group and
then over groups, and a linear layer produces class logits.

Gradients are written out by hand. The weight frame ``U`` and the local frames
``V_i`` are treated as constants of a step: they are recomputed on every
forward pass but no gradient flows through the eigendecompositions.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import PointCloud, make_rng
from .neighbors import fps_batch, group_radius
from .synthdata import LabeledDataset, random_rotations
from .wfa import (
    DEFAULT_ORDER,
    GAP_TOL,
    SIGN_TOL,
    LayerWeights,
    WFAConfig,
    align_groups,
    parse_order,
    weight_frame,
)

CHECKPOINT_MAGIC = "WFALIGN-CHECKPOINT"
CHECKPOINT_VERSION = 1
MAX_INIT_REDRAWS = 100


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class NetworkConfig:
    num_queries: int = 32
    neighbors_per_query: int = 16
    radius: float = 0.3
    hidden_widths: tuple[int, ...] = (64, 128)
    num_classes: int = 5
    axis_order: tuple[int, int, int] = DEFAULT_ORDER
    use_wfa: bool = True
    seed: int = 0
    sign_tol: float = SIGN_TOL
    gap_tol: float = GAP_TOL
    scale_by_radius: bool = True

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(int(w) for w in self.hidden_widths))
        object.__setattr__(self, "axis_order", parse_order(self.axis_order))
        counts = (self.num_queries, self.neighbors_per_query, self.num_classes, *self.hidden_widths)
        if not self.hidden_widths or min(counts) < 1:
            raise ValueError("all counts must be >= 1 and at least one hidden layer is required")
        if self.hidden_widths[0] < 3:
            raise ValueError("the aligned layer needs at least 3 weight points")
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def wfa(self) -> WFAConfig:
        return WFAConfig(sign_tol=self.sign_tol, gap_tol=self.gap_tol, order=self.axis_order)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_widths"] = list(self.hidden_widths)
        d["axis_order"] = list(self.axis_order)
        return d


class NetworkParams:
    """Named parameter arrays.

    ``first.w`` (3, d0) / ``first.b`` (d0,) form the aligned layer, ``mlp{i}.w``
    / ``mlp{i}.b`` the following per-point layers and ``cls.w`` / ``cls.b`` the
    classifier.
    """

    def __init__(self, tensors: dict[str, np.ndarray]):
        self.tensors = {k: np.array(v, dtype=np.float64) for k, v in tensors.items()}

    @property
    def first_layer(self) -> LayerWeights:
        return LayerWeights(self.tensors["first.w"], self.tensors["first.b"])

    @property
    def num_mlp(self) -> int:
        return sum(1 for k in self.tensors if k.startswith("mlp") and k.endswith(".w"))

    def copy(self) -> "NetworkParams":
        return NetworkParams({k: v.copy() for k, v in self.tensors.items()})

    def zeros_like(self) -> "NetworkParams":
        return NetworkParams({k: np.zeros_like(v) for k, v in self.tensors.items()})

    def flat(self) -> np.ndarray:
        return np.concatenate([v.ravel() for v in self.tensors.values()])

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkParams) or self.tensors.keys() != other.tensors.keys():
            return False
        return all(np.array_equal(v, other.tensors[k]) for k, v in self.tensors.items())

    __hash__ = None

    def check(self, cfg: NetworkConfig) -> None:
        widths = cfg.hidden_widths
        expected = {"first.w": (3, widths[0]), "first.b": (widths[0],)}
        for i in range(len(widths) - 1):
            expected[f"mlp{i}.w"] = (widths[i], widths[i + 1])
            expected[f"mlp{i}.b"] = (widths[i + 1],)
        expected["cls.w"] = (widths[-1], cfg.num_classes)
        expected["cls.b"] = (cfg.num_classes,)
        got = {k: v.shape for k, v in self.tensors.items()}
        if got != expected:
            raise ShapeMismatch(f"parameter shapes {got} do not match config {expected}")
        if not all(np.all(np.isfinite(v)) for v in self.tensors.values()):
            raise ValueError("parameters must be finite")


def _glorot(rng, fan_in, fan_out, shape):
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=shape)


def init_params(cfg: NetworkConfig) -> NetworkParams:
    """Glorot-uniform weights and zero biases.

    The aligned layer is redrawn until its weight frame is full rank,
    non-degenerate and has a usable barycentre.
    """
    rng = make_rng(cfg.seed, 0x11)
    widths = cfg.hidden_widths
    for _ in range(MAX_INIT_REDRAWS):
        w0 = _glorot(rng, 3, widths[0], (3, widths[0]))
        wf = weight_frame(LayerWeights(w0, np.zeros(widths[0])), cfg.sign_tol, strict=False)
        if not wf.degenerate(cfg.gap_tol) and not wf.ambiguous:
            break
    else:
        raise RuntimeError("could not draw a non-degenerate first layer")
    t = {"first.w": w0, "first.b": np.zeros(widths[0])}
    for i in range(len(widths) - 1):
        t[f"mlp{i}.w"] = _glorot(rng, widths[i], widths[i + 1], (widths[i], widths[i + 1]))
        t[f"mlp{i}.b"] = np.zeros(widths[i + 1])
    t["cls.w"] = _glorot(rng, widths[-1], cfg.num_classes, (widths[-1], cfg.num_classes))
    t["cls.b"] = np.zeros(cfg.num_classes)
    return NetworkParams(t)


def current_frame(params: NetworkParams, cfg: NetworkConfig) -> np.ndarray:
    """Weight frame ``U`` for the current first layer (never raises)."""
    return weight_frame(params.first_layer, cfg.sign_tol, strict=False).u


def _as_batch(clouds) -> np.ndarray:
    if isinstance(clouds, PointCloud):
        return clouds.points[None]
    if isinstance(clouds, np.ndarray):
        return clouds[None] if clouds.ndim == 2 else clouds
    return np.stack([c.points for c in clouds])


@dataclass
class ForwardCache:
    x: np.ndarray  # (B, Q, K, 3) first-layer input
    pre: list  # pre-activations per per-point layer
    post: list  # activations per per-point layer
    arg_k: np.ndarray  # (B, Q, dL) argmax over group members
    arg_q: np.ndarray  # (B, dL) argmax over groups
    pooled: np.ndarray  # (B, dL)
    clean: np.ndarray  # (B, Q) frames neither degenerate nor ambiguous
    queries: np.ndarray
    groups: np.ndarray
    u: np.ndarray | None


def forward_batch(params: NetworkParams, points, cfg: NetworkConfig, u=None):
    """Logits (B, C) for a batch of clouds (B, n, 3), plus the cache for :func:`backward`.

    ``u`` freezes the weight frame; by default it is computed from ``params``.
    """
    params.check(cfg)
    points = _as_batch(points).astype(np.float64, copy=False)
    if points.shape[1] < cfg.num_queries:
        raise ShapeMismatch(f"cloud has {points.shape[1]} points, fewer than {cfg.num_queries} queries")
    t = params.tensors
    if cfg.use_wfa and u is None:
        u = current_frame(params, cfg)
    if not cfg.use_wfa:
        u = None
    queries = fps_batch(points, cfg.num_queries, 0)
    groups, _ = group_radius(points, queries, cfg.radius, cfg.neighbors_per_query)
    x, clean, _ = align_groups(points, queries, groups, u, cfg.wfa)
    if cfg.scale_by_radius:
        x = x / cfg.radius

    w0 = t["first.w"]
    w_tilde = w0 - w0.mean(axis=1, keepdims=True)
    pre = [x @ w_tilde + t["first.b"]]
    post = [np.maximum(pre[0], 0.0)]
    for i in range(params.num_mlp):
        pre.append(post[-1] @ t[f"mlp{i}.w"] + t[f"mlp{i}.b"])
        post.append(np.maximum(pre[-1], 0.0))
    feat = post[-1]  # (B, Q, K, dL)
    arg_k = np.argmax(feat, axis=2)
    group_feat = np.take_along_axis(feat, arg_k[:, :, None, :], axis=2)[:, :, 0, :]
    arg_q = np.argmax(group_feat, axis=1)
    pooled = np.take_along_axis(group_feat, arg_q[:, None, :], axis=1)[:, 0, :]
    logits = pooled @ t["cls.w"] + t["cls.b"]
    return logits, ForwardCache(x, pre, post, arg_k, arg_q, pooled, clean, queries, groups, u)


def forward(params: NetworkParams, cloud: PointCloud, cfg: NetworkConfig, u=None):
    """Logits (C,) for one cloud and the forward cache."""
    logits, cache = forward_batch(params, cloud.points[None], cfg, u)
    return logits[0], cache


def backward(params: NetworkParams, cache: ForwardCache, dlogits: np.ndarray) -> NetworkParams:
    """Reverse-mode pass from ``dL/dlogits`` (B, C) to parameter gradients.

    Max pools route the gradient to their arg-max (smallest index on ties).
    """
    t = params.tensors
    g = {}
    g["cls.w"] = cache.pooled.T @ dlogits
    g["cls.b"] = dlogits.sum(axis=0)
    d_pooled = dlogits @ t["cls.w"].T  # (B, dL)

    b, q, k, dl = cache.post[-1].shape
    d_group = np.zeros((b, q, dl))
    np.put_along_axis(d_group, cache.arg_q[:, None, :], d_pooled[:, None, :], axis=1)
    d_act = np.zeros((b, q, k, dl))
    np.put_along_axis(d_act, cache.arg_k[:, :, None, :], d_group[:, :, None, :], axis=2)

    for i in reversed(range(params.num_mlp)):
        dz = d_act * (cache.pre[i + 1] > 0.0)
        prev = cache.post[i]
        g[f"mlp{i}.w"] = prev.reshape(-1, prev.shape[-1]).T @ dz.reshape(-1, dz.shape[-1])
        g[f"mlp{i}.b"] = dz.sum(axis=(0, 1, 2))
        d_act = dz @ t[f"mlp{i}.w"].T

    dz = d_act * (cache.pre[0] > 0.0)
    d_w_tilde = cache.x.reshape(-1, 3).T @ dz.reshape(-1, dz.shape[-1])
    # w~_k = w_k - mean_m w_m
    g["first.w"] = d_w_tilde - d_w_tilde.mean(axis=1, keepdims=True)
    g["first.b"] = dz.sum(axis=(0, 1, 2))
    return NetworkParams({name: g[name] for name in t})


def softmax_xent(logits, labels, sample_weights=None):
    """Mean weighted cross-entropy and its gradient with respect to the logits."""
    b = logits.shape[0]
    w = np.ones(b) if sample_weights is None else np.asarray(sample_weights, dtype=np.float64)
    shifted = logits - logits.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1))
    logp = shifted - logz[:, None]
    rows = np.arange(b)
    loss = float(np.sum(-logp[rows, labels] * w) / b)
    d = np.exp(logp)
    d[rows, labels] -= 1.0
    return loss, d * (w / b)[:, None]


def loss_and_grad(params, clouds, labels, cfg: NetworkConfig, sample_weights=None, u=None):
    """Softmax cross-entropy over a labelled batch and its gradient.

    Returns ``(loss, grad)`` where ``grad`` is a :class:`NetworkParams` shaped
    like ``params``. Frames are frozen (see module docstring).
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min() < 0 or labels.max() >= cfg.num_classes:
        raise ValueError("labels out of range")
    logits, cache = forward_batch(params, clouds, cfg, u)
    if logits.shape[0] != labels.shape[0]:
        raise ShapeMismatch(f"{logits.shape[0]} clouds but {labels.shape[0]} labels")
    loss, dlogits = softmax_xent(logits, labels, sample_weights)
    return loss, backward(params, cache, dlogits)


def loss_only(params, clouds, labels, cfg: NetworkConfig, u=None) -> float:
    logits, _ = forward_batch(params, clouds, cfg, u)
    return softmax_xent(logits, np.asarray(labels, dtype=np.int64))[0]


def _pool_margin(values: np.ndarray, inputs: np.ndarray) -> float:
    """Smallest gap between a positive pooled maximum and its runner-up.

    ``values`` (N, M, C) are pooled over M; ``inputs`` (N, M, F) identify the
    candidates. Competitors whose input is bitwise identical to the winner's
    (padded duplicates) compute the same function and are not real ties.
    """
    n, _, c = values.shape
    arg = np.argmax(values, axis=1)  # (N, C)
    top = np.take_along_axis(values, arg[:, None, :], axis=1)[:, 0, :]
    winner = inputs[np.arange(n)[:, None], arg]  # (N, C, F)
    same = np.all(inputs[:, :, None, :] == winner[:, None, :, :], axis=-1)  # (N, M, C)
    runner_up = np.where(same, -np.inf, values).max(axis=1)
    gap = np.where(top > 0.0, top - runner_up, np.inf)
    return float(gap.min()) if gap.size else np.inf


def probe_margin(cache: ForwardCache) -> float:
    """Distance of a forward pass from ReLU kinks and max-pool switches."""
    m = min(float(np.abs(p).min()) for p in cache.pre)
    b, q, k, _ = cache.x.shape
    feat = cache.post[-1]
    c = feat.shape[-1]
    m = min(m, _pool_margin(feat.reshape(b * q, k, c), cache.x.reshape(b * q, k, 3)))
    group_feat = np.take_along_axis(feat, cache.arg_k[:, :, None, :], axis=2)[:, :, 0, :]
    m = min(m, _pool_margin(group_feat, cache.x.reshape(b, q, k * 3)))
    return m


def random_small_config(rng: np.random.Generator, seed: int = 0) -> NetworkConfig:
    """A small random architecture for gradient checks."""
    depth = int(rng.integers(1, 3))
    widths = tuple(int(w) for w in rng.integers(3, 12, size=depth))
    return NetworkConfig(
        num_queries=int(rng.integers(4, 10)),
        neighbors_per_query=int(rng.integers(4, 10)),
        radius=float(rng.uniform(0.3, 0.6)),
        hidden_widths=widths,
        num_classes=int(rng.integers(2, 6)),
        axis_order=tuple(int(a) for a in rng.permutation(3)),
        use_wfa=bool(rng.random() < 0.7),
        seed=seed,
    )


def gradcheck(
    cfg: NetworkConfig,
    batch_size: int = 2,
    n_points: int = 96,
    seed: int = 0,
    margin: float = 1e-4,
    floor: float = 1e-6,
    max_redraws: int = 100,
    return_errors: bool = False,
) -> dict:
    """Compare :func:`loss_and_grad` with central finite differences.

    The probe batch (random shapes under random rotations, random labels and
    random biases) is redrawn until every ReLU pre-activation and every max-pool
    decision is at least ``margin`` away from switching. The weight frame is
    frozen at its value for the unperturbed parameters in both paths. The step
    for coordinate ``theta`` is ``1e-6 * max(1, |theta|)``; the relative error
    is ``|a - n| / max(|a|, |n|, floor)``.
    """
    from .synthdata import SHAPE_KINDS, ShapeSpec, gen_shape

    base = init_params(cfg)
    for attempt in range(max_redraws):
        rng = make_rng(seed, 0x6C, attempt)
        params = base.copy()
        for name, arr in params.tensors.items():
            if name.endswith(".b"):
                arr += 0.1 * rng.normal(size=arr.shape)
        kinds = rng.integers(0, len(SHAPE_KINDS), size=batch_size)
        clouds = [
            gen_shape(ShapeSpec(SHAPE_KINDS[k], n_points, 0.02, seed=int(rng.integers(2**31)))).points
            for k in kinds
        ]
        pts = rotate_batch(np.stack(clouds), rng, "arbitrary")
        labels = rng.integers(0, cfg.num_classes, size=batch_size)
        u = current_frame(params, cfg) if cfg.use_wfa else None
        _, cache = forward_batch(params, pts, cfg, u)
        if probe_margin(cache) >= margin:
            break
    else:
        raise RuntimeError(f"no probe batch with margin {margin} after {max_redraws} draws")

    _, grad = loss_and_grad(params, pts, labels, cfg, u=u)
    errors = []
    for name, arr in params.tensors.items():
        g = grad.tensors[name]
        for idx in np.ndindex(arr.shape):
            theta = arr[idx]
            h = 1e-6 * max(1.0, abs(theta))
            arr[idx] = theta + h
            lp = loss_only(params, pts, labels, cfg, u)
            arr[idx] = theta - h
            lm = loss_only(params, pts, labels, cfg, u)
            arr[idx] = theta
            num = (lp - lm) / (2.0 * h)
            errors.append(abs(g[idx] - num) / max(abs(g[idx]), abs(num), floor))
    errors = np.array(errors)
    report = summarize_errors(errors)
    report.update(probe_redraws=attempt, margin=margin, floor=floor)
    if return_errors:
        report["errors"] = errors
    return report


def summarize_errors(errors: np.ndarray) -> dict:
    return {
        "coordinates": int(errors.size),
        "max_rel_error": float(errors.max()),
        "median_rel_error": float(np.median(errors)),
        "fraction_within_1e-5": float(np.mean(errors <= 1e-5)),
    }


@dataclass
class TrainReport:
    epoch_loss: list = field(default_factory=list)
    epoch_train_accuracy: list = field(default_factory=list)
    test_accuracy: dict = field(default_factory=dict)
    steps: int = 0
    wall_clock: float = field(default=0.0, compare=False)

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "epoch_loss": list(self.epoch_loss),
            "epoch_train_accuracy": list(self.epoch_train_accuracy),
            "test_accuracy": dict(self.test_accuracy),
            "steps": self.steps,
        }
        if include_timing:
            d["wall_clock"] = self.wall_clock
        return d


class Adam:
    def __init__(self, params: NetworkParams, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = params.zeros_like().tensors
        self.v = params.zeros_like().tensors
        self.t = 0

    def step(self, params: NetworkParams, grad: NetworkParams) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for k, p in params.tensors.items():
            gk = grad.tensors[k]
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * gk
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * gk * gk
            p -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def predict(params: NetworkParams, points: np.ndarray, cfg: NetworkConfig, chunk: int = 64) -> np.ndarray:
    out = []
    for s in range(0, points.shape[0], chunk):
        logits, _ = forward_batch(params, points[s : s + chunk], cfg)
        out.append(np.argmax(logits, axis=1))
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def rotate_batch(points: np.ndarray, rng: np.random.Generator, mode: str) -> np.ndarray:
    if mode == "none":
        return points
    rots = random_rotations(rng, points.shape[0], mode)
    return np.einsum("bij,bnj->bni", rots, points)


_MODE_STREAM = {"none": 0, "z": 1, "z_only": 1, "arbitrary": 2}


def evaluate(params, dataset: LabeledDataset, rotation_mode: str, cfg: NetworkConfig, seed: int = 0) -> float:
    """Accuracy on ``dataset`` with one random rotation per sample.

    ``rotation_mode`` is ``none``, ``z`` (about the vertical axis) or ``arbitrary``.
    """
    if len(dataset) == 0:
        return 0.0
    rng = make_rng(seed, 0xE7, _MODE_STREAM[rotation_mode])
    pts = rotate_batch(dataset.stacked_points(), rng, rotation_mode)
    pred = predict(params, pts, cfg)
    return float(np.mean(pred == dataset.labels))


def train(
    cfg: NetworkConfig,
    dataset: LabeledDataset,
    epochs: int,
    lr: float = 1e-3,
    batch_size: int = 16,
    augment: str = "z",
    test_set: LabeledDataset | None = None,
    eval_seed: int = 0,
    params: NetworkParams | None = None,
    log=None,
) -> tuple[NetworkParams, TrainReport]:
    """Mini-batch Adam training with per-sample rotation augmentation.

    The weight frame is recomputed from the current first layer at the start
    of every step. Deterministic for a given ``cfg.seed``.
    """
    if len(dataset) == 0:
        raise ValueError("empty training set")
    start = time.perf_counter()
    params = init_params(cfg) if params is None else params.copy()
    opt = Adam(params, lr=lr)
    report = TrainReport()
    pts_all = dataset.stacked_points()
    labels_all = dataset.labels
    n = len(dataset)
    for epoch in range(epochs):
        rng = make_rng(cfg.seed, 0x7A, epoch)
        perm = rng.permutation(n)
        total, correct = 0.0, 0
        for s in range(0, n, batch_size):
            idx = perm[s : s + batch_size]
            pts = rotate_batch(pts_all[idx], rng, augment)
            logits, cache = forward_batch(params, pts, cfg)
            loss, dlogits = softmax_xent(logits, labels_all[idx])
            grad = backward(params, cache, dlogits)
            opt.step(params, grad)
            report.steps += 1
            total += loss * len(idx)
            correct += int(np.sum(np.argmax(logits, axis=1) == labels_all[idx]))
        report.epoch_loss.append(total / n)
        report.epoch_train_accuracy.append(correct / n)
        if log is not None:
            log(f"epoch {epoch + 1}/{epochs} loss {total / n:.4f} train acc {correct / n:.3f}")
    if test_set is not None and len(test_set):
        for mode in ("none", "z", "arbitrary"):
            report.test_accuracy[mode] = evaluate(params, test_set, mode, cfg, eval_seed)
    report.wall_clock = time.perf_counter() - start
    return params, report


def save_checkpoint(path, params: NetworkParams, cfg: NetworkConfig, extra: dict | None = None) -> None:
    """Text checkpoint; see README for the layout."""
    lines = [f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}"]
    lines.append("config " + json.dumps(cfg.to_dict(), sort_keys=True))
    if extra:
        lines.append("meta " + json.dumps(extra, sort_keys=True))
    for name, arr in params.tensors.items():
        lines.append(f"tensor {name} {arr.ndim} " + " ".join(str(s) for s in arr.shape))
        lines.append(" ".join("%.17g" % v for v in arr.ravel()))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(path) -> tuple[NetworkParams, NetworkConfig, dict]:
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    head = lines[0].split() if lines else []
    if len(head) != 2 or head[0] != CHECKPOINT_MAGIC:
        raise ValueError("not a wfalign checkpoint")
    if int(head[1]) != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {head[1]}")
    cfg, meta, tensors = None, {}, {}
    i = 1
    while i < len(lines):
        line = lines[i]
        if line.startswith("config "):
            cfg = NetworkConfig(**json.loads(line[len("config ") :]))
        elif line.startswith("meta "):
            meta = json.loads(line[len("meta ") :])
        elif line.startswith("tensor "):
            tok = line.split()
            name, ndim = tok[1], int(tok[2])
            shape = tuple(int(s) for s in tok[3 : 3 + ndim])
            i += 1
            values = np.array([float(v) for v in lines[i].split()]) if lines[i].strip() else np.zeros(0)
            if values.size != int(np.prod(shape)):
                raise ValueError(f"tensor {name}: expected {np.prod(shape)} values, got {values.size}")
            tensors[name] = values.reshape(shape)
        elif line.strip():
            raise ValueError(f"line {i + 1}: unrecognised checkpoint record")
        i += 1
    if cfg is None:
        raise ValueError("checkpoint has no config record")
    params = NetworkParams(tensors)
    params.check(cfg)
    return params, cfg, meta
