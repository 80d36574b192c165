"""Command-line entry point: ``wfalign <command> [flags]``.

Every command emits one JSON report carrying the tool version, the fully
resolved configuration and the seeds used, so a report is enough to rerun it.
Reports go to ``--out`` (with a short summary on stdout) or to stdout.

Exit codes: 0 ok, 2 bad flags or config, 3 I/O error, 4 a check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import PointCloud, derive_seed, make_rng
from .io import ParseError, UnsupportedPly, read_cloud, read_ply, write_ply
from .neighbors import NeighborSet, farthest_point_sample, group_radius
from .procrustes import brute_force_best_rotation, kabsch, verify_theorem1
from .synthdata import SHAPE_KINDS, LabeledDataset, ShapeSpec, gen_shape, make_dataset, random_rotations
from .toynet import (
    NetworkConfig,
    evaluate,
    gradcheck,
    load_checkpoint,
    random_small_config,
    save_checkpoint,
    summarize_errors,
    train,
)
from .wfa import (
    AXIS_ORDERS,
    LayerWeights,
    WFAConfig,
    align_groups,
    order_name,
    parse_order,
    random_layer_weights,
    weight_frame,
)

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_CHECK = 0, 2, 3, 4
ROTATION_MODES = ("none", "z", "arbitrary")


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    def __init__(self, report):
        super().__init__("check failed")
        self.report = report


# ---------------------------------------------------------------- library runs


def run_invariance(
    trials: int,
    seed: int = 0,
    radius: float = 0.3,
    neighbors: int = 16,
    queries: int = 32,
    weight_seed: int = 0,
    width: int = 64,
    order=(0, 1, 2),
    cloud: PointCloud | None = None,
    shape: str = "cone",
    points: int = 512,
) -> dict:
    """Rigidly move a cloud, rerun the aligned first layer, record output drift.

    Each trial draws a fresh cloud (unless ``cloud`` is given), weights, a
    Haar-random rotation and a Gaussian translation. Only queries whose frames
    are clean in both copies and whose neighbour sets coincide are compared.
    The first-layer output is ``W~^T X' + b`` evaluated for every group member.
    """
    cfg = WFAConfig(order=order)
    records, deviations = [], []
    for t in range(trials):
        rng = make_rng(seed, 0x1A, t)
        base = cloud
        if base is None:
            base = gen_shape(ShapeSpec(shape, points, noise_sigma=0.01, seed=derive_seed(seed, 0x1B, t)))
        weights = random_layer_weights(make_rng(weight_seed, t), d=width)
        wf = weight_frame(weights, cfg.sign_tol, cfg.rank_tol, strict=False)
        rot = random_rotations(rng, 1, "arbitrary")[0]
        shift = rng.normal(size=3)
        moved = PointCloud(base.points @ rot.T + shift)
        qs = np.array(farthest_point_sample(base, min(queries, len(base))))
        both = np.stack([base.points, moved.points])
        idx, _ = group_radius(both, np.stack([qs, qs]), radius, neighbors)
        aligned, clean, frames = align_groups(both, np.stack([qs, qs]), idx, wf.u, cfg)
        same = np.all(idx[0] == idx[1], axis=-1)
        features = aligned @ weights.centered + weights.bias  # (2, Q, K, d)
        dev = np.maximum(
            np.abs(aligned[0] - aligned[1]).max(axis=(1, 2)),
            np.abs(features[0] - features[1]).max(axis=(1, 2)),
        )
        keep = same & clean[0] & clean[1]
        deviations.extend(float(v) for v in dev[keep])
        worst = float(dev[keep].max()) if keep.any() else 0.0
        n_clean = int(keep.sum())
        n_changed = int((~same).sum())
        n_degenerate = int((same & (frames["degenerate"][0] | frames["degenerate"][1])).sum())
        amb = frames["ambiguous"].any(axis=-1)
        n_ambiguous = int((same & (amb[0] | amb[1])).sum())
        records.append(
            {
                "trial": t,
                "max_deviation": worst,
                "clean_queries": n_clean,
                "degenerate_queries": n_degenerate,
                "ambiguous_queries": n_ambiguous,
                "changed_neighborhoods": n_changed,
                "weight_frame_clean": not (wf.ambiguous or wf.degenerate(cfg.gap_tol)),
            }
        )
    return {
        "trials": records,
        "compared_queries": len(deviations),
        "degenerate_queries": sum(r["degenerate_queries"] for r in records),
        "ambiguous_queries": sum(r["ambiguous_queries"] for r in records),
        "max_deviation": max(deviations) if deviations else None,
        "median_deviation": float(np.median(deviations)) if deviations else None,
    }


def _centred(rng, n):
    x = rng.normal(size=(3, n)) * rng.uniform(0.2, 1.5, size=(3, 1))
    return x - x.mean(axis=1, keepdims=True)


def run_procrustes_check(
    instances: int = 100,
    samples: int = 100_000,
    seed: int = 0,
    points: int = 20,
    registration_samples: int = 2000,
) -> dict:
    """Kabsch against brute-force rotation sampling, plus registration-gap reports for the WFA rotation.

    Optimality passes on an instance when the Kabsch cost is at most the best
    sampled cost plus ``1e-10 * |X| |Y|``.
    """
    rows, gaps_constructed, gaps_random = [], [], []
    for i in range(instances):
        rng = make_rng(seed, 0x9C, i)
        x, y = _centred(rng, points), _centred(rng, points)
        scale2 = float(np.linalg.norm(x) * np.linalg.norm(y))
        k = kabsch(x, y)
        bf = brute_force_best_rotation(x, y, samples, seed=derive_seed(seed, 0x9D, i))
        rows.append(
            {
                "instance": i,
                "kabsch_cost": k.cost,
                "brute_force_cost": bf.cost,
                "pass": bool(k.cost <= bf.cost + 1e-10 * scale2),
            }
        )
        if registration_samples >= 0:
            pts = rng.normal(size=(points, 3)) * [1.0, 0.6, 0.3]
            cloud = PointCloud(pts)
            ns = NeighborSet(0, tuple(range(points)), float("inf"))
            bary = pts.mean(axis=0)
            local = (pts - bary).T - (pts[0] - bary)[:, None]
            rot = random_rotations(rng, 1, "arbitrary")[0]
            made = LayerWeights(rot @ local, np.zeros(points))
            gaps_constructed.append(verify_theorem1(cloud, ns, made, num_samples=registration_samples, seed=i)["gap"])
            rand_w = random_layer_weights(rng, d=points)
            gaps_random.append(verify_theorem1(cloud, ns, rand_w, num_samples=registration_samples, seed=i)["gap"])

    def dist(g):
        if not g:
            return None
        return {"min": float(np.min(g)), "median": float(np.median(g)), "max": float(np.max(g))}

    ok = all(r["pass"] for r in rows)
    return {
        "procrustes_optimality": "pass" if ok else "fail",
        "instances": rows,
        "registration": {
            "constructed_weights_gap": dist(gaps_constructed),
            "constructed_within_1e-9": bool(all(g <= 1e-9 for g in gaps_constructed)),
            "random_weights_gap": dist(gaps_random),
        },
    }


def run_gradcheck(configs: int = 10, seed: int = 0) -> dict:
    per, errors = [], []
    for i in range(configs):
        cfg = random_small_config(make_rng(seed, 0x6C0, i), seed=derive_seed(seed, 0x6C1, i) % 2**31)
        rep = gradcheck(cfg, seed=derive_seed(seed, 0x6C2, i) % 2**31, return_errors=True)
        errors.append(rep.pop("errors"))
        per.append({"config": cfg.to_dict(), **rep})
    total = summarize_errors(np.concatenate(errors)) if errors else None
    return {"configs": per, "overall": total}


def run_ablation(
    train_set: LabeledDataset,
    test_set: LabeledDataset,
    base: NetworkConfig,
    seeds,
    orders=AXIS_ORDERS,
    epochs: int = 40,
    lr: float = 1e-3,
    batch_size: int = 4,
    augment: str = "z",
    datasets=None,
) -> dict:
    """Train one model per (axis order, seed) and rank orders by mean AR-test accuracy.

    ``datasets`` may map a seed to its own ``(train, test)`` pair.
    """
    rows = []
    for order in orders:
        accs = []
        for s in seeds:
            tr, te = datasets[s] if datasets is not None else (train_set, test_set)
            cfg = NetworkConfig(**{**base.to_dict(), "axis_order": order, "seed": s})
            params, _ = train(cfg, tr, epochs, lr, batch_size, augment)
            accs.append(evaluate(params, te, "arbitrary", cfg, seed=s))
        rows.append({"order": order_name(order), "accuracy": accs, "mean_accuracy": float(np.mean(accs))})
    ranked = sorted(rows, key=lambda r: (-r["mean_accuracy"], AXIS_ORDERS.index(parse_order(r["order"]))))
    for rank, r in enumerate(ranked, start=1):
        r["rank"] = rank
    return {"rows": ranked}


# ---------------------------------------------------------------- datasets on disk


def write_dataset(out: Path, train_set: LabeledDataset, test_set: LabeledDataset) -> dict:
    files = []
    for ds in (train_set, test_set):
        counter = {}
        (out / ds.split).mkdir(parents=True, exist_ok=True)
        for (cloud, label), s in zip(ds.samples, ds.seeds):
            name = ds.class_names[label]
            i = counter.get(name, 0)
            counter[name] = i + 1
            rel = f"{ds.split}/{name}_{i:04d}.ply"
            write_ply(out / rel, cloud)
            files.append({"path": rel, "label": label, "class": name, "split": ds.split, "seed": s})
    return {"class_names": list(train_set.class_names), "files": files}


def read_dataset(directory: Path) -> tuple[LabeledDataset, LabeledDataset]:
    manifest = json.loads((directory / "manifest.json").read_text())
    parts = {"train": ([], []), "test": ([], [])}
    try:
        names = tuple(manifest["result"]["class_names"])
        entries = [(f["path"], int(f["label"]), f["split"], int(f["seed"])) for f in manifest["result"]["files"]]
    except (KeyError, TypeError, ValueError):
        raise ParseError(f"malformed manifest in {directory}") from None
    for path, label, split, seed in entries:
        samples, seeds = parts[split]
        samples.append((read_ply(directory / path), label))
        seeds.append(seed)
    return tuple(LabeledDataset(tuple(s), names, split, tuple(sd)) for split, (s, sd) in parts.items())


# ---------------------------------------------------------------- argument handling


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0 or not np.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def _fraction(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return v


def _order(text):
    try:
        return parse_order(text.replace(",", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _widths(text):
    try:
        widths = tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not widths or min(widths) < 1 or widths[0] < 3:
        raise argparse.ArgumentTypeError("widths must be positive and the first at least 3")
    return widths


def _add_common(p, out_help="write the JSON report here instead of stdout"):
    p.add_argument("--config", help="key=value file; explicit flags take precedence")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help=out_help)


def _add_data(p):
    g = p.add_argument_group("data")
    g.add_argument("--data", help="dataset directory written by gen-data")
    g.add_argument("--classes", type=_positive_int, default=len(SHAPE_KINDS))
    g.add_argument("--per-class", type=_positive_int, default=60)
    g.add_argument("--points", type=_positive_int, default=256)
    g.add_argument("--noise", type=float, default=0.01)
    g.add_argument("--train-fraction", type=_fraction, default=2.0 / 3.0)
    g.add_argument("--data-seed", type=int, default=100)


def _add_network(p):
    g = p.add_argument_group("network")
    g.add_argument("--queries", type=_positive_int, default=32)
    g.add_argument("--neighbors", type=_positive_int, default=16)
    g.add_argument("--radius", type=_positive_float, default=0.3)
    g.add_argument("--widths", type=_widths, default=(64, 128))
    g.add_argument("--order", type=_order, default=(0, 1, 2))
    g.add_argument("--no-wfa", action="store_true", help="feed raw centred coordinates (baseline)")


def _add_training(p):
    g = p.add_argument_group("training")
    g.add_argument("--epochs", type=_nonneg_int, default=40)
    g.add_argument("--lr", type=_positive_float, default=1e-3)
    g.add_argument("--batch-size", type=_positive_int, default=4)
    g.add_argument("--augment", choices=ROTATION_MODES, default="z")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wfalign", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"wfalign {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write a synthetic labelled dataset as PLY files")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--classes", type=_positive_int, default=len(SHAPE_KINDS))
    p.add_argument("--per-class", type=_positive_int, default=20)
    p.add_argument("--points", type=_positive_int, default=256)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--train-fraction", type=_fraction, default=0.8)
    p.add_argument("--normals", action="store_true")

    p = sub.add_parser("invariance-report", help="rotation-invariance sweep of the aligned first layer")
    _add_common(p)
    p.add_argument("--input", help="point cloud file (.ply, .xyz, .csv); default: generated shapes")
    p.add_argument("--shape", choices=SHAPE_KINDS, default="cone")
    p.add_argument("--points", type=_positive_int, default=512)
    p.add_argument("--trials", type=_nonneg_int, default=100)
    p.add_argument("--radius", type=_positive_float, default=0.3)
    p.add_argument("--neighbors", type=_positive_int, default=16)
    p.add_argument("--queries", type=_positive_int, default=32)
    p.add_argument("--weight-seed", type=int, default=0)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--order", type=_order, default=(0, 1, 2))

    p = sub.add_parser("procrustes-check", help="Kabsch optimality and registration-gap report")
    _add_common(p)
    p.add_argument("--instances", type=_positive_int, default=100)
    p.add_argument("--samples", type=_nonneg_int, default=100_000)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--registration-samples", type=_nonneg_int, default=2000)

    p = sub.add_parser("train", help="train the toy classifier")
    _add_common(p, "write the training report here instead of stdout")
    _add_data(p)
    _add_network(p)
    _add_training(p)
    p.add_argument("--checkpoint", help="write the trained parameters here")

    p = sub.add_parser("eval", help="evaluate a checkpoint under rotations")
    _add_common(p)
    _add_data(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--mode", choices=ROTATION_MODES, action="append", help="repeatable; default all modes")
    p.add_argument("--split", choices=("train", "test"), default="test")

    p = sub.add_parser("gradcheck", help="finite-difference check of the hand-written gradients")
    _add_common(p)
    p.add_argument("--configs", type=_positive_int, default=10)
    p.add_argument("--threshold", type=_positive_float, default=1e-3, help="worst-case relative error bound")

    p = sub.add_parser("ablation", help="accuracy for each axis-pairing order")
    _add_common(p)
    _add_data(p)
    _add_network(p)
    _add_training(p)
    p.add_argument("--seeds", type=_positive_int, default=1, help="number of seeds per order")
    p.add_argument("--orders", type=lambda t: tuple(_order(s) for s in t.split()), default=AXIS_ORDERS,
                   help="space-separated orders such as '123 321'")
    return parser


def _read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Keys use flag names."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = value
    return values


def _apply_config(parser: argparse.ArgumentParser, command: str, values: dict) -> None:
    """Fold config values into the sub-command defaults.

    One file may serve several commands: keys that belong only to other
    commands are skipped, keys no command knows are an error.
    """
    subs = parser._subparsers._group_actions[0].choices
    known = {a.dest for p in subs.values() for a in p._actions}
    sub = subs[command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        if key in ("config", "help") or key not in known:
            raise UsageError(f"unknown config key {key!r}")
        act = actions.get(key)
        if act is None:
            continue
        if isinstance(act, argparse._StoreTrueAction):
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} expects a boolean, got {value!r}")
            defaults[key] = low in ("true", "1", "yes")
        elif isinstance(act, argparse._AppendAction):
            defaults[key] = [v for v in value.replace(",", " ").split()]
        else:
            conv = act.type or str
            try:
                defaults[key] = conv(value)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
            if act.choices is not None and defaults[key] not in act.choices:
                raise UsageError(f"config key {key!r}: {value!r} not in {list(act.choices)}")
        act.required = False
    sub.set_defaults(**defaults)


def parse_args(argv):
    parser = build_parser()
    pre, _ = parser.parse_known_args(argv)
    if getattr(pre, "config", None):
        try:
            values = _read_config(pre.config)
        except OSError as exc:
            raise UsageError(f"cannot read config {pre.config}: {exc}") from None
        _apply_config(parser, pre.command, values)
    return parser.parse_args(argv)


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    return v


def _resolved(args) -> dict:
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("config", "out")}


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(args, report: dict, summary: str) -> None:
    text = _dump(report)
    target = getattr(args, "out", None)
    if target and args.command != "gen-data":
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(summary)
    else:
        sys.stdout.write(text)


def _report(args, seeds: dict, result: dict) -> dict:
    return {
        "tool": "wfalign",
        "version": __version__,
        "command": args.command,
        "config": _resolved(args),
        "seeds": seeds,
        "result": result,
    }


def _network_config(args) -> NetworkConfig:
    return NetworkConfig(
        num_queries=args.queries,
        neighbors_per_query=args.neighbors,
        radius=args.radius,
        hidden_widths=args.widths,
        num_classes=args.classes,
        axis_order=args.order,
        use_wfa=not args.no_wfa,
        seed=args.seed,
    )


def _dataset(args):
    if args.data:
        return read_dataset(Path(args.data))
    if args.classes > len(SHAPE_KINDS):
        raise UsageError(f"--classes must be at most {len(SHAPE_KINDS)}")
    spec = ShapeSpec(n_points=args.points, noise_sigma=args.noise)
    return make_dataset(args.per_class, spec, args.train_fraction, args.data_seed, SHAPE_KINDS[: args.classes])


# ---------------------------------------------------------------- commands


def cmd_gen_data(args) -> dict:
    if args.classes > len(SHAPE_KINDS):
        raise UsageError(f"--classes must be at most {len(SHAPE_KINDS)}")
    if args.points < 8:
        raise UsageError("--points must be at least 8")
    if args.noise < 0:
        raise UsageError("--noise must be non-negative")
    spec = ShapeSpec(n_points=args.points, noise_sigma=args.noise, with_normals=args.normals)
    tr, te = make_dataset(args.per_class, spec, args.train_fraction, args.seed, SHAPE_KINDS[: args.classes])
    out = Path(args.out)
    result = write_dataset(out, tr, te)
    report = _report(args, {"seed": args.seed, "sample_seeds": list(tr.seeds) + list(te.seeds)}, result)
    (out / "manifest.json").write_text(_dump(report), encoding="utf-8")
    sys.stdout.write(_dump(report))
    return report


def cmd_invariance_report(args) -> dict:
    if args.width < 3:
        raise UsageError("--width must be at least 3")
    cloud = read_cloud(args.input) if args.input else None
    result = run_invariance(
        args.trials, args.seed, args.radius, args.neighbors, args.queries,
        args.weight_seed, args.width, args.order, cloud, args.shape, args.points,
    )
    report = _report(args, {"seed": args.seed, "weight_seed": args.weight_seed}, result)
    dev = result["max_deviation"]
    _emit(args, report, f"compared {result['compared_queries']} queries, max deviation {dev}")
    return report


def cmd_procrustes_check(args) -> dict:
    if args.points < 3:
        raise UsageError("--points must be at least 3")
    result = run_procrustes_check(args.instances, args.samples, args.seed, args.points, args.registration_samples)
    report = _report(args, {"seed": args.seed}, result)
    _emit(args, report, f"procrustes_optimality: {result['procrustes_optimality']}")
    if result["procrustes_optimality"] != "pass":
        raise CheckFailed(report)
    return report


def cmd_train(args) -> dict:
    cfg = _network_config(args)
    tr, te = _dataset(args)
    params, rep = train(cfg, tr, args.epochs, args.lr, args.batch_size, args.augment, te, eval_seed=args.seed)
    if args.checkpoint:
        save_checkpoint(args.checkpoint, params, cfg, {"epochs": args.epochs, "version": __version__})
    result = {"network": cfg.to_dict(), **rep.to_dict()}
    report = _report(args, {"seed": args.seed, "data_seed": args.data_seed, "eval_seed": args.seed}, result)
    acc = ", ".join(f"{m} {a:.3f}" for m, a in rep.test_accuracy.items())
    _emit(args, report, f"test accuracy: {acc}")
    return report


def cmd_eval(args) -> dict:
    params, cfg, _ = load_checkpoint(args.checkpoint)
    args.classes = cfg.num_classes
    tr, te = _dataset(args)
    ds = te if args.split == "test" else tr
    modes = args.mode or list(ROTATION_MODES)
    result = {"accuracy": {m: evaluate(params, ds, m, cfg, args.seed) for m in modes}, "samples": len(ds)}
    report = _report(args, {"seed": args.seed, "data_seed": args.data_seed}, result)
    _emit(args, report, "accuracy: " + ", ".join(f"{m} {a:.3f}" for m, a in result["accuracy"].items()))
    return report


def cmd_gradcheck(args) -> dict:
    result = run_gradcheck(args.configs, args.seed)
    total = result["overall"]
    ok = total["max_rel_error"] <= args.threshold and total["fraction_within_1e-5"] >= 0.99
    result["pass"] = bool(ok)
    report = _report(args, {"seed": args.seed}, result)
    print(f"max rel err {total['max_rel_error']:.3e}, median {total['median_rel_error']:.3e}", file=sys.stderr)
    _emit(args, report, f"gradcheck {'pass' if ok else 'fail'}")
    if not ok:
        raise CheckFailed(report)
    return report


def cmd_ablation(args) -> dict:
    base = _network_config(args)
    tr, te = _dataset(args)
    seeds = [args.seed + i for i in range(args.seeds)]
    result = run_ablation(tr, te, base, seeds, args.orders, args.epochs, args.lr, args.batch_size, args.augment)
    report = _report(args, {"seeds": seeds, "data_seed": args.data_seed}, result)
    table = "\n".join(f"{r['rank']}  {r['order']}  {r['mean_accuracy']:.4f}" for r in result["rows"])
    _emit(args, report, "rank order mean_AR_accuracy\n" + table)
    return report


COMMANDS = {
    "gen-data": cmd_gen_data,
    "invariance-report": cmd_invariance_report,
    "procrustes-check": cmd_procrustes_check,
    "train": cmd_train,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "ablation": cmd_ablation,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"wfalign: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"wfalign {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CheckFailed:
        return EXIT_CHECK
    except (OSError, ParseError, UnsupportedPly, json.JSONDecodeError) as exc:
        print(f"wfalign {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
