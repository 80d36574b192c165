import numpy as np
import pytest

from wfalign.core import PointCloud, make_rng
from wfalign.synthdata import ShapeSpec, gen_shape, make_dataset, random_rotation
from wfalign.toynet import (
    NetworkConfig,
    NetworkParams,
    ShapeMismatch,
    TrainReport,
    evaluate,
    forward,
    forward_batch,
    gradcheck,
    init_params,
    load_checkpoint,
    loss_and_grad,
    random_small_config,
    save_checkpoint,
    train,
)
from wfalign.wfa import weight_frame

from conftest import rand_rot

SMALL = NetworkConfig(num_queries=16, neighbors_per_query=12, radius=0.35, hidden_widths=(16, 32), seed=3)


def clean_cloud(cfg, kinds=("cone", "cylinder", "torus", "cube"), start=0):
    for seed in range(start, start + 200):
        cloud = gen_shape(ShapeSpec(kinds[seed % len(kinds)], 256, 0.01, seed=seed))
        _, cache = forward(init_params(cfg), cloud, cfg)
        if cache.clean.all():
            return cloud
    raise AssertionError("no cloud with all frames clean")


def test_zero_params_zero_logits():
    p = init_params(SMALL).zeros_like()
    cloud = gen_shape(ShapeSpec("cone", 128))
    logits, _ = forward(p, cloud, SMALL, u=np.eye(3))
    np.testing.assert_array_equal(logits, np.zeros(SMALL.num_classes))


def test_init_frame_is_usable():
    for seed in range(10):
        cfg = NetworkConfig(seed=seed)
        wf = weight_frame(init_params(cfg).first_layer)
        assert not wf.ambiguous and not wf.degenerate()


def test_end_to_end_invariance(rng):
    p = init_params(SMALL)
    for start in (0, 50, 100):
        cloud = clean_cloud(SMALL, start=start)
        base, _ = forward(p, cloud, SMALL)
        for _ in range(5):
            moved = PointCloud(cloud.points @ rand_rot(rng).T + rng.normal(size=3))
            logits, cache = forward(p, moved, SMALL)
            assert cache.clean.all()
            assert np.abs(logits - base).max() <= 1e-9


def test_baseline_not_invariant():
    cfg = NetworkConfig(**{**SMALL.to_dict(), "use_wfa": False})
    p = init_params(cfg)
    cloud = gen_shape(ShapeSpec("cone", 256, seed=1))
    rx90 = np.array([[1.0, 0, 0], [0, 0, -1.0], [0, 1.0, 0]])
    a, _ = forward(p, cloud, cfg)
    b, _ = forward(p, PointCloud(cloud.points @ rx90.T), cfg)
    assert np.abs(a - b).max() > 1e-3


def test_too_few_points():
    with pytest.raises(ShapeMismatch):
        forward(init_params(SMALL), PointCloud(np.random.default_rng(0).normal(size=(8, 3))), SMALL)


def test_param_shape_check():
    p = init_params(SMALL)
    with pytest.raises(ShapeMismatch):
        forward(p, gen_shape(ShapeSpec("cube", 64)), NetworkConfig(hidden_widths=(8, 8)))


def test_uniform_logits_loss():
    p = init_params(SMALL)
    p.tensors["cls.w"][:] = 0.0
    clouds = [gen_shape(ShapeSpec("cube", 64, seed=s)).points for s in range(4)]
    labels = [0, 1, 1, 3]
    loss, grad = loss_and_grad(p, np.stack(clouds), labels, SMALL)
    assert loss == pytest.approx(np.log(SMALL.num_classes), abs=1e-12)
    expected = np.full(SMALL.num_classes, 1 / SMALL.num_classes) - np.bincount(labels, minlength=5) / 4
    np.testing.assert_allclose(grad.tensors["cls.b"], expected, atol=1e-15)
    assert all(np.all(np.isfinite(g)) for g in grad.tensors.values())


def test_sample_weight_doubling():
    p = init_params(SMALL)
    pts = np.stack([gen_shape(ShapeSpec("torus", 64, seed=s)).points for s in range(3)])
    l1, g1 = loss_and_grad(p, pts, [0, 2, 4], SMALL)
    l2, g2 = loss_and_grad(p, pts, [0, 2, 4], SMALL, sample_weights=[2.0, 2.0, 2.0])
    assert l2 == pytest.approx(2 * l1, rel=1e-14)
    for k in g1.tensors:
        np.testing.assert_allclose(g2.tensors[k], 2 * g1.tensors[k], rtol=1e-13, atol=1e-300)


def test_first_layer_gradient_sums_to_zero_per_row():
    # only the centred weights enter the layer, so shifting all weight points is a null direction
    p = init_params(SMALL)
    pts = np.stack([gen_shape(ShapeSpec("cone", 64, seed=s)).points for s in range(2)])
    _, g = loss_and_grad(p, pts, [1, 2], SMALL)
    assert np.abs(g.tensors["first.w"].sum(axis=1)).max() <= 1e-12


@pytest.mark.parametrize("i", range(3))
def test_gradcheck_random_configs(i):
    cfg = random_small_config(make_rng(42, i), seed=i)
    rep = gradcheck(cfg, seed=i)
    assert rep["fraction_within_1e-5"] >= 0.99
    assert rep["max_rel_error"] <= 1e-3


def tiny_data():
    return make_dataset(4, ShapeSpec(n_points=64), 0.5, seed=1)


TINY = NetworkConfig(num_queries=8, neighbors_per_query=8, radius=0.4, hidden_widths=(8, 16), seed=2)


def test_zero_epochs_returns_init():
    tr, _ = tiny_data()
    params, report = train(TINY, tr, 0)
    assert params == init_params(TINY)
    assert report.steps == 0


def test_training_deterministic():
    tr, te = tiny_data()
    p1, r1 = train(TINY, tr, 2, batch_size=4, test_set=te)
    p2, r2 = train(TINY, tr, 2, batch_size=4, test_set=te)
    assert p1 == p2
    assert r1 == r2 and r1.to_dict() == r2.to_dict()
    assert set(r1.test_accuracy) == {"none", "z", "arbitrary"}
    assert all(0 <= a <= 1 for a in r1.epoch_train_accuracy)


def test_training_reduces_loss():
    tr, _ = make_dataset(6, ShapeSpec(n_points=64), 1.0, seed=5)
    _, rep = train(TINY, tr, 8, lr=3e-3, batch_size=4)
    assert rep.epoch_loss[-1] < rep.epoch_loss[0]


def test_evaluate_none_equals_arbitrary():
    tr, te = make_dataset(6, ShapeSpec(n_points=128, noise_sigma=0.01), 0.5, seed=8)
    params = init_params(SMALL)
    assert evaluate(params, te, "none", SMALL) == evaluate(params, te, "arbitrary", SMALL, seed=4)


def test_checkpoint_roundtrip(tmp_path):
    params = init_params(SMALL)
    save_checkpoint(tmp_path / "m.ckpt", params, SMALL, {"epochs": 3})
    back, cfg, meta = load_checkpoint(tmp_path / "m.ckpt")
    assert back == params and cfg == SMALL and meta == {"epochs": 3}
    text = (tmp_path / "m.ckpt").read_text()
    assert text.startswith("WFALIGN-CHECKPOINT 1\n")
    save_checkpoint(tmp_path / "n.ckpt", back, cfg, meta)
    assert (tmp_path / "n.ckpt").read_text() == text


def test_checkpoint_rejects_garbage(tmp_path):
    (tmp_path / "bad").write_text("hello\n")
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "bad")
