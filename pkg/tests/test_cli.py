import json

import numpy as np
import pytest

from wfalign.cli import main
from wfalign.io import write_ply
from wfalign.synthdata import ShapeSpec, gen_shape

SMALL_NET = ["--queries", "8", "--neighbors", "8", "--widths", "8,16", "--per-class", "4", "--points", "64"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def report(path):
    return json.loads(path.read_text())


def test_gen_data(tmp_path, capsys):
    argv = ["gen-data", "--classes", "5", "--per-class", "20", "--seed", "7", "--out", str(tmp_path / "d")]
    code, out, _ = run(argv, capsys)
    assert code == 0
    plys = sorted((tmp_path / "d").rglob("*.ply"))
    assert len(plys) == 100
    manifest = json.loads(out)
    assert manifest["result"]["class_names"] == ["sphere", "cube", "cylinder", "cone", "torus"]
    assert len(manifest["seeds"]["sample_seeds"]) == 100
    first = {p.name: p.read_bytes() for p in plys}
    argv[-1] = str(tmp_path / "e")
    assert run(argv, capsys)[0] == 0
    again = {p.name: p.read_bytes() for p in sorted((tmp_path / "e").rglob("*.ply"))}
    assert first == again


def test_gen_data_bad_flag(tmp_path, capsys):
    code, _, err = run(["gen-data", "--per-class", "0", "--out", str(tmp_path)], capsys)
    assert code == 2
    assert "--per-class" in err


def test_invariance_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(["invariance-report", "--trials", "10", "--out", str(out)], capsys)[0] == 0
    r = report(out)
    assert r["version"] and r["seeds"] == {"seed": 0, "weight_seed": 0}
    assert r["result"]["compared_queries"] > 0
    assert r["result"]["max_deviation"] <= 1e-9


def test_invariance_report_from_file(tmp_path, capsys):
    write_ply(tmp_path / "c.ply", gen_shape(ShapeSpec("cylinder", 300, 0.01, seed=3)))
    out = tmp_path / "r.json"
    assert run(["invariance-report", "--input", str(tmp_path / "c.ply"), "--trials", "3", "--out", str(out)], capsys)[0] == 0
    assert len(report(out)["result"]["trials"]) == 3


def test_invariance_sphere_structure(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert run(["invariance-report", "--shape", "sphere", "--trials", "3", "--out", str(out)], capsys)[0] == 0
    res = report(out)["result"]
    for key in ("compared_queries", "degenerate_queries", "ambiguous_queries"):
        assert key in res
    if res["compared_queries"]:
        assert res["max_deviation"] <= 1e-9


def test_invariance_zero_trials(capsys):
    code, out, _ = run(["invariance-report", "--trials", "0"], capsys)
    assert code == 0
    res = json.loads(out)["result"]
    assert res["trials"] == [] and res["max_deviation"] is None


def test_missing_input_is_io_error(tmp_path, capsys):
    assert run(["invariance-report", "--input", str(tmp_path / "none.ply")], capsys)[0] == 3


def test_procrustes_check(capsys):
    code, out, _ = run(["procrustes-check", "--instances", "5", "--samples", "2000", "--registration-samples", "200"], capsys)
    assert code == 0
    res = json.loads(out)["result"]
    assert res["procrustes_optimality"] == "pass"
    assert res["registration"]["constructed_weights_gap"]["max"] <= 1e-9


def test_gradcheck(capsys):
    code, out, err = run(["gradcheck", "--seed", "1", "--configs", "3"], capsys)
    assert code == 0
    assert "max rel err" in err
    assert json.loads(out)["result"]["overall"]["max_rel_error"] <= 1e-3


def test_gradcheck_failure_exit(capsys):
    assert run(["gradcheck", "--configs", "1", "--threshold", "1e-300"], capsys)[0] == 4


def test_train_and_eval(tmp_path, capsys):
    ckpt = tmp_path / "m.ckpt"
    code, out, _ = run(["train", *SMALL_NET, "--epochs", "2", "--checkpoint", str(ckpt)], capsys)
    assert code == 0
    rep = json.loads(out)["result"]
    assert len(rep["epoch_loss"]) == 2 and "wall_clock" not in rep
    code, out, _ = run(["eval", "--checkpoint", str(ckpt), "--per-class", "4", "--points", "64",
                        "--mode", "none", "--mode", "arbitrary"], capsys)
    assert code == 0
    acc = json.loads(out)["result"]["accuracy"]
    assert acc["none"] == acc["arbitrary"]


def test_eval_from_dataset_dir(tmp_path, capsys):
    assert run(["gen-data", "--per-class", "4", "--points", "64", "--out", str(tmp_path / "d")], capsys)[0] == 0
    ckpt = tmp_path / "m.ckpt"
    assert run(["train", *SMALL_NET, "--epochs", "1", "--data", str(tmp_path / "d"), "--checkpoint", str(ckpt)], capsys)[0] == 0
    code, out, _ = run(["eval", "--checkpoint", str(ckpt), "--data", str(tmp_path / "d")], capsys)
    assert code == 0
    assert json.loads(out)["result"]["samples"] == 5


def test_ablation_table(capsys):
    code, out, _ = run(["ablation", *SMALL_NET, "--epochs", "1"], capsys)
    assert code == 0
    rows = json.loads(out)["result"]["rows"]
    assert len(rows) == 6
    assert "123" in {r["order"] for r in rows}
    assert [r["rank"] for r in rows] == [1, 2, 3, 4, 5, 6]


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# shared settings\ntrials = 2\nradius = 0.35\nepochs = 3\n")
    code, out, _ = run(["invariance-report", "--config", str(cfg), "--trials", "1"], capsys)
    assert code == 0
    r = json.loads(out)
    assert r["config"]["trials"] == 1 and r["config"]["radius"] == 0.35
    assert len(r["result"]["trials"]) == 1


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    assert run(["invariance-report", "--config", str(bad)], capsys)[0] == 2
    bad.write_text("trials = many\n")
    assert run(["invariance-report", "--config", str(bad)], capsys)[0] == 2
    assert run(["invariance-report", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 2


def test_invalid_order(capsys):
    assert run(["invariance-report", "--order", "113"], capsys)[0] == 2


DETERMINISM_CASES = [
    ["invariance-report", "--trials", "3"],
    ["procrustes-check", "--instances", "3", "--samples", "1000", "--registration-samples", "100"],
    ["gradcheck", "--configs", "2"],
    ["train", *SMALL_NET, "--epochs", "1"],
    ["ablation", *SMALL_NET, "--epochs", "1", "--orders", "123 321"],
]


@pytest.mark.parametrize("argv", DETERMINISM_CASES, ids=lambda a: a[0])
def test_reports_byte_identical(tmp_path, capsys, argv):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run([*argv, "--out", str(a)], capsys)[0] == 0
    assert run([*argv, "--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
