import json

import numpy as np
import pytest

from linksched.cli import main
from linksched.data import DatasetFile
from linksched.evaluation import evaluate
from linksched.gnn import load_checkpoint

SMALL = """
[model]
dims = [1, 16, 16, 16]

[training]
epochs = 3
ssl_epochs = 1
batch_size = 16

[experiment]
k_values = [4, 5]
seeds = [0]
n_train = 32
n_test = 16
sample_sizes = [16, 32]
k_train_generalization = [4]
k_sample_complexity = [4]
"""


@pytest.fixture
def env(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(SMALL)
    out = tmp_path / "out"
    base = ["--quiet", "--config", str(cfg), "--out", str(out)]
    assert main(base + ["generate"]) == 0
    assert main(base + ["label", *map(str, sorted((out / "data").glob("*.jsonl")))]) == 0
    return base, out


def test_generate_label_validate(env):
    base, out = env
    files = sorted((out / "data").glob("*.jsonl"))
    assert [f.name for f in files] == ["k4_test.jsonl", "k4_train.jsonl", "k5_test.jsonl", "k5_train.jsonl"]
    assert all(DatasetFile.read(f).labeled for f in files)
    assert main(base + ["validate", "--optimality", *map(str, files)]) == 0
    before = files[0].read_bytes()
    assert main(base + ["label", str(files[0])]) == 0
    assert files[0].read_bytes() == before


def test_train_outputs_and_determinism(env):
    base, out = env
    assert main(base + ["train", "--regime", "supervised", "--k", "4"]) == 0
    run = out / "runs" / "supervised_k4_s0"
    log1 = (run / "log.csv").read_text()
    assert log1.splitlines()[0] == "epoch,train_loss,test_norm_sum_rate"
    assert len(log1.splitlines()) == 4
    manifest = json.loads((run / "manifest.json").read_text())
    assert manifest["seed"] == 0 and "config_digest" in manifest
    assert main(base + ["train", "--regime", "supervised", "--k", "4"]) == 0
    assert (run / "log.csv").read_text() == log1
    assert main(base + ["validate", str(run / "best.json")]) == 0


def test_zero_epoch_training(env):
    base, out = env
    assert main(base + ["train", "--regime", "unsupervised", "--k", "4", "--epochs", "0"]) == 0
    run = out / "runs" / "unsupervised_k4_s0"
    assert (run / "log.csv").read_text() == "epoch,train_loss,test_norm_sum_rate\n"
    assert (run / "final.json").exists()


def test_eval_matches_direct(env, capsys):
    base, out = env
    main(base + ["train", "--regime", "unsupervised", "--k", "4"])
    ck = out / "runs" / "unsupervised_k4_s0" / "best.json"
    test = out / "data" / "k5_test.jsonl"
    csv_path = out / "eval.csv"
    assert main(base + ["eval", "--checkpoint", str(ck), "--test", str(test), "--csv", str(csv_path)]) == 0
    header, row = csv_path.read_text().splitlines()
    rec = dict(zip(header.split(","), row.split(",")))
    model, _, _ = load_checkpoint(ck)
    direct = evaluate(model, DatasetFile.read(test).to_sample_set(True)).normalized
    assert float(rec["normalized"]) == direct
    assert rec["k_test"] == "5"


def test_sweep_all_and_resume(env):
    base, out = env
    assert main(base + ["sweep", "--study", "all"]) == 0
    results = {s: (out / f"{s}.csv").read_text() for s in ("fig2a", "fig2b", "fig2c", "fig2d")}
    assert results["fig2a"].splitlines()[0] == "k,regime,mean,std"
    assert len(results["fig2a"].splitlines()) == 1 + 2 * 2
    fig2b = results["fig2b"].splitlines()
    assert {tuple(l.split(",")[1:3]) for l in fig2b[1:]} == {
        ("supervised", "0"), ("supervised", "1"), ("unsupervised", "0"), ("unsupervised", "1")
    }
    assert len(results["fig2c"].splitlines()) == 1 + 2 * 2
    assert len(results["fig2d"].splitlines()) == 1 + 2 * 2

    cells = sorted((out / "cells").glob("*.json"))
    removed = cells[0]
    stamp = {c: c.stat().st_mtime_ns for c in cells}
    removed.unlink()
    for s in results:
        (out / f"{s}.csv").unlink()
    assert main(base + ["sweep", "--study", "all"]) == 0
    for c in cells:
        if c != removed:
            assert c.stat().st_mtime_ns == stamp[c]
    assert removed.exists()
    for s, text in results.items():
        assert (out / f"{s}.csv").read_text() == text


def test_fig2a_single_cell_equals_evaluate(env):
    base, out = env
    assert main(base + ["sweep", "--study", "fig2a", "--regimes", "supervised"]) == 0
    lines = (out / "fig2a.csv").read_text().splitlines()
    row4 = [l for l in lines[1:] if l.startswith("4,")][0].split(",")
    cell = json.loads((out / "cells" / "k4_supervised_n32_s0.json").read_text())
    from linksched.gnn import model_from_dict

    direct = evaluate(model_from_dict(cell["best_checkpoint"]),
                      DatasetFile.read(out / "data" / "k4_test.jsonl").to_sample_set(True))
    assert float(row4[2]) == direct.normalized


def test_exit_codes(tmp_path, env):
    base, out = env
    bad = tmp_path / "bad.toml"
    bad.write_text("[training]\nnope = 1\n")
    assert main(["--quiet", "--config", str(bad), "generate"]) == 2
    assert main(["--quiet", "--out", str(tmp_path / "empty"), "train", "--regime", "supervised", "--k", "4"]) == 3
    assert main(["--quiet", "--out", str(tmp_path / "empty"), "sweep", "--study", "fig2a"]) == 3
    # datasets from another config digest are refused
    other = tmp_path / "other.toml"
    other.write_text(SMALL.replace("[experiment]", "[experiment]\nmaster_seed = 5"))
    assert main(["--quiet", "--config", str(other), "--out", str(out), "train", "--regime", "supervised",
                 "--k", "4"]) == 3
    corrupt = tmp_path / "c.jsonl"
    corrupt.write_text("garbage\n")
    assert main(base + ["validate", str(corrupt)]) == 3


def test_bench_labeling(env, tmp_path):
    base, _ = env
    path = tmp_path / "fig1.csv"
    assert main(base + ["bench-labeling", "--k", "4", "--k", "6", "--n", "2", "--csv", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "k,t_unlabeled_s,t_labeled_s,evals"
    assert [l.split(",")[3] for l in lines[1:]] == ["16", "64"]


def test_init_config_round_trip(tmp_path):
    path = tmp_path / "default.toml"
    assert main(["--quiet", "init-config", str(path)]) == 0
    assert main(["--quiet", "--config", str(path), "init-config", str(tmp_path / "again.toml")]) == 0
    assert path.read_text() == (tmp_path / "again.toml").read_text()
