import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from tsetlin_text.cli import main
from tsetlin_text.modelfile import load_model

GOOD = "great superb lovely fine wonderful".split()
BAD = "awful boring poor dull terrible".split()
FILLER = "film plot actor scene story music ending".split()


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    rng = np.random.default_rng(0)
    for label, words in (("bad", BAD), ("good", GOOD)):
        (root / label).mkdir()
        for i in range(30):
            text = " ".join(rng.choice(words, 2).tolist() + rng.choice(FILLER, 4).tolist())
            (root / label / f"{i:03d}.txt").write_text(text.capitalize() + ".", encoding="utf-8")
    return root


def train_args(corpus_dir, out, *extra):
    return ["train", "--dataset", "dirs", "--data-dir", str(corpus_dir), "--clauses", "10",
            "--states", "50", "--s", "3.0", "--threshold", "5", "--epochs", "5", "--seed", "7",
            "--out", str(out), *extra]


@pytest.fixture(scope="module")
def model(corpus_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("model") / "m.tmz"
    assert main(train_args(corpus_dir, out)) == 0
    return out


def test_train_writes_model_and_history(model, capsys):
    loaded = load_model(model)
    assert loaded.model.class_labels == ["bad", "good"]
    assert loaded.metadata["dataset"] == "dirs"
    assert loaded.metadata["split"] == {"kind": "holdout", "fraction": 0.8, "seed": 7}
    rows = list(csv.reader(open(f"{model}.history.csv")))
    assert rows[0] == ["epoch", "train_acc", "test_acc", "seconds"]
    assert len(rows) == 6


def test_identical_flags_give_identical_bytes(corpus_dir, model, tmp_path, capsys):
    again = tmp_path / "again.tmz"
    assert main(train_args(corpus_dir, again)) == 0
    assert again.read_bytes() == model.read_bytes()
    parallel = tmp_path / "parallel.tmz"
    assert main(train_args(corpus_dir, parallel, "--parallel")) == 0
    assert parallel.read_bytes() == model.read_bytes()
    other = tmp_path / "other.tmz"
    assert main(train_args(corpus_dir, other)[:-4] + ["--seed", "8", "--out", str(other)]) == 0
    assert other.read_bytes() != model.read_bytes()


def test_data_dir_from_environment(corpus_dir, model, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("TSETLIN_TEXT_DATA", str(corpus_dir))
    out = tmp_path / "env.tmz"
    args = train_args(corpus_dir, out)
    i = args.index("--data-dir")
    assert main(args[:i] + args[i + 2:]) == 0
    assert out.read_bytes() == model.read_bytes()


def test_eval_text_and_json_agree(model, corpus_dir, capsys):
    base = ["eval", "--model", str(model), "--data-dir", str(corpus_dir)]
    assert main(base) == 0
    text = capsys.readouterr().out
    assert main(base + ["--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert sum(map(sum, report["confusion"])) == 12
    for key in ("accuracy", "macro_precision", "macro_recall", "macro_f1"):
        assert f"{report[key]:.6f}" in text
    assert main(base + ["--dataset", "dirs", "--json"]) == 0
    assert json.loads(capsys.readouterr().out) == report


def test_eval_train_split(model, corpus_dir, monkeypatch, capsys):
    monkeypatch.setenv("TSETLIN_TEXT_DATA", str(corpus_dir))
    assert main(["eval", "--model", str(model), "--split", "train", "--json"]) == 0
    assert sum(map(sum, json.loads(capsys.readouterr().out)["confusion"])) == 48


def test_explain_rules_and_text(model, corpus_dir, capsys):
    assert main(["explain", "--model", str(model), "--format", "json"]) == 0
    rules = json.loads(capsys.readouterr().out)
    assert rules["n_rules"] == 20
    assert main(["explain", "--model", str(model), "--top-n", "0"]) == 0
    assert capsys.readouterr().out == "# 0 rules over 2 classes\n"
    assert main(["explain", "--model", str(model), "--dataset", "dirs", "--data-dir",
                 str(corpus_dir), "--top-n", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and all("support=" in line for line in lines[1:])
    assert main(["explain", "--model", str(model), "--text", "great superb film"]) == 0
    assert capsys.readouterr().out.startswith("predicted: ")
    assert main(["explain", "--model", str(model), "--text", "dull", "--format", "json"]) == 0
    assert set(json.loads(capsys.readouterr().out)) == {"predicted", "classes"}


def test_cv(corpus_dir, capsys):
    args = ["cv", "--dataset", "dirs", "--data-dir", str(corpus_dir), "--folds", "3",
            "--repeats", "2", "--clauses", "10", "--states", "50", "--s", "3.0",
            "--threshold", "5", "--epochs", "3", "--seed", "1"]
    assert main(args + ["--json"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert set(summary) == {"accuracy", "macro_precision", "macro_recall", "macro_f1"}
    assert len(summary["macro_f1"]["samples"]) == 6
    assert main(args) == 0
    out = capsys.readouterr().out
    assert out.startswith("6 runs (3 folds x 2 repeats)")
    assert f"{100 * summary['macro_f1']['mean']:6.2f}" in out


def test_bench_synthetic(capsys):
    assert main(["bench", "--docs", "50", "--n-features", "64", "--clauses", "10",
                 "--json"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["documents"] == 50 and result["train_docs_per_second"] > 0


@pytest.mark.parametrize("argv", [
    [], ["nope"], ["train"], ["train", "--dataset", "dirs", "--out", "x", "--clauses", "3"],
    ["bench", "--clauses", "0"], ["bench", "--train-fraction", "1.5"],
    ["train", "--dataset", "dirs", "--clauses", "4", "--out", "x"],  # no data dir
])
def test_usage_errors_exit_1(argv, capsys, monkeypatch):
    monkeypatch.delenv("TSETLIN_TEXT_DATA", raising=False)
    assert main(argv) == 1
    err = capsys.readouterr().err
    assert err.startswith("tsetlin-text: usage error:")
    assert "Traceback" not in err


def test_runtime_errors_exit_2(tmp_path, model, capsys):
    assert main(["eval", "--model", str(tmp_path / "missing.tmz")]) == 2
    assert "error:" in capsys.readouterr().err
    broken = tmp_path / "broken.tmz"
    data = bytearray(model.read_bytes())
    data[-20] ^= 0xFF
    broken.write_bytes(bytes(data))
    assert main(["explain", "--model", str(broken)]) == 2
    assert "ChecksumError" in capsys.readouterr().err
    assert main(["train", "--dataset", "imdb", "--data-dir", str(tmp_path), "--clauses", "4",
                 "--out", str(tmp_path / "m")]) == 2
    assert "DatasetError" in capsys.readouterr().err


def test_module_entry_point(model):
    done = subprocess.run([sys.executable, "-m", "tsetlin_text", "explain", "--model",
                           str(model), "--top-n", "0"], capture_output=True, text=True)
    assert done.returncode == 0 and done.stdout == "# 0 rules over 2 classes\n"
