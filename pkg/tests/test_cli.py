import csv
import json
import subprocess
import sys

import pytest
import yaml

from datelink.cli import SCHEMA, main, resolve_config
from datelink.errors import ConfigError

SMALL = ["--set", "synth.height=32", "--set", "synth.width=80"]
QUICK_TRAIN = ["--set", "train.warmup_epochs=0", "--set", "train.batch_size=16"]


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """synth -> train -> eval -> transcribe -> coverage, run once for the module."""
    root = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--out", str(root / "data"), "--n", "66", "--format", "DDMYY", "--seed", "3", *SMALL]) == 0
    assert main(["train", "--out", str(root / "run"), "--data", str(root / "data" / "train"),
                 "--val", str(root / "data" / "test"), "--epochs", "1", "--seed", "3", *QUICK_TRAIN]) == 0
    ckpt = str(root / "run" / "model.dare")
    assert main(["eval", "--out", str(root / "eval"), "--data", str(root / "data" / "test"), "--checkpoint", ckpt]) == 0
    assert main(["transcribe", "--out", str(root / "tr"), "--images", str(root / "data" / "test" / "images"),
                 "--checkpoint", ckpt]) == 0
    assert main(["coverage", "--out", str(root / "cov"), "--data", str(root / "data" / "test"),
                 "--checkpoint", ckpt]) == 0
    return root


def test_synth_outputs(workdir):
    train_rows = _rows(workdir / "data" / "train" / "labels.csv")
    test_rows = _rows(workdir / "data" / "test" / "labels.csv")
    assert len(train_rows) + len(test_rows) == 66
    assert len(test_rows) == 6
    manifest = json.loads((workdir / "data" / "train" / "manifest.json").read_text())
    assert manifest["format"] == "DDMYY"
    resolved = yaml.safe_load((workdir / "data" / "synth_config.yaml").read_text())
    assert resolved["synth"]["n"] == 66 and resolved["seed"] == 3


def test_train_outputs(workdir):
    assert (workdir / "run" / "model.dare").read_bytes()[:6] == b"DAREv1"
    log = _rows(workdir / "run" / "train_log.csv")
    assert len(log) == 1 and log[0]["epoch"] == "0"


def test_eval_transcribe_coverage_outputs(workdir):
    row = _rows(workdir / "eval" / "eval.csv")[0]
    assert row["sequence"] == "DDMYY" and row["n"] == "6"
    assert 0.0 <= float(row["seqacc"]) <= 1.0
    preds = _rows(workdir / "tr" / "predictions.csv")
    assert len(preds) == 6
    assert {"image_id", "date", "Day1_probs", "Year4_probs", "confidence"} <= set(preds[0])
    assert len(preds[0]["Month_probs"].split()) == 14
    cov = _rows(workdir / "cov" / "coverage.csv")
    assert [float(r["coverage"]) for r in cov][-1] == 1.0
    assert float(cov[-1]["accuracy"]) == pytest.approx(float(row["seqacc"]), abs=1e-6)
    assert (workdir / "cov" / "coverage.svg").read_text().startswith("<svg")


def test_reruns_are_byte_identical(workdir, tmp_path):
    assert main(["train", "--out", str(tmp_path / "run"), "--data", str(workdir / "data" / "train"),
                 "--val", str(workdir / "data" / "test"), "--epochs", "1", "--seed", "3", *QUICK_TRAIN]) == 0
    for name in ("model.dare", "train_log.csv"):
        assert (tmp_path / "run" / name).read_bytes() == (workdir / "run" / name).read_bytes()
    assert main(["synth", "--out", str(tmp_path / "data"), "--n", "66", "--format", "DDMYY", "--seed", "3", *SMALL]) == 0
    assert ((tmp_path / "data" / "train" / "labels.csv").read_bytes()
            == (workdir / "data" / "train" / "labels.csv").read_bytes())


def test_link_command(tmp_path):
    args = ["link", "--rounds", "2", "--set", "census.n_records=300", "--set", f"link.records_csv={tmp_path}/rec.csv"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "links.csv").read_bytes()
    assert a == (tmp_path / "b" / "links.csv").read_bytes()
    assert a.startswith(b"image_id,record_id,round_found\n")
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["precision"] > 0.9
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    assert report[0]["round"] == 0
    assert len(_rows(tmp_path / "rec.csv")) == 300


def test_unknown_keys_exit_2(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("train:\n  epochs: 2\n  learning_rate: 0.1\nbogus: 1\n")
    code = main(["train", "--config", str(cfg), "--set", "model.width=3", "--out", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err
    for key in ("train.learning_rate", "bogus", "model.width"):
        assert key in err


def test_bad_values_and_missing_inputs(tmp_path, capsys):
    assert main(["train", "--set", "train.epochs=two", "--out", str(tmp_path)]) == 2
    assert main(["train", "--out", str(tmp_path)]) == 2  # no training data configured
    assert main(["eval", "--data", str(tmp_path / "nowhere"), "--checkpoint", str(tmp_path / "x.dare"),
                 "--out", str(tmp_path)]) == 1
    assert main(["train", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path)]) == 2


def test_resolve_config_precedence():
    cfg = resolve_config({"train": {"epochs": 7}, "seed": 4}, [("train.epochs", 9)])
    assert cfg["train"]["epochs"] == 9 and cfg["seed"] == 4
    assert cfg["train"]["lr_max"] == SCHEMA["train"]["lr_max"].default
    with pytest.raises(ConfigError) as info:
        resolve_config({"train": 3}, [])
    assert "train" in info.value.problems[0]


def test_help_lists_every_key():
    out = subprocess.run([sys.executable, "-m", "datelink.cli", "--help"], capture_output=True, text=True, check=True)
    for section, keys in SCHEMA.items():
        assert f"{section}:" in out.stdout
        for key in keys:
            assert key in out.stdout
    for cmd in ("synth", "train", "eval", "transcribe", "coverage", "link"):
        assert cmd in out.stdout
