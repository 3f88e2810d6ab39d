"""Implementations behind the ``datelink`` subcommands (see :mod:`datelink.cli`)."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import replace
from pathlib import Path

import numpy as np
from PIL import Image

from .corpus import StyleParams, fit_image, generate_dataset, load_dataset, open_saved, save_dataset, split
from .dates import SequenceFormat, format_label
from .errors import ConfigError
from .linker import (
    DateRecognizer,
    DateTrainer,
    LinkConfig,
    MatchCriteria,
    evaluate_links,
    make_census,
    mock_model_set,
    run_pipeline,
    write_links_csv,
    write_records_csv,
    write_report_json,
)
from .linker.scenario import default_mock_trainers
from .metrics import coverage_curve, coverage_svg, seq_acc, write_curve_csv, write_eval_report
from .nn import (
    ConvBlock,
    ModelConfig,
    TrainConfig,
    adapt_model,
    init_model,
    load_checkpoint,
    predict_batch,
    save_checkpoint,
    train,
)

log = logging.getLogger(__name__)


def _require(cfg: dict, *paths: str) -> None:
    missing = []
    for path in paths:
        section, key = path.split(".")
        if cfg[section][key] is None:
            missing.append(f"{path} is required")
    if missing:
        raise ConfigError(missing)


def open_data(path, fmt: str | None, size: tuple[int, int] | None):
    """A saved synthetic corpus (manifest.json) or an ``image_path,day,month,year`` directory."""
    p = Path(path)
    if (p / "manifest.json").is_file():
        return open_saved(p, size)
    if fmt is None:
        raise ConfigError([f"data.format is required for {p} (no manifest.json)"])
    return load_dataset(p, p / "labels.csv", fmt, size=size or (64, 160))


def style_from(cfg: dict) -> StyleParams:
    s = dict(cfg["style"])
    s["stroke_thickness"] = tuple(s["stroke_thickness"])
    return StyleParams(**s)


def cmd_synth(cfg: dict, out: Path, threads: int = 1) -> None:
    sc = cfg["synth"]
    style = style_from(cfg)
    ds = generate_dataset(
        sc["n"], sc["format"], sc["empty_fraction"], style, seed=cfg["seed"],
        size=(sc["height"], sc["width"]), workers=threads,
    )
    if sc["test_fraction"] > 0:
        train_part, test_part = split(ds, sc["test_fraction"], seed=cfg["seed"])
        save_dataset(train_part, out / "train", seed=cfg["seed"], style=style)
        save_dataset(test_part, out / "test", seed=cfg["seed"], style=style)
    else:
        save_dataset(ds, out / "train", seed=cfg["seed"], style=style)


def model_config_from(cfg: dict, fmt: SequenceFormat, size: tuple[int, int]) -> ModelConfig:
    m = cfg["model"]
    return ModelConfig.for_format(
        fmt,
        cfg["train"]["label_smoothing"],
        input_height=size[0],
        input_width=size[1],
        conv_blocks=tuple(ConvBlock(int(f), m["stride"]) for f in m["filters"]),
        feature_dim=m["feature_dim"],
        pooling=m["pooling"],
        dropout_prob=m["dropout"],
        seed=cfg["seed"],
    )


def train_config_from(cfg: dict) -> TrainConfig:
    return TrainConfig(**cfg["train"], seed=cfg["seed"])


def cmd_train(cfg: dict, out: Path, threads: int = 1) -> None:
    _require(cfg, "data.train_dir")
    init = cfg["model"]["init_checkpoint"]
    start = load_checkpoint(init) if init else None
    size = (start.config.input_height, start.config.input_width) if start else None
    data = open_data(cfg["data"]["train_dir"], cfg["data"]["format"], size)
    size = data.image_size
    val = open_data(cfg["data"]["val_dir"], cfg["data"]["format"], size) if cfg["data"]["val_dir"] else None
    if start is not None:
        model = adapt_model(start, replace(start.config, heads=data.format.heads(cfg["train"]["label_smoothing"])))
    else:
        model = init_model(model_config_from(cfg, data.format, size))
    train(model, data, train_config_from(cfg), val=val, log_path=out / "train_log.csv")
    save_checkpoint(model, out / "model.dare")


def cmd_eval(cfg: dict, out: Path, threads: int = 1) -> None:
    _require(cfg, "eval.checkpoint", "data.val_dir")
    model = load_checkpoint(cfg["eval"]["checkpoint"])
    size = (model.config.input_height, model.config.input_width)
    data = open_data(cfg["data"]["val_dir"], cfg["data"]["format"], size)
    preds = predict_batch(model, data.images)
    project = cfg["eval"]["project_to"]
    res = seq_acc(preds.labels(), data.labels, project_to=project)
    fmt = SequenceFormat.parse(project) if project else data.format
    name = cfg["eval"]["dataset_name"] or Path(cfg["data"]["val_dir"]).name
    model_name = cfg["eval"]["model_name"] or Path(cfg["eval"]["checkpoint"]).stem
    write_eval_report([(name, model_name, fmt, res)], out / "eval.csv")


def cmd_transcribe(cfg: dict, out: Path, threads: int = 1) -> None:
    _require(cfg, "transcribe.checkpoint", "transcribe.image_dir")
    model = load_checkpoint(cfg["transcribe"]["checkpoint"])
    size = (model.config.input_height, model.config.input_width)
    root = Path(cfg["transcribe"]["image_dir"])
    if not root.is_dir():
        raise FileNotFoundError(f"image directory not found: {root}")
    paths = sorted(root.rglob(cfg["transcribe"]["pattern"]))
    heads = model.heads
    with (out / "predictions.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["image_id", "date", *(f"{h.name}_probs" for h in heads), "confidence"])
        for start in range(0, len(paths), 256):
            chunk = paths[start : start + 256]
            pixels = []
            for p in chunk:
                with Image.open(p) as im:
                    pixels.append(fit_image(im, size))
            preds = predict_batch(model, np.stack(pixels))
            for i, p in enumerate(chunk):
                pred = preds[i]
                probs = [" ".join(f"{v:.6f}" for v in dist) for dist in pred.dists]
                date = format_label(pred.label) if model.config.format is not None else ""
                w.writerow([p.relative_to(root).as_posix(), date, *probs, f"{pred.confidence:.6f}"])


def cmd_coverage(cfg: dict, out: Path, threads: int = 1) -> None:
    _require(cfg, "coverage.checkpoint", "data.val_dir")
    model = load_checkpoint(cfg["coverage"]["checkpoint"])
    size = (model.config.input_height, model.config.input_width)
    data = open_data(cfg["data"]["val_dir"], cfg["data"]["format"], size)
    points = coverage_curve(predict_batch(model, data.images), data.labels, cfg["coverage"]["grid"])
    write_curve_csv(points, out / "coverage.csv")
    if cfg["coverage"]["svg"]:
        coverage_svg({Path(cfg["coverage"]["checkpoint"]).stem: points}, out / "coverage.svg")


def cmd_link(cfg: dict, out: Path, threads: int = 1) -> None:
    lk, cs, mk = cfg["link"], cfg["census"], cfg["mock"]
    seed = cfg["seed"]
    date_ckpt = lk["date_checkpoint"]
    scenario = make_census(
        cs["n_records"], (cs["region_min"], cs["region_max"]), cs["extra_image_frac"],
        cs["missing_image_frac"], cs["ditto_frac"], seed=seed,
        render=("date",) if date_ckpt else (),
    )
    trainers = default_mock_trainers(seed, mk["base_accuracy"], mk["max_accuracy"], mk["scale"])
    base = mock_model_set(trainers)
    if date_ckpt:
        date_model = load_checkpoint(date_ckpt)
        trainers["date"] = DateTrainer(date_model, TrainConfig.desk(epochs=lk["date_epochs"], seed=seed),
                                       SequenceFormat.DDMYY)
        base["date"] = DateRecognizer(trainers["date"].start_model())
    criteria = MatchCriteria(lk["min_agreeing_fields"], lk["require_uniqueness"])
    link_cfg = LinkConfig(lk["rounds"], lk["stop_gain_threshold"], criteria, seed)
    result = run_pipeline(scenario.images, scenario.records, base, trainers, link_cfg)
    write_links_csv(result.links, out / "links.csv")
    write_report_json(result.report, out / "report.json")
    ev = evaluate_links(result.links, scenario, criteria)
    summary = {
        "links": ev.n_links,
        "correct": ev.n_correct,
        "matchable": ev.n_matchable,
        "match_rate": round(ev.match_rate, 6) if ev.n_matchable else None,
        "precision": round(ev.precision, 6) if ev.n_links else None,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if lk["records_csv"]:
        write_records_csv(scenario.records, lk["records_csv"])
