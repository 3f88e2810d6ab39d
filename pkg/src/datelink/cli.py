"""Command-line interface: ``datelink <command> [--config run.yaml] [--set section.key=value ...]``.

Every command reads one YAML run file (optional), applies ``--set``
overrides and the convenience flags, validates the result against the
schema below, writes the resolved configuration next to its outputs and
then runs.  Unknown keys are rejected, and all of them are listed at once.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError


@dataclass(frozen=True)
class Key:
    default: Any
    kind: type
    help: str
    optional: bool = False


GLOBAL_KEYS = {
    "seed": Key(0, int, "global seed; every random draw derives from it"),
    "out_dir": Key("out", str, "directory receiving all outputs and the resolved config"),
}

SCHEMA: dict[str, dict[str, Key]] = {
    "synth": {
        "n": Key(11000, int, "number of images to generate"),
        "format": Key("DDM", str, "sequence format: DDM, DDMYY or DDMYYYY"),
        "empty_fraction": Key(0.1, float, "share of empty (all-missing) images"),
        "test_fraction": Key(1 / 11, float, "share written to test/ (the rest goes to train/)"),
        "height": Key(64, int, "image height in pixels"),
        "width": Key(160, int, "image width in pixels"),
    },
    "style": {
        "glyph_jitter": Key(1.2, float, "smooth stroke wobble (px)"),
        "stroke_thickness": Key([1.2, 2.6], list, "stroke width range [lo, hi] (px)"),
        "rotation_range": Key(4.0, float, "maximum line rotation (degrees)"),
        "noise_level": Key(0.05, float, "std of additive pixel noise"),
        "fade_level": Key(0.4, float, "largest relative loss of ink contrast"),
        "blot_prob": Key(0.15, float, "probability of ink blots per image"),
        "layout": Key("day-month-year", str, "day-month-year or year-day-month"),
        "month_rendering": Key("numeric", str, "numeric or text"),
    },
    "data": {
        "train_dir": Key(None, str, "training data directory (labels.csv inside)", True),
        "val_dir": Key(None, str, "validation/evaluation data directory", True),
        "format": Key(None, str, "sequence format if the directory has no manifest.json", True),
    },
    "model": {
        "filters": Key([16, 32, 64, 64], list, "filters per 3x3 conv block"),
        "stride": Key(2, int, "stride of every conv block"),
        "feature_dim": Key(128, int, "width of the shared feature layer"),
        "pooling": Key("flatten", str, "flatten or gap (global average pooling)"),
        "dropout": Key(0.4, float, "dropout before the heads"),
        "init_checkpoint": Key(None, str, "start from this checkpoint (heads adapted to the data format)", True),
    },
    "train": {
        "batch_size": Key(64, int, "mini-batch size"),
        "lr_max": Key(0.6, float, "peak learning rate"),
        "momentum": Key(0.9, float, "SGD momentum"),
        "epochs": Key(40, int, "training epochs"),
        "warmup_epochs": Key(1, int, "linear warmup epochs"),
        "grad_clip_value": Key(0.02, float, "clip threshold (absolute norm, or ratio to weight norm for agc)"),
        "clip_mode": Key("norm", str, "norm (per-tensor norm cap) or agc (unit-wise adaptive clip)"),
        "weight_decay": Key(7e-6, float, "L2 weight decay"),
        "label_smoothing": Key(0.1, float, "label smoothing alpha for every head"),
        "random_erase_prob": Key(0.4, float, "random erase probability"),
        "affine_jitter": Key(True, bool, "small random rotation and shift"),
    },
    "eval": {
        "checkpoint": Key(None, str, "model checkpoint to evaluate", True),
        "dataset_name": Key(None, str, "dataset label in the report (default: directory name)", True),
        "model_name": Key(None, str, "model label in the report (default: checkpoint stem)", True),
        "project_to": Key(None, str, "score after projecting to this format (e.g. DDMYY)", True),
    },
    "transcribe": {
        "checkpoint": Key(None, str, "model checkpoint", True),
        "image_dir": Key(None, str, "directory of images to transcribe", True),
        "pattern": Key("*.png", str, "glob for image files inside image_dir"),
    },
    "coverage": {
        "checkpoint": Key(None, str, "model checkpoint", True),
        "grid": Key([round(0.05 * k, 2) for k in range(1, 21)], list, "coverage fractions in (0, 1]"),
        "svg": Key(True, bool, "also write coverage.svg"),
    },
    "link": {
        "rounds": Key(5, int, "maximum number of matching rounds (round 0 included)"),
        "stop_gain_threshold": Key(0.005, float, "stop when a round adds fewer than this share of records"),
        "min_agreeing_fields": Key(2, int, "fields (of date, first, last name) that must agree"),
        "require_uniqueness": Key(True, bool, "only keep pairs with no competing candidate"),
        "records_csv": Key(None, str, "write the scenario's manual records here as well", True),
        "date_checkpoint": Key(None, str, "use this date model on rendered dates instead of the mock", True),
        "date_epochs": Key(3, int, "fine-tuning epochs for the date model per round"),
    },
    "census": {
        "n_records": Key(5000, int, "people in the manual records"),
        "region_min": Key(30, int, "smallest region size"),
        "region_max": Key(70, int, "largest region size"),
        "extra_image_frac": Key(0.03, float, "images of people missing from the records"),
        "missing_image_frac": Key(0.02, float, "records without an image"),
        "ditto_frac": Key(0.05, float, "last names written as a ditto mark"),
    },
    "mock": {
        "base_accuracy": Key(0.85, float, "zero-shot per-field accuracy"),
        "max_accuracy": Key(0.97, float, "accuracy reached with unlimited training pairs"),
        "scale": Key(1500.0, float, "training pairs per e-fold of the remaining gap"),
    },
}

COMMAND_SECTIONS = {
    "synth": ("synth", "style"),
    "train": ("data", "model", "train"),
    "eval": ("data", "eval"),
    "transcribe": ("transcribe",),
    "coverage": ("data", "coverage"),
    "link": ("link", "census", "mock"),
}

COMMAND_HELP = {
    "synth": "render a synthetic date corpus to train/ and test/",
    "train": "train a date model; writes model.dare and train_log.csv",
    "eval": "score a checkpoint on labelled data; writes eval.csv",
    "transcribe": "transcribe a directory of images; writes predictions.csv",
    "coverage": "accuracy at each data coverage; writes coverage.csv (+ coverage.svg)",
    "link": "run the link-and-retrain pipeline on a synthetic census; writes links.csv and report.json",
}

# convenience flags -> config keys
ALIASES = {
    "train": {"data": "data.train_dir", "val": "data.val_dir", "epochs": "train.epochs"},
    "eval": {"data": "data.val_dir", "checkpoint": "eval.checkpoint"},
    "transcribe": {"images": "transcribe.image_dir", "checkpoint": "transcribe.checkpoint"},
    "coverage": {"data": "data.val_dir", "checkpoint": "coverage.checkpoint"},
    "synth": {"n": "synth.n", "format": "synth.format"},
    "link": {"rounds": "link.rounds"},
}


def _coerce(value, key: Key, where: str, problems: list[str]):
    if value is None:
        if key.optional:
            return None
        problems.append(f"{where}: may not be null")
        return value
    kind = key.kind
    try:
        if kind is bool:
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ("true", "false", "yes", "no", "1", "0"):
                return value.lower() in ("true", "yes", "1")
            raise ValueError
        if kind is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if kind is float:
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if kind is list:
            if not isinstance(value, (list, tuple)):
                raise ValueError
            return list(value)
        return str(value)
    except (TypeError, ValueError):
        problems.append(f"{where}: expected {kind.__name__}, got {value!r}")
        return value


def defaults() -> dict:
    cfg = {k: v.default for k, v in GLOBAL_KEYS.items()}
    for section, keys in SCHEMA.items():
        cfg[section] = {k: (list(v.default) if isinstance(v.default, list) else v.default) for k, v in keys.items()}
    return cfg


def resolve_config(file_data: dict | None, overrides: list[tuple[str, Any]]) -> dict:
    """Merge defaults, file values and overrides; raise ConfigError listing every bad key."""
    cfg = defaults()
    problems: list[str] = []
    data = file_data or {}
    if not isinstance(data, dict):
        raise ConfigError(["config file must be a mapping at the top level"])

    def put(path: str, value):
        parts = path.split(".")
        if len(parts) == 1 and parts[0] in GLOBAL_KEYS:
            cfg[parts[0]] = _coerce(value, GLOBAL_KEYS[parts[0]], parts[0], problems)
        elif len(parts) == 2 and parts[0] in SCHEMA and parts[1] in SCHEMA[parts[0]]:
            cfg[parts[0]][parts[1]] = _coerce(value, SCHEMA[parts[0]][parts[1]], path, problems)
        else:
            problems.append(f"unknown key '{path}'")

    for top, value in data.items():
        if top in SCHEMA:
            if not isinstance(value, dict):
                problems.append(f"section '{top}' must be a mapping")
                continue
            for k, v in value.items():
                put(f"{top}.{k}", v)
        else:
            put(str(top), value)
    for path, value in overrides:
        put(path, value)
    if problems:
        raise ConfigError(problems)
    return cfg


def schema_text(sections) -> str:
    lines = ["config keys (YAML sections; override with --set section.key=value):", ""]
    for k, key in GLOBAL_KEYS.items():
        lines.append(f"  {k:<28} {key.help} [default: {key.default!r}]")
    for section in sections:
        lines.append(f"  {section}:")
        for k, key in SCHEMA[section].items():
            default = "none" if key.default is None else repr(key.default)
            lines.append(f"    {k:<26} {key.help} [default: {default}]")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="datelink",
        description="Handwritten date recognition and record linkage.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=schema_text(list(SCHEMA)),
    )
    parser.add_argument("--threads", type=int, default=1, help="cap on worker threads/processes (default 1)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, sections in COMMAND_SECTIONS.items():
        p = sub.add_parser(
            name,
            help=COMMAND_HELP[name],
            description=COMMAND_HELP[name],
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog=schema_text(sections),
        )
        p.add_argument("--config", type=Path, help="YAML run file")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key, e.g. --set train.epochs=5 (repeatable)")
        p.add_argument("--out", dest="out_dir", help="output directory (config key out_dir)")
        p.add_argument("--seed", type=int, help="global seed (config key seed)")
        for flag, target in ALIASES.get(name, {}).items():
            p.add_argument(f"--{flag}", dest=f"alias_{flag}", help=f"shorthand for --set {target}=...")
    return parser


def _overrides(args) -> list[tuple[str, Any]]:
    out = []
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError([f"--set expects KEY=VALUE, got {item!r}"])
        k, v = item.split("=", 1)
        out.append((k.strip(), yaml.safe_load(v)))
    for flag, target in ALIASES.get(args.command, {}).items():
        v = getattr(args, f"alias_{flag}", None)
        if v is not None:
            out.append((target, yaml.safe_load(v)))
    if args.out_dir is not None:
        out.append(("out_dir", args.out_dir))
    if args.seed is not None:
        out.append(("seed", args.seed))
    return out


def write_resolved(cfg: dict, command: str, out_dir: Path) -> Path:
    keep = {"command": command, "seed": cfg["seed"], "out_dir": cfg["out_dir"]}
    for section in COMMAND_SECTIONS[command]:
        keep[section] = cfg[section]
    path = out_dir / f"{command}_config.yaml"
    path.write_text(yaml.safe_dump(keep, sort_keys=True, default_flow_style=False))
    return path


def _limit_threads(n: int) -> None:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(max(1, n))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _limit_threads(args.threads)
    try:
        file_data = None
        if args.config is not None:
            if not args.config.is_file():
                raise ConfigError([f"config file not found: {args.config}"])
            file_data = yaml.safe_load(args.config.read_text())
        cfg = resolve_config(file_data, _overrides(args))
    except ConfigError as exc:
        print("error: invalid configuration", file=sys.stderr)
        for p in exc.problems:
            print(f"  - {p}", file=sys.stderr)
        return 2
    except yaml.YAMLError as exc:
        print(f"error: cannot parse config: {exc}", file=sys.stderr)
        return 2

    from . import commands
    from .errors import DatelinkError

    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    write_resolved(cfg, args.command, out_dir)
    try:
        getattr(commands, f"cmd_{args.command}")(cfg, out_dir, threads=args.threads)
    except ConfigError as exc:
        print("error: invalid configuration", file=sys.stderr)
        for p in exc.problems:
            print(f"  - {p}", file=sys.stderr)
        return 2
    except (DatelinkError, ValueError, FileNotFoundError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def console() -> None:  # pragma: no cover - thin wrapper for the console script
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    console()
