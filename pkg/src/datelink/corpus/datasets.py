"""Date-image datasets: synthetic generation, CSV ingestion, splitting, saving."""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ..dates import DIGITS, WILDCARD, SequenceFormat, TokenLabel, label_parts, parse_label
from ..errors import BadCSV, DatelinkError, MissingFile
from .render import DEFAULT_SIZE, StyleParams, render_date

CSV_COLUMNS = ("image_path", "day", "month", "year")
DEFAULT_ORIGIN = "synthetic"


@dataclass
class Dataset:
    """Images ``(N, H, W)`` in [0, 1] with one label and one unique id per item.

    ``origins`` names the collection each item came from (used for
    stratified splits); ``skipped`` lists ``(row, reason)`` pairs for input
    rows that were rejected while loading.
    """

    images: np.ndarray
    labels: list[TokenLabel]
    source_ids: list[str]
    format: SequenceFormat
    origins: list[str] | None = None
    skipped: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float32)
        if self.images.ndim != 3 and len(self.labels) == 0:
            self.images = self.images.reshape((0,) + DEFAULT_SIZE)
        if not (len(self.images) == len(self.labels) == len(self.source_ids)):
            raise ValueError("images, labels and source_ids must have equal length")
        if len(set(self.source_ids)) != len(self.source_ids):
            raise ValueError("source_ids must be unique")
        for lab in self.labels:
            if lab.fmt is not self.format:
                raise ValueError(f"label {lab} is not {self.format.value}")
        if self.origins is None:
            self.origins = [DEFAULT_ORIGIN] * len(self.labels)
        elif len(self.origins) != len(self.labels):
            raise ValueError("origins must match the number of items")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def items(self) -> list[tuple[np.ndarray, TokenLabel, str]]:
        return list(zip(self.images, self.labels, self.source_ids))

    @property
    def targets(self) -> np.ndarray:
        heads = self.format.heads()
        out = np.empty((len(self.labels), len(heads)), dtype=np.int64)
        for i, lab in enumerate(self.labels):
            out[i] = [h.index(s) for h, s in zip(heads, lab.symbols)]
        return out

    @property
    def image_size(self) -> tuple[int, int]:
        return tuple(self.images.shape[1:3])

    def subset(self, indices) -> "Dataset":
        idx = [int(i) for i in indices]
        return Dataset(
            self.images[idx] if idx else self.images[:0],
            [self.labels[i] for i in idx],
            [self.source_ids[i] for i in idx],
            self.format,
            [self.origins[i] for i in idx],
        )

    @staticmethod
    def concat(parts: list["Dataset"]) -> "Dataset":
        if not parts:
            raise ValueError("nothing to concatenate")
        fmt = parts[0].format
        return Dataset(
            np.concatenate([p.images for p in parts]),
            [lab for p in parts for lab in p.labels],
            [s for p in parts for s in p.source_ids],
            fmt,
            [o for p in parts for o in p.origins],
            [s for p in parts for s in p.skipped],
        )


# -- synthetic generation ---------------------------------------------------

def random_label(fmt: SequenceFormat, rng: np.random.Generator) -> TokenLabel:
    """A uniformly drawn non-empty label: day 1-31, month 1-12 or wildcard, free year digits."""
    day = str(int(rng.integers(1, 32)))
    month_choices = [str(m) for m in range(1, 13)] + [WILDCARD]
    month = month_choices[int(rng.integers(len(month_choices)))]
    year = "".join(DIGITS[int(d)] for d in rng.integers(0, 10, size=fmt.year_digits))
    return parse_label(day, month, year, fmt)


def _render_one(args):
    label, style, seed, size = args
    return render_date(label, style, seed, size)


def generate_dataset(
    n: int,
    fmt: SequenceFormat | str,
    empty_fraction: float = 0.1,
    style: StyleParams | None = None,
    seed: int = 0,
    size: tuple[int, int] = DEFAULT_SIZE,
    workers: int = 1,
    origin: str = DEFAULT_ORIGIN,
) -> Dataset:
    """``n`` rendered images of which exactly ``floor(empty_fraction * n)`` are empty.

    Every image has its own seed spawned from ``seed``, so the output does
    not depend on ``workers``.
    """
    fmt = SequenceFormat.parse(fmt)
    if not 0 <= empty_fraction < 1:
        raise ValueError("empty_fraction must be in [0, 1)")
    if n < 0:
        raise ValueError("n must be non-negative")
    style = style or StyleParams()
    label_seq, render_seq = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(label_seq)
    n_empty = math.floor(empty_fraction * n)
    empty = np.zeros(n, dtype=bool)
    empty[rng.permutation(n)[:n_empty]] = True
    labels = [TokenLabel.empty(fmt) if e else random_label(fmt, rng) for e in empty]
    jobs = [(lab, style, s, size) for lab, s in zip(labels, render_seq.spawn(n))]
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            images = list(pool.map(_render_one, jobs, chunksize=max(1, n // (4 * workers))))
    else:
        images = [_render_one(j) for j in jobs]
    stack = np.stack(images) if images else np.zeros((0,) + tuple(size), dtype=np.float32)
    ids = [f"{origin}-{seed}-{i:06d}" for i in range(n)]
    return Dataset(stack, labels, ids, fmt, [origin] * n)


# -- ingestion ----------------------------------------------------------------

def fit_image(img: Image.Image, size: tuple[int, int] = DEFAULT_SIZE) -> np.ndarray:
    """Grayscale, aspect-preserving resize into ``size`` with white padding."""
    H, W = size
    gray = img.convert("L")
    w, h = gray.size
    if (h, w) != (H, W):
        scale = min(H / h, W / w)
        nw, nh = max(1, round(w * scale)), max(1, round(h * scale))
        gray = gray.resize((nw, nh), resample=Image.BILINEAR)
        canvas = Image.new("L", (W, H), 255)
        canvas.paste(gray, ((W - nw) // 2, (H - nh) // 2))
        gray = canvas
    return np.asarray(gray, dtype=np.float32) / 255.0


def load_dataset(
    image_dir,
    labels_csv,
    fmt: SequenceFormat | str,
    size: tuple[int, int] = DEFAULT_SIZE,
    origin: str | None = None,
) -> Dataset:
    """Read ``image_path,day,month,year`` rows; bad rows land in ``Dataset.skipped``."""
    fmt = SequenceFormat.parse(fmt)
    image_dir, labels_csv = Path(image_dir), Path(labels_csv)
    if not labels_csv.is_file():
        raise MissingFile(f"labels file not found: {labels_csv}")
    if not image_dir.is_dir():
        raise MissingFile(f"image directory not found: {image_dir}")
    origin = origin or image_dir.name
    images, labels, ids, skipped = [], [], [], []
    seen: set[str] = set()
    with labels_csv.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return Dataset(np.zeros((0,) + tuple(size)), [], [], fmt)
        missing = [c for c in CSV_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise BadCSV(f"{labels_csv}: missing columns {missing}; expected {list(CSV_COLUMNS)}")
        for row in reader:
            rel = (row["image_path"] or "").strip()
            try:
                if not rel:
                    raise BadCSV("empty image_path")
                if rel in seen:
                    raise BadCSV("duplicate image_path")
                label = parse_label(row["day"], row["month"], row["year"], fmt)
                path = image_dir / rel
                if not path.is_file():
                    raise MissingFile(f"image not found: {path}")
                with Image.open(path) as im:
                    pixels = fit_image(im, size)
            except (DatelinkError, OSError) as exc:
                skipped.append((rel, str(exc)))
                continue
            images.append(pixels)
            labels.append(label)
            ids.append(rel)
            seen.add(rel)
    stack = np.stack(images) if images else np.zeros((0,) + tuple(size), dtype=np.float32)
    return Dataset(stack, labels, ids, fmt, [origin] * len(ids), skipped)


def save_dataset(dataset: Dataset, out_dir, seed=None, style: StyleParams | None = None) -> Path:
    """Write ``images/*.png``, ``labels.csv`` and ``manifest.json`` under ``out_dir``."""
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    with (out / "labels.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for i, (img, lab) in enumerate(zip(dataset.images, dataset.labels)):
            rel = f"images/{i:06d}.png"
            pixels = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
            Image.fromarray(pixels, mode="L").save(out / rel, optimize=False)
            w.writerow((rel, *label_parts(lab)))
    manifest = {
        "format": dataset.format.value,
        "n": len(dataset),
        "seed": seed,
        "style": style.to_dict() if style is not None else None,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


def open_saved(out_dir, size: tuple[int, int] | None = None) -> Dataset:
    """Reload a directory written by :func:`save_dataset`."""
    out = Path(out_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.is_file():
        raise MissingFile(f"no manifest.json in {out}")
    manifest = json.loads(manifest_path.read_text())
    fmt = SequenceFormat.parse(manifest["format"])
    if size is None:
        first = sorted((out / "images").glob("*.png"))
        size = Image.open(first[0]).size[::-1] if first else DEFAULT_SIZE
    return load_dataset(out, out / "labels.csv", fmt, size=size, origin=out.name)


# -- splitting ------------------------------------------------------------------

def split(dataset: Dataset, test_fraction: float, seed: int = 0, stratify: bool = False):
    """Seeded shuffle, then partition into ``(train, test)``.

    The test part has ``round(test_fraction * n)`` items; with ``stratify``
    the rule is applied within each origin separately.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    if stratify:
        groups: dict[str, list[int]] = {}
        for i, o in enumerate(dataset.origins):
            groups.setdefault(o, []).append(i)
        train_idx, test_idx = [], []
        for o in sorted(groups):
            members = np.asarray(groups[o])[rng.permutation(len(groups[o]))]
            k = int(round(test_fraction * len(members)))
            test_idx.extend(members[:k])
            train_idx.extend(members[k:])
    else:
        order = rng.permutation(len(dataset))
        k = int(round(test_fraction * len(dataset)))
        test_idx, train_idx = order[:k], order[k:]
    return dataset.subset(sorted(train_idx)), dataset.subset(sorted(test_idx))


__all__ = [
    "CSV_COLUMNS", "Dataset", "random_label", "generate_dataset", "fit_image", "load_dataset",
    "save_dataset", "open_saved", "split",
]
