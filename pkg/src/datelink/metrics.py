"""Accuracy, coverage and review metrics for date transcriptions."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .dates import SequenceFormat, TokenLabel, decomposed_groups, project_label
from .errors import DegenerateBaseline, EmptyInput, EmptyReadableSet, FormatMismatch, ShapeMismatch

DEFAULT_GRID = tuple(round(0.05 * k, 2) for k in range(1, 21))
_COVERAGE_SLACK = 1e-9


@dataclass(frozen=True)
class EvalResult:
    seq_acc: float
    day_acc: float
    month_acc: float
    year_acc: float | None
    n: int

    def as_row(self) -> dict:
        return {
            "seqacc": self.seq_acc,
            "dayacc": self.day_acc,
            "monthacc": self.month_acc,
            "yearacc": self.year_acc,
            "n": self.n,
        }


class CoveragePoint(NamedTuple):
    coverage: float
    accuracy: float


class ReviewBounds(NamedTuple):
    lower: float
    upper: float
    projected: float


def _as_tokens(items, fmt: SequenceFormat | None) -> tuple[np.ndarray, SequenceFormat | None]:
    if isinstance(items, np.ndarray):
        return np.asarray(items), fmt
    items = list(items)
    if not items:
        return np.zeros((0, fmt.head_count if fmt else 0), dtype=np.int64), fmt
    fmts = {lab.fmt for lab in items}
    if len(fmts) != 1:
        raise FormatMismatch(f"mixed formats: {sorted(f.value for f in fmts)}")
    return np.array([lab.tokens for lab in items], dtype=np.int64), fmts.pop()


def _project_all(items, source: SequenceFormat, target: SequenceFormat):
    return [project_label(lab, source, target) for lab in items]


def seq_acc(
    preds: Sequence[TokenLabel] | np.ndarray,
    labels: Sequence[TokenLabel] | np.ndarray,
    fmt: SequenceFormat | str | None = None,
    project_to: SequenceFormat | str | None = None,
) -> EvalResult:
    """Sequence accuracy plus day / month / year group accuracies.

    ``preds`` and ``labels`` are lists of :class:`TokenLabel` or token
    arrays ``(N, T)`` (then ``fmt`` names the format).  ``project_to``
    re-expresses both sides in another format first, e.g. scoring a
    DDMYYYY model on the DDMYY digits only.
    """
    fmt = SequenceFormat.parse(fmt) if fmt is not None else None
    if project_to is not None:
        if isinstance(preds, np.ndarray) or isinstance(labels, np.ndarray):
            raise FormatMismatch("project_to needs TokenLabel inputs")
        target = SequenceFormat.parse(project_to)
        src = fmt or (list(preds)[0].fmt if len(preds) else target)
        preds, labels, fmt = _project_all(preds, src, target), _project_all(labels, src, target), target
    p, pf = _as_tokens(preds, fmt)
    y, yf = _as_tokens(labels, fmt)
    if pf is not None and yf is not None and pf is not yf:
        raise FormatMismatch(f"predictions are {pf.value} but labels are {yf.value}")
    fmt = pf or yf
    if fmt is None:
        raise FormatMismatch("cannot infer the sequence format; pass fmt")
    if p.shape != y.shape:
        raise ShapeMismatch(f"predictions {p.shape} vs labels {y.shape}")
    if p.ndim != 2 or p.shape[1] != fmt.head_count:
        raise FormatMismatch(f"{fmt.value} needs {fmt.head_count} tokens per item, got {p.shape}")
    n = len(p)
    if n == 0:
        raise EmptyInput("no predictions to score")
    eq = p == y
    groups = decomposed_groups(fmt)
    group_acc = {k: float(np.mean(np.all(eq[:, s], axis=1))) for k, s in groups.items()}
    return EvalResult(
        seq_acc=float(np.mean(np.all(eq, axis=1))),
        day_acc=group_acc["day"],
        month_acc=group_acc["month"],
        year_acc=group_acc.get("year"),
        n=n,
    )


# -- coverage -------------------------------------------------------------------

def kept_count(coverage: float, n: int) -> int:
    """``ceil(c * n)``, with a small slack so that e.g. 0.3 * 10 keeps 3, not 4."""
    if not 0 < coverage <= 1:
        raise ValueError(f"coverage {coverage} outside (0, 1]")
    return max(1, min(n, math.ceil(coverage * n - _COVERAGE_SLACK)))


def confidence_order(confidence) -> np.ndarray:
    """Indices by descending confidence; ties keep input order."""
    conf = np.asarray(confidence, dtype=np.float64)
    return np.argsort(-conf, kind="stable")


def coverage_points(confidence, correct, grid=DEFAULT_GRID) -> list[CoveragePoint]:
    """Accuracy of the ``ceil(c * n)`` most confident items for each ``c`` in ``grid``."""
    conf = np.asarray(confidence, dtype=np.float64)
    ok = np.asarray(correct, dtype=bool)
    if conf.shape != ok.shape or conf.ndim != 1:
        raise ShapeMismatch(f"confidence {conf.shape} vs correct {ok.shape}")
    if len(conf) == 0:
        raise EmptyInput("no predictions for a coverage curve")
    if not np.all(np.isfinite(conf)):
        raise ValueError("confidence values must be finite")
    cum = np.cumsum(ok[confidence_order(conf)])
    points = []
    for c in sorted(float(g) for g in grid):
        k = kept_count(c, len(conf))
        points.append(CoveragePoint(c, float(cum[k - 1]) / k))
    return points


def coverage_curve(preds, labels, grid=DEFAULT_GRID) -> list[CoveragePoint]:
    """Coverage curve for model output ``preds`` (with ``.tokens``/``.confidence``) against labels."""
    tokens = np.asarray(preds.tokens)
    y, _ = _as_tokens(labels, getattr(preds, "fmt", None))
    if tokens.shape != y.shape:
        raise ShapeMismatch(f"predictions {tokens.shape} vs labels {y.shape}")
    return coverage_points(preds.confidence, np.all(tokens == y, axis=1), grid)


# -- summary statistics -----------------------------------------------------------

def error_rate_reduction(baseline_acc: float, new_acc: float) -> float:
    """Signed relative change in error rate, in percent (negative = fewer errors)."""
    for name, v in (("baseline_acc", baseline_acc), ("new_acc", new_acc)):
        if not 0 <= v <= 1:
            raise ValueError(f"{name} {v} outside [0, 1]")
    base_err = 1.0 - baseline_acc
    if base_err == 0:
        raise DegenerateBaseline("baseline accuracy is 1; error rate reduction is undefined")
    return 100.0 * ((1.0 - new_acc) - base_err) / base_err


def accuracy_from_percent(percent: float, n: int) -> float:
    """The exact accuracy ``k / n`` behind a percentage printed to two decimals."""
    if n <= 0:
        raise ValueError("n must be positive")
    return round(percent / 100.0 * n) / n


def review_bounds(n_correct: int, n_incorrect: int, n_unreadable: int) -> ReviewBounds:
    """Accuracy bounds when some reviewed items could not be read.

    ``lower`` counts every unreadable item as wrong, ``upper`` as right,
    and ``projected`` assumes the readable-item rate carries over.
    """
    c, i, u = n_correct, n_incorrect, n_unreadable
    if min(c, i, u) < 0:
        raise ValueError("counts must be non-negative")
    if c + i == 0:
        raise EmptyReadableSet("no readable items reviewed")
    total = c + i + u
    return ReviewBounds(c / total, (c + u) / total, c / (c + i))


# -- output ---------------------------------------------------------------------------

def write_curve_csv(points: Sequence[CoveragePoint], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("coverage", "accuracy"))
        for p in points:
            w.writerow((f"{p.coverage:.4f}", f"{p.accuracy:.6f}"))
    return path


REPORT_COLUMNS = ("dataset", "model", "sequence", "seqacc", "dayacc", "monthacc", "yearacc", "n")


def write_eval_report(rows: Sequence[tuple[str, str, SequenceFormat, EvalResult]], path) -> Path:
    """One line per evaluated (dataset, model) pair; missing year accuracy is left blank."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for dataset, model, fmt, res in rows:
            year = "" if res.year_acc is None else f"{res.year_acc:.6f}"
            w.writerow((dataset, model, fmt.value, f"{res.seq_acc:.6f}", f"{res.day_acc:.6f}",
                        f"{res.month_acc:.6f}", year, res.n))
    return path


def coverage_svg(curves: dict[str, Sequence[CoveragePoint]], path, width: int = 480, height: int = 320) -> Path:
    """A minimal line chart of accuracy against coverage, one polyline per curve."""
    pad = 40
    colours = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
    all_acc = [p.accuracy for pts in curves.values() for p in pts] or [0.0, 1.0]
    lo = min(all_acc)
    lo = max(0.0, math.floor(lo * 20) / 20 - 0.05) if lo < 1 else 0.9
    span = 1.0 - lo

    def xy(p):
        x = pad + p.coverage * (width - 2 * pad)
        y = height - pad - (p.accuracy - lo) / span * (height - 2 * pad)
        return f"{x:.1f},{y:.1f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle" font-size="12">coverage</text>',
        f'<text x="12" y="{pad - 10}" font-size="12">accuracy ({lo:.2f} to 1.00)</text>',
    ]
    for k, (name, pts) in enumerate(curves.items()):
        colour = colours[k % len(colours)]
        coords = " ".join(xy(p) for p in pts)
        parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="2" points="{coords}"/>')
        parts.append(f'<text x="{width - pad - 110}" y="{height - pad - 12 - 14 * k}" font-size="11" '
                     f'fill="{colour}">{name}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path
