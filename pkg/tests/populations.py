"""Small random linking populations with plenty of collisions.

Values come from tiny pools so that duplicate and ambiguous candidates are
common, and are written with varying case, spacing, year width, leading
zeros, ditto marks and blanks so that normalization is exercised too.
"""
from __future__ import annotations

import numpy as np

from datelink.linker import FieldPrediction, ManualRecord

FIRST = ("Anna", "Jens", "Karen", "Hans")
LAST = ("Hansen", "Jensen", "Nielsen")
DATES = ((28, 8, 1933), (5, 1, 1890), (28, 8, 1833), (12, 3, None), (5, 10, 1893))


def _name(rng, pool):
    r = rng.random()
    if r < 0.05:
        return ""
    if r < 0.1:
        return str(rng.choice(['"', "do.", "Ditto", "-"]))
    v = str(rng.choice(pool))
    if rng.random() < 0.3:
        v = v.upper()
    if rng.random() < 0.2:
        v = f"  {v} "
    return v


def _date(rng):
    r = rng.random()
    if r < 0.05:
        return ""
    if r < 0.08:
        return '"'
    if r < 0.1:
        return "garbage"
    d, m, y = DATES[int(rng.integers(len(DATES)))]
    day = f"{d:02d}" if rng.random() < 0.2 else str(d)
    if y is None:
        return f"{day}-{m}"
    year = str(y) if rng.random() < 0.5 else str(y)[-2:]
    return f"{day}-{m}-{year}"


def random_population(seed: int, max_size: int = 200) -> tuple[list[FieldPrediction], list[ManualRecord]]:
    """Predictions and records in one to three regions, sizes summing to at most ``max_size``."""
    rng = np.random.default_rng(seed)
    n_regions = int(rng.integers(1, 4))
    n_pred = int(rng.integers(0, max_size // 2 + 1))
    n_rec = int(rng.integers(0, max_size - n_pred + 1))
    regions = [f"R{k}" for k in range(n_regions)]
    preds = [
        FieldPrediction(f"img-{i}", str(rng.choice(regions)), _date(rng), _name(rng, FIRST), _name(rng, LAST))
        for i in range(n_pred)
    ]
    records = [
        ManualRecord(f"rec-{i}", str(rng.choice(regions)), _name(rng, FIRST), _name(rng, LAST), _date(rng))
        for i in range(n_rec)
    ]
    return preds, records
