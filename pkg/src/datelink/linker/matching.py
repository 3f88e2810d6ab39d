"""Exact matching of field predictions to manual records."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from ..dates import SequenceFormat
from .records import FIELDS, FieldPrediction, ManualRecord, comparable

Pair = tuple[str, str]


@dataclass(frozen=True)
class MatchCriteria:
    """When a prediction and a record count as the same person.

    A pair is a candidate when at least ``min_agreeing_fields`` of date,
    first name and last name agree and both sit in the same region (unless
    ``scope`` is ``None``).  With ``require_uniqueness`` a candidate is a
    match only if neither side has any other candidate.  Without it, the
    pair must be each side's unique best candidate by number of agreeing
    fields.  Dates are compared after projection to ``date_format``.
    """

    min_agreeing_fields: int = 2
    require_uniqueness: bool = True
    scope: str | None = "region_id"
    date_format: SequenceFormat = SequenceFormat.DDMYY

    def __post_init__(self):
        if not 1 <= self.min_agreeing_fields <= len(FIELDS):
            raise ValueError(f"min_agreeing_fields must be in 1..{len(FIELDS)}")
        if self.scope not in ("region_id", None):
            raise ValueError("scope must be 'region_id' or None")
        object.__setattr__(self, "date_format", SequenceFormat.parse(self.date_format))


def _keyed(items, criteria: MatchCriteria):
    """``(id, region, comparable values)`` per item."""
    out = []
    for it in items:
        ident = it.image_id if isinstance(it, FieldPrediction) else it.record_id
        region = it.region_id if criteria.scope else ""
        out.append((ident, region, tuple(comparable(it, f, criteria.date_format) for f in FIELDS)))
    return out


def candidate_scores(
    preds: Sequence[FieldPrediction], records: Sequence[ManualRecord], criteria: MatchCriteria
) -> dict[Pair, int]:
    """All candidate pairs with their number of agreeing fields.

    Records are blocked per region on every ``k``-subset of fields, so a
    prediction is only compared with records sharing at least one full key.
    """
    k = criteria.min_agreeing_fields
    subsets = list(combinations(range(len(FIELDS)), k))
    index: dict[tuple, list[int]] = defaultdict(list)
    recs = _keyed(records, criteria)
    for ri, (_, region, vals) in enumerate(recs):
        for sub in subsets:
            key = tuple(vals[j] for j in sub)
            if None not in key:
                index[(region, sub, key)].append(ri)
    scores: dict[Pair, int] = {}
    for pid, region, vals in _keyed(preds, criteria):
        seen: set[int] = set()
        for sub in subsets:
            key = tuple(vals[j] for j in sub)
            if None in key:
                continue
            for ri in index.get((region, sub, key), ()):
                if ri in seen:
                    continue
                seen.add(ri)
                rvals = recs[ri][2]
                agree = sum(a is not None and a == b for a, b in zip(vals, rvals))
                scores[(pid, recs[ri][0])] = agree
    return scores


def _select(scores: dict[Pair, int], require_uniqueness: bool) -> set[Pair]:
    by_pred: dict[str, list[tuple[int, str]]] = defaultdict(list)
    by_rec: dict[str, list[tuple[int, str]]] = defaultdict(list)
    for (p, r), s in scores.items():
        by_pred[p].append((s, r))
        by_rec[r].append((s, p))
    out = set()
    if require_uniqueness:
        for p, cands in by_pred.items():
            if len(cands) == 1:
                r = cands[0][1]
                if len(by_rec[r]) == 1:
                    out.add((p, r))
        return out

    def unique_best(cands):
        best = max(s for s, _ in cands)
        winners = [x for s, x in cands if s == best]
        return winners[0] if len(winners) == 1 else None

    for p, cands in by_pred.items():
        r = unique_best(cands)
        if r is not None and unique_best(by_rec[r]) == p:
            out.add((p, r))
    return out


def exact_match(
    preds: Sequence[FieldPrediction], records: Sequence[ManualRecord], criteria: MatchCriteria | None = None
) -> set[Pair]:
    """One matching pass; returns ``(image_id, record_id)`` pairs, one-to-one."""
    criteria = criteria or MatchCriteria()
    return _select(candidate_scores(preds, records, criteria), criteria.require_uniqueness)


def match_until_stable(
    preds: Sequence[FieldPrediction], records: Sequence[ManualRecord], criteria: MatchCriteria | None = None
) -> dict[Pair, int]:
    """Repeat :func:`exact_match`, removing matched images and records, until nothing new matches.

    Removing a matched record can make a previously ambiguous prediction
    unique.  Returns each pair with the pass (from 0) in which it matched.
    """
    criteria = criteria or MatchCriteria()
    preds, records = list(preds), list(records)
    found: dict[Pair, int] = {}
    npass = 0
    while preds and records:
        new = exact_match(preds, records, criteria)
        if not new:
            break
        for pair in new:
            found[pair] = npass
        used_p = {p for p, _ in new}
        used_r = {r for _, r in new}
        preds = [p for p in preds if p.image_id not in used_p]
        records = [r for r in records if r.record_id not in used_r]
        npass += 1
    return found


def intersect_matches(a: Iterable[Pair], b: Iterable[Pair]) -> set[Pair]:
    return set(a) & set(b)


def split_matches(matches: Iterable[Pair], seed: int) -> tuple[set[Pair], set[Pair]]:
    """Seeded 50/50 partition; with an odd count the seed decides which side gets the extra pair."""
    ordered = sorted(set(matches))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ordered))
    half = len(ordered) // 2 + (int(rng.integers(2)) if len(ordered) % 2 else 0)
    a = {ordered[i] for i in perm[:half]}
    b = {ordered[i] for i in perm[half:]}
    return a, b


def is_one_to_one(pairs: Iterable[Pair]) -> bool:
    pairs = list(pairs)
    return len({p for p, _ in pairs}) == len(pairs) == len({r for _, r in pairs})
