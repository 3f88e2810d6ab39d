"""Iterative link-and-retrain pipeline with two sample-split model sets.

Round 0 predicts every image with the base recognizers and matches them to
the manual records.  Each later round predicts all images with two model
sets, each trained on one half of the previous round's matches, matches
both prediction sets independently and keeps only the pairs found by both.
A wrong pair that one set memorized is unlikely to be reproduced by the
other set and drops out.  After the last round a single model set is
trained on the whole final intersection and produces the final links.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .matching import MatchCriteria, Pair, intersect_matches, match_until_stable, split_matches
from .records import FIELDS, CensusImage, FieldPrediction, ManualRecord

log = logging.getLogger(__name__)

ModelSet = Mapping[str, Any]
LINK_COLUMNS = ("image_id", "record_id", "round_found")
SIDES = ("A", "B")


@dataclass(frozen=True)
class LinkConfig:
    rounds: int = 5
    stop_gain_threshold: float = 0.005
    criteria: MatchCriteria = field(default_factory=MatchCriteria)
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.stop_gain_threshold < 0:
            raise ValueError("stop_gain_threshold must be >= 0")


@dataclass(frozen=True)
class RoundReport:
    round: int
    matches_A: int
    matches_B: int
    intersection: int
    gain: int

    @property
    def no_progress(self) -> bool:
        return self.gain <= 0

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "matches_A": self.matches_A,
            "matches_B": self.matches_B,
            "intersection": self.intersection,
            "gain": self.gain,
        }


@dataclass
class LinkState:
    """Pipeline bookkeeping.

    ``round`` is the last completed round (-1 before round 0).  ``matches``
    maps the current intersection to the round in which each pair first
    appeared in any intersection.  ``model_sets`` are the two sets trained
    at the end of the last round (``None`` until round 0 has trained).
    """

    round: int = -1
    matches: dict[Pair, int] = field(default_factory=dict)
    split_assignment: dict[str, str] = field(default_factory=dict)
    history: list[RoundReport] = field(default_factory=list)
    model_sets: tuple[ModelSet, ModelSet] | None = None
    first_seen: dict[Pair, int] = field(default_factory=dict)


@dataclass
class PipelineResult:
    final_models: ModelSet
    links: dict[Pair, int]
    report: list[RoundReport]
    state: LinkState


def predict_all(models: ModelSet, images: Sequence[CensusImage]) -> list[FieldPrediction]:
    """Run every field recognizer over ``images``."""
    per_field = {name: models[name].predict(images) for name in FIELDS}
    out = []
    for i, img in enumerate(images):
        out.append(FieldPrediction(
            image_id=img.image_id,
            region_id=img.region_id,
            date=per_field["date"][i][0],
            first_name=per_field["first_name"][i][0],
            last_name=per_field["last_name"][i][0],
            confidence={name: per_field[name][i][1] for name in FIELDS},
        ))
    return out


def match_round(
    state: LinkState,
    images: Sequence[CensusImage],
    records: Sequence[ManualRecord],
    cfg: LinkConfig,
    base_models: ModelSet | None = None,
) -> tuple[set[Pair], RoundReport]:
    """Predict and match with both model sets (or the base set in round 0) and intersect."""
    rnd = state.round + 1
    if state.model_sets is None:
        if base_models is None:
            raise ValueError("round 0 needs base models")
        found = set(match_until_stable(predict_all(base_models, images), records, cfg.criteria))
        found_a = found_b = found
    else:
        set_a, set_b = state.model_sets
        found_a = set(match_until_stable(predict_all(set_a, images), records, cfg.criteria))
        found_b = set(match_until_stable(predict_all(set_b, images), records, cfg.criteria))
    inter = intersect_matches(found_a, found_b)
    report = RoundReport(rnd, len(found_a), len(found_b), len(inter), len(inter) - len(state.matches))
    return inter, report


def _seed(cfg_seed: int, *parts: int) -> int:
    return int(np.random.SeedSequence([cfg_seed, *parts]).generate_state(1)[0])


def training_pairs(
    pairs: Sequence[Pair], images: Sequence[CensusImage], records: Sequence[ManualRecord], name: str
) -> list[tuple[CensusImage, str]]:
    """Images labelled with the matched record's field (the manual transcription)."""
    by_img = {img.image_id: img for img in images}
    by_rec = {r.record_id: r for r in records}
    return [(by_img[p], by_rec[r].field(name)) for p, r in sorted(pairs)]


def train_model_set(
    pairs: Sequence[Pair], images, records, trainers: Mapping[str, Any], seed: int
) -> dict[str, Any]:
    return {
        name: trainers[name].train(training_pairs(pairs, images, records, name), _seed(seed, k))
        for k, name in enumerate(FIELDS)
    }


def train_round(
    matches: set[Pair], images, records, trainers: Mapping[str, Any], cfg: LinkConfig, rnd: int
) -> tuple[tuple[ModelSet, ModelSet], dict[str, str]]:
    """Split ``matches`` 50/50 and train one model set per half."""
    part_a, part_b = split_matches(matches, _seed(cfg.seed, rnd, 0))
    assignment = {p: "A" for p, _ in part_a} | {p: "B" for p, _ in part_b}
    set_a = train_model_set(sorted(part_a), images, records, trainers, _seed(cfg.seed, rnd, 1))
    set_b = train_model_set(sorted(part_b), images, records, trainers, _seed(cfg.seed, rnd, 2))
    return (set_a, set_b), assignment


def _record(state: LinkState, inter: set[Pair], report: RoundReport) -> None:
    state.round = report.round
    for pair in inter:
        state.first_seen.setdefault(pair, report.round)
    state.matches = {pair: state.first_seen[pair] for pair in inter}
    state.history.append(report)


def run_round(
    state: LinkState,
    images: Sequence[CensusImage],
    records: Sequence[ManualRecord],
    trainers: Mapping[str, Any],
    cfg: LinkConfig,
    base_models: ModelSet | None = None,
    train_next: bool = True,
) -> LinkState:
    """Match with the current model sets, then (optionally) train the next pair of sets."""
    inter, report = match_round(state, images, records, cfg, base_models)
    _record(state, inter, report)
    log.info("round %d: A=%d B=%d intersection=%d gain=%d", report.round, report.matches_A,
             report.matches_B, report.intersection, report.gain)
    if train_next and inter:
        state.model_sets, state.split_assignment = train_round(inter, images, records, trainers, cfg, report.round)
    return state


def run_pipeline(
    images: Sequence[CensusImage],
    records: Sequence[ManualRecord],
    base_models: ModelSet,
    trainers: Mapping[str, Any],
    cfg: LinkConfig | None = None,
) -> PipelineResult:
    """Round 0 plus up to ``cfg.rounds - 1`` retraining rounds, then a final model set.

    Stops early when a round (after round 0) adds fewer than
    ``stop_gain_threshold`` times the number of records, or when nothing
    matched.  The final set is trained on all pairs of the last
    intersection; final links come from its predictions.
    """
    cfg = cfg or LinkConfig()
    state = LinkState()
    pool = len(records)
    for rnd in range(cfg.rounds):
        inter, report = match_round(state, images, records, cfg, base_models)
        _record(state, inter, report)
        log.info("round %d: A=%d B=%d intersection=%d gain=%d", rnd, report.matches_A,
                 report.matches_B, report.intersection, report.gain)
        last = rnd == cfg.rounds - 1
        stalled = rnd >= 1 and report.gain < cfg.stop_gain_threshold * pool
        if last or stalled or not inter:
            break
        state.model_sets, state.split_assignment = train_round(inter, images, records, trainers, cfg, rnd)
    if state.matches:
        final_models = train_model_set(sorted(state.matches), images, records, trainers, _seed(cfg.seed, 10_000))
    else:
        final_models = dict(base_models)
    final_pairs = match_until_stable(predict_all(final_models, images), records, cfg.criteria)
    final_round = state.round + 1
    links = {pair: state.first_seen.get(pair, final_round) for pair in final_pairs}
    return PipelineResult(final_models, links, list(state.history), state)


def write_links_csv(links: Mapping[Pair, int], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LINK_COLUMNS)
        for (img, rec), rnd in sorted(links.items()):
            w.writerow((img, rec, rnd))
    return path


def write_report_json(report: Sequence[RoundReport], path) -> Path:
    path = Path(path)
    path.write_text(json.dumps([r.to_dict() for r in report], indent=2) + "\n")
    return path
