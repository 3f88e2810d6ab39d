"""Synthetic census populations with known identities, for simulating the linker."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..corpus.render import StyleParams, render_date, render_text
from ..dates import SequenceFormat
from .matching import MatchCriteria, Pair, match_until_stable
from .pipeline import LinkConfig, LinkState, match_round, predict_all, train_model_set
from .recognizers import MockTrainer, mock_model_set
from .records import FIELDS, CensusImage, FieldPrediction, ManualRecord, comparable_date

FIRST_NAMES = (
    "ANNA", "KAREN", "MARIE", "KRISTINE", "ELLEN", "INGER", "JOHANNE", "MARGRETHE", "ELSE", "KIRSTEN",
    "DAGMAR", "ASTRID", "EMMA", "HELGA", "META", "OLGA", "AGNES", "INGEBORG", "KATHRINE", "GERDA",
    "JENS", "HANS", "NIELS", "PETER", "SOREN", "RASMUS", "LARS", "CHRISTIAN", "CARL", "POUL",
    "JORGEN", "ANDERS", "MADS", "KNUD", "SVEND", "AAGE", "VALDEMAR", "HOLGER", "AXEL", "VIGGO",
    "HENRIK", "FREDERIK", "JOHAN", "OLE", "THOMAS", "MARTIN", "EJNAR", "ERIK", "ALFRED", "KAJ",
)
LAST_NAMES = (
    "JENSEN", "NIELSEN", "HANSEN", "PEDERSEN", "ANDERSEN", "CHRISTENSEN", "LARSEN", "SORENSEN",
    "RASMUSSEN", "JORGENSEN", "PETERSEN", "MADSEN", "KRISTENSEN", "OLSEN", "THOMSEN", "CHRISTIANSEN",
    "POULSEN", "JOHANSEN", "MOLLER", "MORTENSEN", "KNUDSEN", "JAKOBSEN", "MIKKELSEN", "OLESEN",
    "FREDERIKSEN", "LAURSEN", "HENRIKSEN", "LUND", "SCHMIDT", "HOLM", "ERIKSEN", "KJAER", "ANDREASEN",
    "BACH", "IVERSEN", "SIMONSEN", "BERTELSEN", "MUNK", "DAMGAARD", "BECK",
)
DITTO = '"'
FIRST_DAY, LAST_DAY = dt.date(1830, 1, 1), dt.date(1916, 2, 1)


def zipf_weights(n: int, s: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


@dataclass
class CensusScenario:
    records: list[ManualRecord]
    images: list[CensusImage]
    truth: dict[str, str]
    date_format: SequenceFormat = SequenceFormat.DDMYY


def _date_string(rng: np.random.Generator) -> str:
    span = (LAST_DAY - FIRST_DAY).days
    d = FIRST_DAY + dt.timedelta(days=int(rng.integers(span)))
    return f"{d.day}-{d.month}-{d.year}"


def make_census(
    n_records: int = 5000,
    region_size: tuple[int, int] = (30, 70),
    extra_image_frac: float = 0.03,
    missing_image_frac: float = 0.02,
    ditto_frac: float = 0.05,
    name_zipf: float = 1.0,
    seed: int = 0,
    render: Sequence[str] = (),
    style: StyleParams | None = None,
    date_size: tuple[int, int] = (64, 160),
    name_size: tuple[int, int] = (32, 128),
) -> CensusScenario:
    """A census of ``n_records`` people spread over regions.

    Some people have no image (``missing_image_frac``) and some images show
    people absent from the records (``extra_image_frac``).  A ``ditto_frac``
    share of last names is written as a ditto mark on both sides.  Fields
    named in ``render`` (any of date, first_name, last_name) also get pixel
    arrays in the image payload.
    """
    rng = np.random.default_rng(seed)
    first_w = zipf_weights(len(FIRST_NAMES), name_zipf)
    last_w = zipf_weights(len(LAST_NAMES), name_zipf)

    def person():
        first = FIRST_NAMES[rng.choice(len(FIRST_NAMES), p=first_w)]
        last = DITTO if rng.random() < ditto_frac else LAST_NAMES[rng.choice(len(LAST_NAMES), p=last_w)]
        return first, last, _date_string(rng)

    regions: list[str] = []
    while len(regions) < n_records:
        size = int(rng.integers(region_size[0], region_size[1] + 1))
        regions.extend([f"R{len(set(regions)):04d}"] * size)
    regions = regions[:n_records]

    people = [(regions[i], *person()) for i in range(n_records)]
    records = [
        ManualRecord(f"rec-{i:06d}", reg, first, last, date)
        for i, (reg, first, last, date) in enumerate(people)
    ]
    region_names = sorted(set(regions))
    has_image = rng.random(n_records) >= missing_image_frac
    n_extra = int(round(extra_image_frac * n_records))
    extras = [(region_names[int(rng.integers(len(region_names)))], *person()) for _ in range(n_extra)]

    shown = [(i, people[i]) for i in range(n_records) if has_image[i]] + [(None, e) for e in extras]
    order = rng.permutation(len(shown))
    render_seeds = np.random.SeedSequence([seed, 7]).spawn(len(shown))
    images, truth = [], {}
    for k, pos in enumerate(order):
        rec_idx, (reg, first, last, date) = shown[pos]
        image_id = f"img-{k:06d}"
        payload = {"truth": {"date": date, "first_name": first, "last_name": last}}
        if render:
            payload["pixels"] = _render_fields(
                {"date": date, "first_name": first, "last_name": last}, render, render_seeds[k],
                style, date_size, name_size,
            )
        images.append(CensusImage(image_id, reg, k, payload))
        if rec_idx is not None:
            truth[image_id] = records[rec_idx].record_id
    return CensusScenario(records, images, truth)


def _render_fields(values, fields, seed_seq, style, date_size, name_size):
    seeds = dict(zip(FIELDS, seed_seq.spawn(len(FIELDS))))
    out = {}
    for name in fields:
        if name == "date":
            label = comparable_date(values["date"], SequenceFormat.DDMYY)
            out[name] = render_date(label, style, seeds[name], date_size)
        else:
            out[name] = render_text(values[name], style, seeds[name], name_size)
    return out


def perfect_predictions(scenario: CensusScenario) -> list[FieldPrediction]:
    return [
        FieldPrediction(img.image_id, img.region_id, img.payload["truth"]["date"],
                        img.payload["truth"]["first_name"], img.payload["truth"]["last_name"])
        for img in scenario.images
    ]


def matchable_pairs(scenario: CensusScenario, criteria: MatchCriteria | None = None) -> set[Pair]:
    """True pairs that matching recovers when every field is read perfectly."""
    found = match_until_stable(perfect_predictions(scenario), scenario.records, criteria or MatchCriteria())
    return {pair for pair in found if scenario.truth.get(pair[0]) == pair[1]}


@dataclass(frozen=True)
class LinkEvaluation:
    n_links: int
    n_correct: int
    n_matchable: int
    n_matchable_found: int

    @property
    def match_rate(self) -> float:
        return self.n_matchable_found / self.n_matchable if self.n_matchable else float("nan")

    @property
    def precision(self) -> float:
        return self.n_correct / self.n_links if self.n_links else float("nan")


def evaluate_links(links, scenario: CensusScenario, criteria: MatchCriteria | None = None) -> LinkEvaluation:
    pairs = set(links)
    matchable = matchable_pairs(scenario, criteria)
    correct = {p for p in pairs if scenario.truth.get(p[0]) == p[1]}
    return LinkEvaluation(len(pairs), len(correct), len(matchable), len(correct & matchable))


def default_mock_trainers(
    seed: int = 0, base_accuracy: float = 0.85, max_accuracy: float = 0.97, scale: float = 1500.0
) -> dict[str, MockTrainer]:
    return {
        name: MockTrainer(name, base_accuracy, max_accuracy, scale, seed=seed * 10 + k)
        for k, name in enumerate(FIELDS)
    }


@dataclass(frozen=True)
class PushOutOutcome:
    wrong_pair: Pair
    found_by_a: bool
    found_by_b: bool
    in_intersection: bool
    intersection: frozenset

    @property
    def pushed_out(self) -> bool:
        return self.found_by_a and not self.in_intersection


def push_out_scenario(cfg: LinkConfig | None = None) -> PushOutOutcome:
    """One region, five people, one corrupted training pair.

    Image ``img-0`` shows ANNA HANSEN, but set A is trained with the record
    of KAREN JENSEN (who has no image) as its label.  Set A memorizes and
    reproduces that wrong pair; set B, reading perfectly, links ``img-0`` to
    ANNA HANSEN instead, so the wrong pair cannot survive the intersection.
    """
    cfg = cfg or LinkConfig()
    people = [
        ("ANNA", "HANSEN", "1-2-1880"),
        ("KAREN", "JENSEN", "3-4-1885"),
        ("JENS", "NIELSEN", "5-6-1870"),
        ("MARIE", "LARSEN", "7-8-1890"),
        ("HANS", "PEDERSEN", "9-10-1875"),
    ]
    records = [ManualRecord(f"rec-{i}", "R0", f, l, d) for i, (f, l, d) in enumerate(people)]
    shown = [0, 2, 3, 4]
    images = [
        CensusImage(f"img-{k}", "R0", k,
                    {"truth": dict(zip(FIELDS, (people[i][2], people[i][0], people[i][1])))})
        for k, i in enumerate(shown)
    ]
    trainers = {name: MockTrainer(name, 1.0, 1.0, seed=k) for k, name in enumerate(FIELDS)}
    wrong: Pair = ("img-0", "rec-1")
    good = [(f"img-{k}", f"rec-{i}") for k, i in enumerate(shown)]
    part_a = [wrong, good[1]]
    part_b = [good[2], good[3]]
    set_a = train_model_set(part_a, images, records, trainers, seed=1)
    set_b = train_model_set(part_b, images, records, trainers, seed=2)
    state = LinkState(round=0, model_sets=(set_a, set_b))
    found_a = match_until_stable(predict_all(set_a, images), records, cfg.criteria)
    found_b = match_until_stable(predict_all(set_b, images), records, cfg.criteria)
    inter, _ = match_round(state, images, records, cfg)
    return PushOutOutcome(wrong, wrong in found_a, wrong in found_b, wrong in inter, frozenset(inter))

