import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from datelink.dates import SequenceFormat
from datelink.errors import BadCSV, MissingFile
from datelink.linker import (
    FieldPrediction,
    LinkConfig,
    LinkState,
    ManualRecord,
    MatchCriteria,
    MockTrainer,
    comparable_date,
    default_mock_trainers,
    evaluate_links,
    exact_match,
    intersect_matches,
    is_one_to_one,
    make_census,
    match_until_stable,
    mock_model_set,
    normalize_name,
    push_out_scenario,
    read_records_csv,
    run_pipeline,
    run_round,
    split_matches,
    write_links_csv,
    write_records_csv,
    write_report_json,
)
from datelink.linker.scenario import matchable_pairs, perfect_predictions

from .oracles import match_oracle
from .populations import random_population


def pred(i, date, first, last, region="R0"):
    return FieldPrediction(f"img-{i}", region, date, first, last)


def rec(i, date, first, last, region="R0"):
    return ManualRecord(f"rec-{i}", region, first, last, date)


# -- normalization -------------------------------------------------------------------

@given(st.text(max_size=20))
def test_normalize_idempotent(s):
    assert normalize_name(normalize_name(s)) == normalize_name(s)


def test_date_comparison_projects_years():
    fmt = SequenceFormat.DDMYY
    assert comparable_date("28-8-33", fmt) == comparable_date("28-08-1933", fmt)
    assert comparable_date("28-8-33", fmt) != comparable_date("28-8-34", fmt)
    assert comparable_date("", fmt) is None
    assert comparable_date('"', fmt) is None
    assert comparable_date("31-13-1900", fmt) is None


# -- exact matching --------------------------------------------------------------------

def test_two_of_three_match():
    p = [pred(0, "28-8-33", "Jens", "Hansen")]
    r = [rec(0, "28-8-33", "Jens", "Jensen")]
    assert exact_match(p, r) == {("img-0", "rec-0")}


def test_duplicate_candidates_block_the_match():
    p = [pred(0, "28-8-33", "Jens", "Hansen")]
    r = [rec(0, "28-8-33", "Jens", "Jensen"), rec(1, "28-8-33", "Jens", "Olsen")]
    assert exact_match(p, r) == set()
    # without the uniqueness rule, a strictly better candidate wins
    r.append(rec(2, "28-8-33", "JENS", " hansen "))
    assert exact_match(p, r, MatchCriteria(require_uniqueness=False)) == {("img-0", "rec-2")}


def test_matching_is_scoped_to_regions():
    p = [pred(0, "1-1-11", "Anna", "Holm", region="R1")]
    r = [rec(0, "1-1-11", "Anna", "Holm", region="R2")]
    assert exact_match(p, r) == set()
    assert exact_match(p, r, MatchCriteria(scope=None)) == {("img-0", "rec-0")}


def test_ditto_last_names_never_agree():
    p = [pred(0, "", "Anna", '"')]
    r = [rec(0, "", "Anna", '"')]
    assert exact_match(p, r) == set()


def test_criteria_validation():
    with pytest.raises(ValueError):
        MatchCriteria(min_agreeing_fields=0)
    with pytest.raises(ValueError):
        MatchCriteria(min_agreeing_fields=4)
    with pytest.raises(ValueError):
        MatchCriteria(scope="parish")


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3), st.booleans(), st.booleans())
def test_exact_match_equals_oracle(seed, k, unique, scoped):
    preds, records = random_population(seed, max_size=120)
    criteria = MatchCriteria(k, unique, "region_id" if scoped else None)
    got = exact_match(preds, records, criteria)
    assert got == match_oracle(preds, records, k=k, unique=unique, scoped=scoped)
    assert is_one_to_one(got)
    # set semantics: input order does not matter
    assert exact_match(preds[::-1], records[::-1], criteria) == got


def test_match_until_stable_frees_tied_predictions():
    # img-1 ties between rec-0 and rec-1 until img-0 takes rec-0 (unique-best mode).
    p = [pred(0, "1-1-11", "Anna", "Holm"), pred(1, "1-1-11", "Karen", "Holm")]
    r = [rec(0, "1-1-11", "Anna", "Holm"), rec(1, "1-1-11", "Karen", "Berg")]
    criteria = MatchCriteria(require_uniqueness=False)
    assert exact_match(p, r, criteria) == {("img-0", "rec-0")}
    assert match_until_stable(p, r, criteria) == {("img-0", "rec-0"): 0, ("img-1", "rec-1"): 1}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_match_until_stable_is_one_to_one(seed):
    preds, records = random_population(seed)
    # With strict uniqueness a matched record had no other candidate, so
    # removing it never unblocks anyone: one pass is already stable.
    assert set(match_until_stable(preds, records)) == exact_match(preds, records)
    loose = MatchCriteria(require_uniqueness=False)
    found = match_until_stable(preds, records, loose)
    assert is_one_to_one(found)
    assert exact_match(preds, records, loose) <= set(found)


# -- split and intersect ---------------------------------------------------------------------

def _pairs(n):
    return {(f"img-{i}", f"rec-{i}") for i in range(n)}


def test_split_sizes():
    a, b = split_matches(_pairs(8), seed=0)
    assert (len(a), len(b)) == (4, 4)
    a, b = split_matches(_pairs(7), seed=0)
    assert sorted((len(a), len(b))) == [3, 4]
    assert split_matches(_pairs(7), seed=0) == (a, b)


@given(st.integers(0, 200), st.integers(0, 10_000))
def test_split_is_balanced_partition(n, seed):
    m = _pairs(n)
    a, b = split_matches(m, seed)
    assert a | b == m and not a & b
    assert abs(len(a) - len(b)) <= 1


def test_intersect():
    a = _pairs(5)
    assert intersect_matches(a, a) == a
    assert intersect_matches(a, {("x", "y")}) == set()
    assert ("img-4", "rec-4") not in intersect_matches(a, _pairs(4))


# -- pipeline -----------------------------------------------------------------------------------

def test_push_out():
    out = push_out_scenario()
    assert out.found_by_a and not out.found_by_b
    assert not out.in_intersection and out.pushed_out
    # set A still misreads img-0, so img-0 stays unlinked this round
    assert out.intersection == {("img-1", "rec-2"), ("img-2", "rec-3"), ("img-3", "rec-4")}


def test_zero_records_give_zero_links():
    census = make_census(200, seed=1)
    trainers = default_mock_trainers(seed=1)
    res = run_pipeline(census.images, [], mock_model_set(trainers), trainers, LinkConfig(rounds=3))
    assert res.links == {}
    assert len(res.report) == 1 and res.report[0].intersection == 0
    assert res.state.model_sets is None


def test_perfect_recognizers_link_every_matchable_record():
    census = make_census(400, seed=2)
    trainers = {name: MockTrainer(name, 1.0, 1.0, seed=k) for k, name in enumerate(("date", "first_name", "last_name"))}
    state = run_round(LinkState(), census.images, census.records, trainers, LinkConfig(), mock_model_set(trainers))
    matchable = matchable_pairs(census)
    assert set(state.matches) >= matchable
    ev = evaluate_links(state.matches, census)
    assert ev.n_matchable_found == len(matchable)
    assert ev.match_rate == 1.0


def test_census_shape():
    census = make_census(500, seed=3)
    n_people = sum(1 for img in census.images if img.image_id in census.truth)
    assert 0.95 * 500 <= n_people <= 500
    assert len(census.images) > n_people
    assert len({r.record_id for r in census.records}) == 500
    assert all(p.region_id for p in perfect_predictions(census))


def test_split_assignment_is_balanced():
    census = make_census(300, seed=4)
    trainers = default_mock_trainers(seed=4)
    state = run_round(LinkState(), census.images, census.records, trainers, LinkConfig(), mock_model_set(trainers))
    sides = list(state.split_assignment.values())
    assert abs(sides.count("A") - sides.count("B")) <= 1
    assert len(sides) == len(state.matches)
    assert [h.round for h in state.history] == [0]


def test_pipeline_small_census(tmp_path):
    census = make_census(1000, seed=5)
    trainers = default_mock_trainers(seed=5)
    cfg = LinkConfig(rounds=3, seed=5)
    res = run_pipeline(census.images, census.records, mock_model_set(trainers), trainers, cfg)
    assert is_one_to_one(res.links)
    ev = evaluate_links(res.links, census)
    assert ev.precision > 0.97 and ev.match_rate > 0.85
    assert [r.round for r in res.report] == list(range(len(res.report)))
    assert all(0 <= rnd <= len(res.report) for rnd in res.links.values())

    again = run_pipeline(census.images, census.records, mock_model_set(trainers), trainers, cfg)
    a = write_links_csv(res.links, tmp_path / "a.csv").read_bytes()
    b = write_links_csv(again.links, tmp_path / "b.csv").read_bytes()
    assert a == b
    report = json.loads(write_report_json(res.report, tmp_path / "r.json").read_text())
    assert set(report[0]) == {"round", "matches_A", "matches_B", "intersection", "gain"}


def test_link_config_validation():
    with pytest.raises(ValueError):
        LinkConfig(rounds=0)
    with pytest.raises(ValueError):
        LinkConfig(stop_gain_threshold=-1)


# -- records CSV ---------------------------------------------------------------------------------

def test_records_csv_roundtrip(tmp_path):
    census = make_census(50, seed=6)
    path = write_records_csv(census.records, tmp_path / "records.csv")
    assert read_records_csv(path) == census.records


def test_records_csv_errors(tmp_path):
    with pytest.raises(MissingFile):
        read_records_csv(tmp_path / "none.csv")
    (tmp_path / "bad.csv").write_text("record_id,region_id\nr1,R0\n")
    with pytest.raises(BadCSV):
        read_records_csv(tmp_path / "bad.csv")
    (tmp_path / "dup.csv").write_text(
        "record_id,region_id,first_name,last_name,birth_date\nr1,R0,A,B,1-1-11\nr1,R0,C,D,2-2-22\n"
    )
    with pytest.raises(BadCSV):
        read_records_csv(tmp_path / "dup.csv")
    (tmp_path / "empty.csv").write_text("")
    assert read_records_csv(tmp_path / "empty.csv") == []
    with pytest.raises(ValueError):
        ManualRecord("r", "", "A", "B", "")
