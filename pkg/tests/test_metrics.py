import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from datelink.dates import SequenceFormat, TokenLabel, parse_label
from datelink.errors import DegenerateBaseline, EmptyInput, EmptyReadableSet, FormatMismatch, ShapeMismatch
from datelink.metrics import (
    accuracy_from_percent,
    coverage_points,
    error_rate_reduction,
    kept_count,
    review_bounds,
    seq_acc,
    write_curve_csv,
)

from .oracles import coverage_accuracy_bruteforce, err_reduction_counts

DDM, DDMYY, DDMYYYY = SequenceFormat.DDM, SequenceFormat.DDMYY, SequenceFormat.DDMYYYY


# -- sequence accuracy ---------------------------------------------------------------

def test_seq_acc_groups():
    labels = [parse_label("28", "8", "33", DDMYY), parse_label("5", "1", "90", DDMYY)]
    preds = [parse_label("28", "8", "38", DDMYY), parse_label("5", "1", "90", DDMYY)]
    res = seq_acc(preds, labels)
    assert (res.seq_acc, res.day_acc, res.month_acc, res.year_acc, res.n) == (0.5, 1.0, 1.0, 0.5, 2)


def test_seq_acc_ddm_has_no_year():
    lab = [parse_label("1", "2", "", DDM)]
    assert seq_acc(lab, lab).year_acc is None


def test_seq_acc_on_token_arrays():
    y = np.array([[0, 1, 2], [1, 1, 1]])
    p = np.array([[0, 1, 2], [1, 0, 1]])
    res = seq_acc(p, y, fmt="DDM")
    assert res.seq_acc == 0.5 and res.day_acc == 0.5 and res.month_acc == 1.0


def test_seq_acc_projection_scores_last_two_year_digits():
    labels = [parse_label("28", "8", "1933", DDMYYYY)]
    preds = [parse_label("28", "8", "1833", DDMYYYY)]
    assert seq_acc(preds, labels).seq_acc == 0.0
    assert seq_acc(preds, labels, project_to=DDMYY).seq_acc == 1.0


def test_seq_acc_errors():
    a = [parse_label("1", "2", "", DDM)]
    b = [parse_label("1", "2", "33", DDMYY)]
    with pytest.raises(FormatMismatch):
        seq_acc(a, b)
    with pytest.raises(ShapeMismatch):
        seq_acc(a + a, a)
    with pytest.raises(EmptyInput):
        seq_acc([], [], fmt=DDM)
    with pytest.raises(FormatMismatch):
        seq_acc(a + b, a + b)


def _label_lists(fmt):
    heads = fmt.heads()
    one = st.tuples(*(st.integers(0, h.class_count - 1) for h in heads)).map(lambda t: TokenLabel(fmt, t))
    return st.lists(st.tuples(one, one), min_size=1, max_size=30)


@given(_label_lists(DDMYY))
def test_seq_acc_bounded_by_group_accuracies(pairs):
    preds, labels = zip(*pairs)
    res = seq_acc(list(preds), list(labels))
    assert 0 <= res.seq_acc <= min(res.day_acc, res.month_acc, res.year_acc) <= 1
    assert seq_acc(list(labels), list(labels)).seq_acc == 1.0


# -- coverage ----------------------------------------------------------------------------

def test_coverage_hand_example():
    conf = [0.9, 0.8, 0.6, 0.5]
    ok = [True, True, False, True]
    pts = dict(coverage_points(conf, ok, grid=(0.5, 0.75, 1.0)))
    assert pts == {0.5: 1.0, 0.75: 2 / 3, 1.0: 0.75}


def test_kept_count_uses_ceiling():
    assert kept_count(0.3, 10) == 3
    assert kept_count(0.31, 10) == 4
    assert kept_count(0.01, 10) == 1
    with pytest.raises(ValueError):
        kept_count(0.0, 10)


def test_coverage_ties_keep_input_order():
    pts = coverage_points([0.5, 0.5, 0.5], [False, True, True], grid=(0.3,))
    assert pts[0].accuracy == 0.0


@given(
    st.lists(st.tuples(st.floats(0, 1), st.booleans()), min_size=1, max_size=60),
    st.sampled_from([0.05, 0.1, 0.25, 0.3, 0.5, 0.7, 0.95, 1.0]),
)
def test_coverage_agrees_with_bruteforce(items, c):
    conf, ok = zip(*items)
    got = coverage_points(conf, ok, grid=(c,))[0].accuracy
    assert got == pytest.approx(coverage_accuracy_bruteforce(conf, ok, c), abs=1e-12)


def test_coverage_errors():
    with pytest.raises(EmptyInput):
        coverage_points([], [])
    with pytest.raises(ShapeMismatch):
        coverage_points([0.1], [True, False])
    with pytest.raises(ValueError):
        coverage_points([np.nan], [True])


def test_curve_csv(tmp_path):
    path = write_curve_csv(coverage_points([0.9, 0.1], [True, False], grid=(0.5, 1.0)), tmp_path / "c.csv")
    assert path.read_text().splitlines() == ["coverage,accuracy", "0.5000,1.000000", "1.0000,0.500000"]


# -- error rate reduction ------------------------------------------------------------------

def test_error_rate_reduction_basic():
    assert error_rate_reduction(0.9, 0.95) == pytest.approx(-50.0)
    assert error_rate_reduction(0.9, 0.8) == pytest.approx(100.0)
    with pytest.raises(DegenerateBaseline):
        error_rate_reduction(1.0, 0.9)
    with pytest.raises(ValueError):
        error_rate_reduction(1.1, 0.9)


@pytest.mark.parametrize("base_pct,new_pct,want", [(85.17, 96.18, -74.27), (85.17, 93.38, -55.37)])
def test_error_rate_reduction_from_reported_percentages(base_pct, new_pct, want):
    # Accuracies printed to two decimals are recovered as exact counts on the
    # 4139-image test set first; dividing the rounded percentages gives -74.24.
    n = 4139
    base, new = accuracy_from_percent(base_pct, n), accuracy_from_percent(new_pct, n)
    got = error_rate_reduction(base, new)
    oracle = err_reduction_counts(n, round((1 - base) * n), round((1 - new) * n))
    assert got == pytest.approx(float(oracle), abs=1e-9)
    assert abs(got - want) <= 0.01


@given(st.integers(1, 5000), st.data())
def test_error_rate_reduction_matches_counts(n, data):
    base_err = data.draw(st.integers(1, n))
    new_err = data.draw(st.integers(0, n))
    got = error_rate_reduction(1 - base_err / n, 1 - new_err / n)
    assert got == pytest.approx(float(err_reduction_counts(n, base_err, new_err)), abs=1e-7)


def test_accuracy_from_percent():
    assert accuracy_from_percent(85.17, 4139) == 3525 / 4139
    with pytest.raises(ValueError):
        accuracy_from_percent(50.0, 0)


# -- manual review ---------------------------------------------------------------------------

def test_review_bounds_examples():
    lo, hi, proj = review_bounds(907, 43, 50)
    assert (lo, hi) == (0.907, 0.957)
    assert proj == pytest.approx(907 / 950)
    assert review_bounds(0, 10, 5) == (0.0, 5 / 15, 0.0)
    with pytest.raises(EmptyReadableSet):
        review_bounds(0, 0, 5)
    with pytest.raises(ValueError):
        review_bounds(-1, 2, 0)


@given(st.integers(0, 1000), st.integers(0, 1000), st.integers(0, 1000))
def test_review_bounds_ordered(c, i, u):
    if c + i == 0:
        return
    lo, hi, proj = review_bounds(c, i, u)
    assert 0 <= lo <= proj <= hi + 1e-12 <= 1 + 1e-12
