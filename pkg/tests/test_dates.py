import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from datelink.dates import (
    MISSING,
    WILDCARD,
    SequenceFormat,
    TokenLabel,
    format_label,
    is_canonical,
    parse_date_string,
    parse_label,
    project_label,
)
from datelink.errors import FormatMismatch, OutOfAlphabet

DDM, DDMYY, DDMYYYY = SequenceFormat.DDM, SequenceFormat.DDMYY, SequenceFormat.DDMYYYY


def sym(fmt, *symbols):
    return TokenLabel.from_symbols(fmt, symbols)


def test_head_alphabets():
    heads = DDMYYYY.heads()
    assert [h.name for h in heads] == ["Day1", "Day2", "Month", "Year1", "Year2", "Year3", "Year4"]
    assert [h.class_count for h in heads] == [4, 11, 14, 11, 11, 11, 11]
    assert sum(h.class_count for h in heads) == 73
    assert heads[0].alphabet == ("1", "2", "3", MISSING)
    assert heads[2].alphabet[-2:] == (MISSING, WILDCARD)
    assert [f.head_count for f in SequenceFormat] == [3, 5, 7]


def test_ddmyy_uses_last_two_year_heads():
    assert DDMYY.head_names == ("Day1", "Day2", "Month", "Year3", "Year4")


def test_parse_full_date():
    lab = parse_label("28", "08", "33", DDMYY)
    assert lab.symbols == ("2", "8", "8", "3", "3")
    assert lab.tokens == (1, 8, 7, 3, 3)


def test_parse_single_digit_day_right_aligned():
    assert parse_label("5", "10", "93", DDMYY).symbols == (MISSING, "5", "10", "9", "3")


def test_parse_empty_is_all_missing():
    lab = parse_label("", "", "", DDMYYYY)
    assert lab.is_empty
    assert lab == TokenLabel.empty(DDMYYYY)


def test_parse_wildcard_month():
    assert parse_label("28", "=", "33", DDMYY).symbols == ("2", "8", WILDCARD, "3", "3")


def test_leading_zero_day_maps_day1_to_missing():
    assert parse_label("05", "1", "", DDM) == parse_label("5", "1", "", DDM)


def test_short_year_right_aligned():
    assert parse_label("1", "1", "3", DDMYY).symbols[3:] == (MISSING, "3")


@pytest.mark.parametrize("day,month", [("32", "8"), ("0", "8"), ("12", "13"), ("4x", "1"), ("1", "0")])
def test_parse_out_of_alphabet(day, month):
    with pytest.raises(OutOfAlphabet):
        parse_label(day, month, "", DDM)


def test_year_on_ddm_is_format_mismatch():
    with pytest.raises(FormatMismatch):
        parse_label("1", "1", "33", DDM)


def test_too_many_year_digits():
    with pytest.raises(FormatMismatch):
        parse_label("1", "1", "1933", DDMYY)


def test_format_examples():
    assert format_label(sym(DDMYY, "2", "8", "8", "3", "3")) == "28-8-33"
    assert format_label(sym(DDMYY, MISSING, "5", "10", "9", "3")) == "5-10-93"
    assert format_label(TokenLabel.empty(DDMYY)) == ""
    assert format_label(sym(DDM, "1", "2", "3")) == "12-3"


def test_format_checks_format():
    with pytest.raises(FormatMismatch):
        format_label(sym(DDM, "1", "2", "3"), DDMYY)


def test_token_label_validation():
    with pytest.raises(FormatMismatch):
        TokenLabel(DDM, (0, 0))
    with pytest.raises(OutOfAlphabet):
        TokenLabel(DDM, (4, 0, 0))


@pytest.mark.parametrize("fmt", list(SequenceFormat))
def test_parse_format_roundtrip_exhaustive_groups(fmt):
    """Every day x month combination, and every year group, round-trips (where canonical)."""
    heads = fmt.heads()
    day_month = itertools.product(heads[0].alphabet, heads[1].alphabet, heads[2].alphabet)
    year_choices = [()] if fmt.year_digits == 0 else list(
        itertools.product(*(h.alphabet for h in heads[3:]))
    )
    # full day/month grid with a fixed year, and full year grid with a fixed day/month
    fixed_year = year_choices[len(year_choices) // 3]
    checked = 0
    for d1, d2, m in day_month:
        lab = TokenLabel.from_symbols(fmt, (d1, d2, m) + tuple(fixed_year))
        if is_canonical(lab):
            assert parse_date_string(format_label(lab), fmt) == lab
            checked += 1
    for ys in year_choices:
        lab = TokenLabel.from_symbols(fmt, ("1", "5", "7") + tuple(ys))
        if is_canonical(lab):
            assert parse_date_string(format_label(lab), fmt) == lab
            checked += 1
    assert checked > 300


def test_canonical_labels_counted():
    # Day group: 31 valid days plus empty; Day1 set with Day2 missing is not canonical.
    canon = 0
    for d1, d2 in itertools.product(DDM.heads()[0].alphabet, DDM.heads()[1].alphabet):
        lab = TokenLabel.from_symbols(DDM, (d1, d2, "1"))
        canon += is_canonical(lab)
    assert canon == 32


def test_project_examples():
    full = sym(DDMYYYY, "1", "2", "3", "1", "9", "3", "3")
    assert project_label(full, DDMYYYY, DDMYY).symbols == ("1", "2", "3", "3", "3")
    short = sym(DDM, "1", "2", "3")
    assert project_label(short, DDM, DDMYYYY).symbols == ("1", "2", "3") + (MISSING,) * 4


def test_project_rejects_wrong_source():
    with pytest.raises(FormatMismatch):
        project_label(sym(DDM, "1", "2", "3"), DDMYY, DDM)


def test_project_ddmyy_roundtrip_exhaustive():
    heads = DDMYY.heads()
    for y3, y4 in itertools.product(heads[3].alphabet, heads[4].alphabet):
        lab = TokenLabel.from_symbols(DDMYY, ("2", "8", "=", y3, y4))
        up = project_label(lab, DDMYY, DDMYYYY)
        assert project_label(up, DDMYYYY, DDMYY) == lab


def labels(fmt):
    heads = fmt.heads()
    return st.tuples(*(st.integers(0, h.class_count - 1) for h in heads)).map(lambda t: TokenLabel(fmt, t))


@given(st.sampled_from(list(SequenceFormat)).flatmap(labels))
def test_project_identity(lab):
    assert project_label(lab, lab.fmt, lab.fmt) == lab


@given(labels(DDMYYYY))
def test_canonical_roundtrip_property(lab):
    if is_canonical(lab):
        assert parse_date_string(format_label(lab), DDMYYYY) == lab
    else:
        # non-canonical labels have a missing digit in front of a present one within a group
        syms = lab.symbols
        assert (syms[0] != MISSING and syms[1] == MISSING) or any(
            a != MISSING and b == MISSING for a, b in zip(syms[3:], syms[4:])
        ) or (syms[0] == "3" and syms[1] not in ("0", "1", MISSING)) or (syms[:2] == (MISSING, "0"))
