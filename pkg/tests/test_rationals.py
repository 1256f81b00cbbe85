from decimal import Decimal
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from safegame.rationals import format_approx, format_exact, format_mixed, to_rational


@pytest.mark.parametrize("raw, expect", [
    (3, F(3)),
    ("8.2", F(41, 5)),
    ("13.5", F(27, 2)),
    ("41/5", F(41, 5)),
    (" -7 / 3 ", F(-7, 3)),
    (".5", F(1, 2)),
    ("1e3", F(1000)),
    (Decimal("0.1"), F(1, 10)),
    (F(2, 3), F(2, 3)),
])
def test_parse(raw, expect):
    assert to_rational(raw) == expect


@pytest.mark.parametrize("raw", [0.1, True, None, [1]])
def test_rejects_non_exact_types(raw):
    with pytest.raises(TypeError):
        to_rational(raw)


@pytest.mark.parametrize("raw", ["1/0", "abc", "1/2/3", "", "nan", Decimal("Infinity")])
def test_rejects_malformed(raw):
    with pytest.raises(ValueError):
        to_rational(raw)


@pytest.mark.parametrize("x, expect", [
    (F(7, 6), "1.16667"),
    (F(62, 35), "1.77143"),
    (F(1, 3), "0.333333"),
    (F(3), "3"),
    (F(1234565, 10), "123456"),  # half-even: 123456.5 rounds down
    (F(1234575, 10), "123458"),
    (F(-29, 3), "-9.66667"),
])
def test_approx(x, expect):
    assert format_approx(x) == expect


def test_mixed_number():
    assert format_mixed(F(76, 5)) == "15 1/5"
    assert format_mixed(F(65, 6)) == "10 5/6"
    assert format_mixed(F(2, 3)) == "2/3"


@given(st.fractions())
def test_exact_round_trip(x):
    assert to_rational(format_exact(x)) == x
