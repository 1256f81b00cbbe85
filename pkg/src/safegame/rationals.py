"""Exact rational parsing and formatting helpers."""

from __future__ import annotations

import decimal
import re
from fractions import Fraction
from typing import Union

Rational = Fraction
RationalLike = Union[int, str, Fraction]

_FRACTION_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")
_DECIMAL_RE = re.compile(r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\s*$")

APPROX_DIGITS = 6


def to_rational(value: RationalLike) -> Fraction:
    """Normalize an integer, decimal string or ``"a/b"`` string to a Fraction.

    Binary floats are refused: they cannot carry the exact values the
    equilibrium conditions depend on.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, decimal.Decimal):
        if not value.is_finite():
            raise ValueError(f"non-finite number {value!r}")
        return Fraction(value)
    if isinstance(value, float):
        raise TypeError(f"binary float {value!r} is not exact; pass a string such as '8.2'")
    if isinstance(value, str):
        m = _FRACTION_RE.match(value)
        if m:
            den = int(m.group(2))
            if den == 0:
                raise ValueError(f"zero denominator in {value!r}")
            return Fraction(int(m.group(1)), den)
        if _DECIMAL_RE.match(value):
            return Fraction(value.strip())
        raise ValueError(f"not an integer, decimal or a/b fraction: {value!r}")
    raise TypeError(f"unsupported numeric type {type(value).__name__}")


def format_exact(x: Fraction) -> str:
    """``"7/6"`` or ``"3"``; parses back to the same value via to_rational."""
    return str(x)


def format_approx(x: Fraction, digits: int = APPROX_DIGITS) -> str:
    """Round-half-even decimal approximation with ``digits`` significant digits."""
    ctx = decimal.Context(prec=digits, rounding=decimal.ROUND_HALF_EVEN)
    d = ctx.divide(decimal.Decimal(x.numerator), decimal.Decimal(x.denominator))
    return format(d, "f")


def format_mixed(x: Fraction) -> str:
    """Mixed-number rendering used in tables, e.g. ``1 1/6``."""
    if x.denominator == 1 or abs(x) < 1:
        return str(x)
    whole = int(x)
    rest = abs(x - whole)
    return f"{whole} {rest}"
