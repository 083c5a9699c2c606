"""Exact arithmetic on the unit interval.

All quantities in this package (probabilities, fuzzy degrees, label
distances, thresholds, tolerances) are exact rationals in [0, 1].  The
lattice/monoid structure used throughout is: meet/join are min/max, and
addition/subtraction truncate at the interval bounds.  Floating point is
never used: the game and the solvers decide strict inequalities, which are
not robust under rounding.
"""

from __future__ import annotations

from fractions import Fraction


class Value(Fraction):
    """An exact rational constrained to [0, 1].

    Instances are immutable, hashable and ordered; ordinary Fraction
    arithmetic on them may leave the interval (and then returns a plain
    Fraction), so use :func:`truncated_add` / :func:`truncated_sub` when a
    Value result is required.
    """

    __slots__ = ()

    def __new__(cls, numerator=0, denominator=None):
        v = super().__new__(cls, numerator, denominator)
        if v < 0 or v > 1:
            raise ValueError(f"value {str(Fraction(v))} outside [0, 1]")
        return v

    def __str__(self) -> str:
        return format_value(self)

    def __repr__(self) -> str:
        return f"Value({format_value(self)!r})"


ZERO = Value(0)
ONE = Value(1)


def truncated_add(a: Value, b: Value) -> Value:
    """min(a + b, 1)."""
    s = Fraction(a) + Fraction(b)
    return ONE if s > 1 else Value(s)


def truncated_sub(a: Value, b: Value) -> Value:
    """max(a - b, 0)."""
    s = Fraction(a) - Fraction(b)
    return ZERO if s < 0 else Value(s)


def meet(a: Value, b: Value) -> Value:
    return a if a <= b else b


def join(a: Value, b: Value) -> Value:
    return a if a >= b else b


def complement(a: Value) -> Value:
    """1 - a (well-defined on the unit interval)."""
    return Value(1 - Fraction(a))


def parse_value(text: str) -> Value:
    """Parse "p/q", a finite decimal such as "0.9", or an integer literal.

    Decimals convert exactly ("0.9" becomes 9/10).  Raises ValueError for
    malformed input or values outside [0, 1].
    """
    text = text.strip()
    try:
        frac = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {text!r}") from exc
    return Value(frac)


def format_value(v: Fraction) -> str:
    """Canonical rendering: "p/q", or just "p" for integral values."""
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"
