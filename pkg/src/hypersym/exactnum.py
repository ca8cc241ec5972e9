"""Exact rational scalars, Pochhammer symbols and gamma-shift ratios.

Every coefficient in the engine is a ``fractions.Fraction`` (arbitrary
precision, always in lowest terms with positive denominator), so equality
checks downstream are exact.  Gamma functions are never evaluated: they only
ever occur in ratios of parameter-shifted instances, which collapse to
Pochhammer products.
"""

from __future__ import annotations

import re
from fractions import Fraction

Q = Fraction

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/[1-9]\d*)?$")


class DegenerateParameter(ValueError):
    """A parameter sits at (or a shift lands on) a non-positive integer pole."""


def parse_rational(text: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` into a Fraction.

    Decimal notation is rejected: a string like ``"0.5"`` would silently pass
    through ``Fraction`` and hide the fact that the caller started from a
    float.
    """
    s = text.strip()
    if not _RATIONAL_RE.match(s):
        raise ValueError(f"not an exact rational literal: {text!r}")
    return Fraction(s)


def as_rational(value) -> Fraction:
    """Coerce int/Fraction/str to Fraction, refusing floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"exact rational expected, got {type(value).__name__}")


def is_nonpositive_integer(q: Fraction) -> bool:
    return q.denominator == 1 and q.numerator <= 0


def pochhammer(a, s: int) -> Fraction:
    """Rising factorial a(a+1)...(a+s-1); empty product 1 for s = 0."""
    if s < 0:
        raise ValueError("pochhammer order must be nonnegative")
    a = as_rational(a)
    out = Fraction(1)
    for k in range(s):
        out *= a + k
    return out


def factorial(s: int) -> int:
    if s < 0:
        raise ValueError("factorial of negative integer")
    out = 1
    for k in range(2, s + 1):
        out *= k
    return out


def gamma_shift_ratio(a, k: int) -> Fraction:
    """Ratio of gamma at a+k to gamma at a, as an exact rational.

    Equals ``pochhammer(a, k)`` for k >= 0 and ``1/pochhammer(a+k, -k)`` for
    k < 0.  Both endpoints must avoid non-positive integers, where the ratio
    would be zero or infinite.
    """
    a = as_rational(a)
    if is_nonpositive_integer(a) or is_nonpositive_integer(a + k):
        raise DegenerateParameter(
            f"gamma ratio undefined between {a} and {a + k}"
        )
    if k >= 0:
        return pochhammer(a, k)
    return 1 / pochhammer(a + k, -k)


def basis_constant_ratio(a, b, da: int, db: int) -> Fraction:
    """Ratio of the gamma normalisation constant at shifted (a+da, b+db)
    to the constant at (a, b), where the constant is
    gamma(b-a) * gamma(a) / gamma(b).

    Used to convert raw action coefficients on the gamma-normalised family
    into coefficients on the bare product family.
    """
    a = as_rational(a)
    b = as_rational(b)
    return (
        gamma_shift_ratio(b - a, db - da)
        * gamma_shift_ratio(a, da)
        / gamma_shift_ratio(b, db)
    )
