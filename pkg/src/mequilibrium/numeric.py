"""Exact/float number handling and the scale-aware tie rule."""
from __future__ import annotations

from fractions import Fraction
from numbers import Integral, Rational
from typing import Iterable, Sequence

import numpy as np

EPS_TIE = 1e-9


def is_exact_scalar(x) -> bool:
    return isinstance(x, (Rational, Integral)) and not isinstance(x, bool)


def all_exact(values: Iterable) -> bool:
    return all(is_exact_scalar(v) for v in values)


def to_fraction(x) -> Fraction:
    """Convert ints, Fractions, floats (exact binary value) and 'a/b' strings."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (Integral, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def exact_vector(values: Sequence) -> tuple[Fraction, ...]:
    return tuple(to_fraction(v) for v in values)


def float_vector(values: Sequence) -> np.ndarray:
    return np.array([float(v) for v in values], dtype=float)


def tied(a, b, eps: float = EPS_TIE) -> bool:
    """Exact equality for rationals, otherwise |a-b| <= eps*max(1,|a|,|b|)."""
    if is_exact_scalar(a) and is_exact_scalar(b):
        return a == b
    a, b = float(a), float(b)
    return abs(a - b) <= eps * max(1.0, abs(a), abs(b))


def compare(a, b, eps: float = EPS_TIE) -> int:
    if tied(a, b, eps):
        return 0
    return 1 if a > b else -1


def sign(x, eps: float = EPS_TIE) -> int:
    return compare(x, 0, eps)


def format_rational(x) -> str:
    """Render a rational as 'num/den' (integers as 'n'); floats via repr."""
    if is_exact_scalar(x):
        f = to_fraction(x)
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
    return repr(float(x))


def parse_rational(text) -> Fraction | float:
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        return text
    try:
        return Fraction(text)
    except ValueError:
        return float(text)
