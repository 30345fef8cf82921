"""
Domain Layer - Scalars
Точные рациональные скаляры и их текстовый формат "p/q"
"""

from fractions import Fraction
from typing import Union

from vertexforge.domain.exceptions import ExpressionError

ScalarLike = Union[int, str, Fraction]


def to_scalar(value: ScalarLike) -> Fraction:
    """Convert an int, "p/q" string or Fraction to a reduced Fraction"""
    if isinstance(value, bool):
        raise ExpressionError(f"not a rational scalar: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ExpressionError(f"not a rational scalar: {value!r}") from exc
    raise ExpressionError(f"not a rational scalar: {value!r}")


def format_scalar(value: Fraction) -> str:
    """Render as "p/q", q omitted when 1"""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def from_sympy(value) -> Fraction:
    """sympy Rational / QQ element -> Fraction"""
    numerator = getattr(value, "numerator", None)
    denominator = getattr(value, "denominator", None)
    if numerator is not None and denominator is not None and not callable(numerator):
        return Fraction(int(numerator), int(denominator))
    return Fraction(int(value.p), int(value.q))
