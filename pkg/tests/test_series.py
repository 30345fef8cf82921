"""
Tests for window series, residues and delta kernels
"""

from fractions import Fraction

import pytest

from vertexforge.domain.exceptions import SeriesError, TruncationError
from vertexforge.domain.ratfun import RationalFunction, iota_expand
from vertexforge.domain.series import (
    KERNEL_X1_MINUS_X0,
    KERNEL_X1_MINUS_X2,
    KERNEL_X2_MINUS_X1,
    TWO_VAR,
    ExpansionDomain,
    Window,
    WindowSeries,
    binomial,
    delta_kernel,
    formal_residue,
    taylor_shift,
)


def zero_like(series):
    return WindowSeries(series.variables, {}, series.guarantee)


# ============================================
# WINDOWS AND DOMAINS
# ============================================

def test_window_rejects_empty_interval():
    """lo > hi is an empty window"""
    with pytest.raises(SeriesError):
        Window({"x": (3, 1)})


def test_window_rejects_unknown_variable():
    with pytest.raises(SeriesError):
        Window({"y": (0, 1)})


def test_domain_parse_and_render():
    domain = ExpansionDomain.parse("x1@inf, x2@0")
    assert domain.variables == ("x1", "x2")
    assert str(domain) == "x1@inf,x2@0"


def test_domain_rejects_repeated_variable():
    with pytest.raises(SeriesError):
        ExpansionDomain.parse("x@0,x@0")


def test_domain_rejects_bad_point():
    with pytest.raises(SeriesError):
        ExpansionDomain.parse("x@1")


def test_generalized_binomial():
    """binom(-1, k) = (-1)^k"""
    assert [binomial(-1, k) for k in range(4)] == [1, -1, 1, -1]
    assert binomial(5, 2) == 10
    assert binomial(3, -1) == 0


# ============================================
# ARITHMETIC AND GUARANTEES
# ============================================

def test_zero_coefficients_are_not_stored():
    series = WindowSeries.polynomial(("x",), {(0,): Fraction(0), (2,): Fraction(3)})
    assert len(series) == 1
    assert series.coefficient({"x": 2}) == 3


def test_polynomial_is_known_everywhere():
    """Closed on both sides: coefficients far outside the box are zero"""
    series = WindowSeries.polynomial(("x",), {(1,): Fraction(1)})
    assert series.coefficient({"x": 40}) == 0
    assert series.coefficient({"x": -40}) == 0


def test_open_side_raises_truncation():
    r = RationalFunction.parse("1/(1 - x)")
    series = iota_expand(r, ExpansionDomain.parse("x@0"), Window({"x": (0, 3)}))
    assert series.coefficient({"x": 3}) == 1
    with pytest.raises(TruncationError):
        series.coefficient({"x": 4})


def test_product_guarantee_shrinks_for_open_factors():
    """Two power series known on [0, 5]: the product is exact on [0, 5]"""
    domain = ExpansionDomain.parse("x@0")
    a = iota_expand(RationalFunction.parse("1/(1 - x)"), domain, Window({"x": (0, 5)}))
    b = iota_expand(RationalFunction.parse("1/(1 + x)"), domain, Window({"x": (0, 5)}))
    product = a * b
    assert product.guarantee["x"] == (0, 5)
    expected = iota_expand(RationalFunction.parse("1/(1 - x^2)"), domain, Window({"x": (0, 5)}))
    assert product.compare(expected) is None


def test_serialization_sorted_pairs():
    series = WindowSeries.polynomial(("x1", "x2"), {(1, 0): Fraction(1, 2), (0, 1): Fraction(-1)})
    assert series.to_json() == [[[0, 1], "-1"], [[1, 0], "1/2"]]


def test_derivative_moves_box():
    series = WindowSeries.polynomial(("x",), {(3,): Fraction(1)})
    derived = series.derivative("x")
    assert derived.coefficient({"x": 2}) == 3


# ============================================
# RESIDUES
# ============================================

def test_residue_of_inverse():
    """Res_x x^{-1} = 1"""
    series = WindowSeries.polynomial(("x",), {(-1,): Fraction(1)})
    residue = formal_residue(series, "x")
    assert residue.coefficient(()) == 1


def test_residue_of_expansion():
    """Res_{x1} iota_{x1,x2} 1/(x1 - x2) = 1"""
    r = RationalFunction.parse("1/(x1 - x2)")
    series = iota_expand(r, ExpansionDomain.parse("x1@0,x2@0"), Window({"x1": (-4, 4), "x2": (0, 3)}))
    residue = formal_residue(series, "x1")
    assert residue.coefficient({"x2": 0}) == 1
    assert residue.coefficient({"x2": 1}) == 0


def test_residue_of_derivative_vanishes():
    r = RationalFunction.parse("1/(x^2*(2 + x))")
    series = iota_expand(r, ExpansionDomain.parse("x@0"), Window({"x": (-3, 4)}))
    residue = formal_residue(series.derivative("x"), "x")
    assert residue.compare(zero_like(residue)) is None


def test_residue_outside_guarantee():
    r = RationalFunction.parse("1/(1 - x)")
    series = iota_expand(r, ExpansionDomain.parse("x@0"), Window({"x": (2, 4)}))
    with pytest.raises(TruncationError):
        formal_residue(series, "x")


# ============================================
# TAYLOR SHIFT
# ============================================

def test_taylor_shift_of_inverse():
    """x^{-1} at x -> x + x0 is sum (-1)^l x0^l x^{-l-1}"""
    r = RationalFunction.parse("1/x")
    f = iota_expand(r, ExpansionDomain.parse("x@0"), Window({"x": (-5, 2)}))
    shifted = taylor_shift(f, "x", "x0", Window({"x": (-5, 0), "x0": (0, 3)}))
    for l in range(4):
        assert shifted.coefficient({"x": -l - 1, "x0": l}) == (-1) ** l


def test_taylor_shift_rejects_same_variable():
    f = WindowSeries.polynomial(("x",), {(1,): Fraction(1)})
    with pytest.raises(SeriesError):
        taylor_shift(f, "x", "x", Window({"x": (0, 1)}))


def test_taylor_shift_rejects_two_sided_table():
    """Untagged two-sided tables have no substitution"""
    f = WindowSeries(("x",), {(-1,): Fraction(1)}, Window({"x": (-3, 3)}))
    with pytest.raises(SeriesError):
        taylor_shift(f, "x", "x0", Window({"x": (-3, 0), "x0": (0, 2)}))


# ============================================
# DELTA KERNELS
# ============================================

def test_two_var_coefficient():
    """x2^3 x1^{-4} has coefficient 1"""
    kernel = delta_kernel(TWO_VAR, Window({"x1": (-6, 6), "x2": (-6, 6)}))
    assert kernel.coefficient({"x1": -4, "x2": 3}) == 1
    assert kernel.coefficient({"x1": -4, "x2": 2}) == 0


def test_delta_annihilated_by_difference():
    """(x1 - x2) delta = 0 on the window"""
    kernel = delta_kernel(TWO_VAR, Window({"x1": (-6, 6), "x2": (-6, 6)}))
    factor = WindowSeries.polynomial(("x1", "x2"), {(1, 0): Fraction(1), (0, 1): Fraction(-1)})
    product = factor * kernel
    assert product.compare(zero_like(product)) is None


def test_three_term_kernel_coefficient():
    """x0^{-1} delta((x1 - x2)/x0) at x0^{-1} x1^0 x2^0 is 1"""
    kernel = delta_kernel(KERNEL_X1_MINUS_X2, Window.cube(("x0", "x1", "x2"), -3, 3))
    assert kernel.coefficient({"x0": -1, "x1": 0, "x2": 0}) == 1


def test_three_term_delta_identity():
    window = Window.cube(("x0", "x1", "x2"), -6, 6)
    lhs = delta_kernel(KERNEL_X1_MINUS_X2, window) - delta_kernel(KERNEL_X2_MINUS_X1, window)
    assert lhs.compare(delta_kernel(KERNEL_X1_MINUS_X0, window)) is None


def test_kernel_needs_bounded_variables():
    with pytest.raises(SeriesError):
        delta_kernel(TWO_VAR, Window({"x1": (0, 2)}))
