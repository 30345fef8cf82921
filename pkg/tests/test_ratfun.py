"""
Tests for rational functions, iota maps and Yang-Baxter checks
"""

from fractions import Fraction

import pytest

from vertexforge.domain.exceptions import ExpansionError, ExpressionError, TruncationError
from vertexforge.domain.ratfun import (
    LazySeries,
    QYBMatrix,
    RationalFunction,
    iota_expand,
    iota_pair_delta,
    qyb_check,
)
from vertexforge.domain.series import TWO_VAR, ExpansionDomain, Window, WindowSeries, delta_kernel
from vertexforge.domain.zf import deformed_betagamma_matrix


def expand(text, domain, **bounds):
    return iota_expand(RationalFunction.parse(text), ExpansionDomain.parse(domain), Window(bounds))


# ============================================
# PARSING AND NORMALIZATION
# ============================================

def test_parse_cancels_common_factor():
    r = RationalFunction.parse("(x^2 - 1)/(x - 1)")
    assert r == RationalFunction.parse("x + 1")
    assert r.is_polynomial


def test_denominator_is_monic():
    r = RationalFunction.parse("1/(2*x + 4)")
    assert r == RationalFunction.parse("(1/2)/(x + 2)")


def test_parse_with_constants():
    r = RationalFunction.parse("(lam - x)/(lam + x)", {"lam": Fraction(1)})
    assert r == RationalFunction.parse("(1 - x)/(1 + x)")


@pytest.mark.parametrize("text", ["", "1/(x1 - x1)", "x + y", "1.5*x", "x1 + x2 + x0", "__import__"])
def test_parse_rejects(text):
    with pytest.raises(ExpressionError):
        RationalFunction.parse(text)


# ============================================
# IOTA MAPS
# ============================================

def test_geometric_series_at_zero():
    """1/(1 - x) = 1 + x + ... + x^5"""
    series = expand("1/(1 - x)", "x@0", x=(0, 5))
    assert [series.coefficient({"x": e}) for e in range(6)] == [1] * 6


def test_expansion_at_infinity():
    """1/(x - 1) = x^{-1} + x^{-2} + ... at infinity"""
    series = expand("1/(x - 1)", "x@inf", x=(-6, -1))
    assert [series.coefficient({"x": e}) for e in range(-6, 0)] == [1] * 6
    assert series.coefficient({"x": 0}) == 0


def test_two_variable_expansion():
    """iota_{x1,x2} 1/(x1 - x2) = sum x2^k x1^{-k-1}"""
    series = expand("1/(x1 - x2)", "x1@0,x2@0", x1=(-6, 6), x2=(0, 5))
    for k in range(6):
        assert series.coefficient({"x1": -k - 1, "x2": k}) == 1
    assert series.coefficient({"x1": 0, "x2": 0}) == 0


def test_expansion_times_denominator_is_one():
    """x^2 (2 + x) iota(1/(x^2 (2 + x))) = 1 on the window"""
    series = expand("1/(x^2*(2 + x))", "x@0", x=(-2, 8))
    factor = WindowSeries.polynomial(("x",), {(2,): Fraction(2), (3,): Fraction(1)})
    product = factor * series
    one = WindowSeries(("x",), {(0,): Fraction(1)}, product.guarantee)
    assert product.compare(one) is None


def test_unsupported_domain():
    r = RationalFunction.parse("1/(x1 - x2)")
    with pytest.raises(ExpansionError):
        iota_expand(r, ExpansionDomain.parse("x1@0,x2@inf"), Window({"x1": (0, 1), "x2": (0, 1)}))


def test_window_missing_variable():
    r = RationalFunction.parse("1/(1 - x)")
    with pytest.raises(ExpansionError):
        iota_expand(r, ExpansionDomain.parse("x@0"), Window({"z": (0, 1)}))


def test_pair_delta_is_two_variable_delta():
    window = Window({"x1": (-8, 8), "x2": (-8, 8)})
    difference = iota_pair_delta(RationalFunction.parse("1/(x1 - x2)"), window)
    assert difference.compare(delta_kernel(TWO_VAR, window)) is None


def test_pair_delta_of_polynomial_vanishes():
    window = Window({"x1": (-3, 3), "x2": (-3, 3)})
    difference = iota_pair_delta(RationalFunction.parse("x1*x2 + 1"), window)
    assert len(difference) == 0


def test_pair_delta_rejects_off_diagonal_pole():
    with pytest.raises(ExpansionError):
        iota_pair_delta(RationalFunction.parse("1/(x1 + x2)"), Window({"x1": (0, 1), "x2": (0, 1)}))


# ============================================
# LAZY SERIES
# ============================================

def test_lazy_series_of_rational_function():
    series = LazySeries(RationalFunction.parse("1/(1 - 2*x)"))
    assert [series.coefficient(j) for j in range(5)] == [1, 2, 4, 8, 16]
    assert series.coefficient(-1) == 0


def test_explicit_series_truncates():
    series = LazySeries.from_coefficients([1, 3, 5])
    assert series.coefficient(2) == 5
    with pytest.raises(TruncationError):
        series.coefficient(3)


def test_taylor_coefficients():
    """(1/t!) d^t of 1/(1 - x) is 1/(1 - x)^{t+1}"""
    series = LazySeries(RationalFunction.parse("1/(1 - x)")).taylor(1)
    assert [series.coefficient(j) for j in range(4)] == [1, 2, 3, 4]


# ============================================
# QUANTUM YANG-BAXTER
# ============================================

def test_identity_matrix_passes():
    reports = qyb_check(QYBMatrix.identity(2))
    assert [(r.identity, r.passed) for r in reports] == [("unitarity", True), ("ybe", True)]


def test_deformed_betagamma_matrix_passes():
    reports = qyb_check(deformed_betagamma_matrix(Fraction(1)), "both")
    assert all(report.passed for report in reports)


def test_perturbed_matrix_fails_unitarity():
    """Negative control: one diagonal entry doubled"""
    one = RationalFunction.constant(1)
    matrix = QYBMatrix.diagonal(2, [RationalFunction.constant(2), one, one, one])
    (report,) = qyb_check(matrix, "unitarity")
    assert not report.passed
    assert report.witness["row"] == 0 and report.witness["column"] == 0


def test_matrix_shape_validated():
    with pytest.raises(ExpressionError):
        QYBMatrix(2, [[RationalFunction.constant(1)]])
