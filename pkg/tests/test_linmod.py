"""
Tests for exact linear algebra and graded quotients
"""

from fractions import Fraction

import pytest

from vertexforge.domain.exceptions import LinearSystemError, ResourceLimitError, SeriesError
from vertexforge.domain.linmod import (
    EchelonForm,
    GradedBasis,
    ModuleVector,
    linear_combination,
    quotient_by_relations,
    rref,
    rref_solve,
)


# ============================================
# MODULE VECTORS
# ============================================

def test_vector_drops_zeros():
    vector = ModuleVector({"a": 1, "b": 0})
    assert vector.labels == ["a"]
    assert len(vector) == 1


def test_vector_arithmetic():
    a = ModuleVector({"u": 1, "v": 2})
    b = ModuleVector({"v": -2, "w": Fraction(1, 3)})
    assert a + b == ModuleVector({"u": 1, "w": Fraction(1, 3)})
    assert (a - a) == 0
    assert not (a - a)
    assert 2 * a == ModuleVector({"u": 2, "v": 4})


def test_vector_json_is_sorted():
    vector = ModuleVector({"b": Fraction(1, 2), "a": -1})
    assert vector.to_json() == [["a", "-1"], ["b", "1/2"]]


def test_linear_combination():
    a, b = ModuleVector.basis("x"), ModuleVector.basis("y")
    assert linear_combination([(2, a), (0, b), (-1, a)]) == a


# ============================================
# ROW REDUCTION
# ============================================

def test_rank():
    assert rref_solve([[1, 2], [2, 4]], "rank") == 1
    assert rref_solve([[1, 0], [0, 1]], "rank") == 2


def test_kernel():
    kernel = rref_solve([[1, 1, 0], [0, 0, 1]], "kernel")
    assert kernel == [[Fraction(-1), Fraction(1), Fraction(0)]]


def test_solve():
    solution = rref_solve([[2, 0], [0, 4]], "solve", [1, 1])
    assert solution == [Fraction(1, 2), Fraction(1, 4)]


def test_inconsistent_system():
    with pytest.raises(LinearSystemError):
        rref_solve([[1, 1], [1, 1]], "solve", [0, 1])


def test_rref_pivots():
    table, pivots = rref([[0, 2, 4], [1, 1, 1]])
    assert pivots == (0, 1)
    assert table[1] == [0, 1, 2]


def test_cell_guard():
    with pytest.raises(ResourceLimitError):
        rref([[1, 2], [3, 4]], max_cells=3)


def test_ragged_matrix():
    with pytest.raises(SeriesError):
        rref([[1, 2], [3]], 2)


# ============================================
# ECHELON FORM AND QUOTIENTS
# ============================================

def test_echelon_detects_dependence():
    echelon = EchelonForm(key=lambda label: label)
    assert echelon.add({"a": 1, "b": 1})
    assert echelon.add({"b": 1})
    assert not echelon.add({"a": 2, "b": 5})
    assert echelon.rank == 2


def test_quotient_dimensions():
    """Degree 1 spanned by p, q with p = q: one basis label left"""
    degrees = {"1": 0, "p": 1, "q": 1, "pp": 2}
    basis = GradedBasis(degrees, degrees.get)
    quotient = quotient_by_relations(basis, [ModuleVector({"p": 1, "q": -1})], 2)
    assert quotient.dimensions() == [[0, 1], [1, 1], [2, 1]]
    survivor = quotient.labels(1)[0]
    other = "q" if survivor == "p" else "p"
    assert quotient.canonical(ModuleVector.basis(other)) == ModuleVector.basis(survivor)


def test_filtered_relation_eliminates_top_degree():
    """pp = p: the degree 2 label goes, the tail stays"""
    degrees = {"1": 0, "p": 1, "pp": 2}
    basis = GradedBasis(degrees, degrees.get)
    quotient = quotient_by_relations(basis, [ModuleVector({"pp": 1, "p": -1})], 2)
    assert quotient.dimensions() == [[0, 1], [1, 1], [2, 0]]
    assert quotient.canonical(ModuleVector.basis("pp")) == ModuleVector.basis("p")


def test_negative_degree_rejected():
    with pytest.raises(SeriesError):
        GradedBasis(["a"], lambda label: -1)
