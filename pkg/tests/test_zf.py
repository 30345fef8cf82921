"""
Tests for ZF data, mode rules and truncated vacuum modules
"""

from fractions import Fraction

import pytest

from vertexforge.domain.exceptions import ExpressionError, ResourceLimitError, SeriesError, TruncationError
from vertexforge.domain.linmod import ModuleVector
from vertexforge.domain.presentations import check_mode_relations
from vertexforge.domain.ratfun import LazySeries, RationalFunction
from vertexforge.domain.zf import (
    ZFData,
    build_vacuum_module,
    check_q_unitarity,
    identity_matrix,
    preset_betagamma,
    preset_q_system,
    zf_mode_relations,
)


def rf(text):
    return RationalFunction.parse(text)


# ============================================
# DIMENSIONS
# ============================================

def test_betagamma_dimensions(betagamma_module):
    """Two bosonic generators of weight one: 1, 2, 5, 10, 20, 36"""
    assert betagamma_module.dimensions() == [[0, 1], [1, 2], [2, 5], [3, 10], [4, 20], [5, 36]]


def test_deformed_betagamma_has_same_dimensions(deformed_module, betagamma_module):
    """The deformation keeps the PBW graded dimensions"""
    assert deformed_module.dimensions() == betagamma_module.dimensions()


def test_free_boson_dimensions(boson_module):
    """Partition numbers"""
    assert [dim for _, dim in boson_module.dimensions()] == [1, 1, 2, 3, 5, 7, 11]


def test_resource_guard():
    with pytest.raises(ResourceLimitError):
        build_vacuum_module(preset_betagamma(), 3, max_cells=5)


def test_negative_maxdeg():
    with pytest.raises(SeriesError):
        build_vacuum_module(preset_betagamma(), -1)


def test_dropped_relations_are_reported():
    """At the top degree some relation instances need words beyond maxdeg"""
    module = build_vacuum_module(preset_betagamma(), 2)
    assert 2 in module.undetermined_degrees()
    assert module.dropped[2] > 0


def test_truncated_series_bounds_maxdeg():
    """A series entry known to order 2 cannot build degree 4"""
    one = LazySeries.from_coefficients([1, 0, 0])
    data = ZFData(("h",), [[Fraction(0)]], [[one]], {1: [[Fraction(1)]]})
    assert data.truncation_order() == 2
    with pytest.raises(TruncationError):
        build_vacuum_module(data, 4)


# ============================================
# ACTION ON THE MODULE
# ============================================

def test_pairing_on_vacuum(betagamma_module):
    """u(0) v(-1)1 = <u,v> 1, v(0) u(-1)1 = <v,u> 1"""
    vacuum = ModuleVector.basis(())
    v1 = betagamma_module.act(("v", -1), vacuum)
    u1 = betagamma_module.act(("u", -1), vacuum)
    assert betagamma_module.act(("u", 0), v1) == vacuum
    assert betagamma_module.act(("v", 0), u1) == -1 * vacuum


def test_annihilation_kills_vacuum(betagamma_module):
    vacuum = ModuleVector.basis(())
    assert betagamma_module.act(("u", 2), vacuum) == 0


def test_boson_commutator(boson_module):
    """h(1) h(-1)1 = 1"""
    vacuum = ModuleVector.basis(())
    assert boson_module.act(("h", 1), boson_module.act(("h", -1), vacuum)) == vacuum


def test_mode_relations_hold(betagamma_module):
    checks = check_mode_relations(betagamma_module, range(-2, 2), 2)
    assert all(check.passed for check in checks)
    assert sum(check.checked for check in checks) > 0


def test_deformed_relations_hold(deformed_module):
    checks = check_mode_relations(deformed_module, range(-2, 2), 2)
    assert [check.witness for check in checks if not check.passed] == []


# ============================================
# RELATION LISTINGS
# ============================================

def test_betagamma_mode_relation():
    """u(0) v(-1) = v(-1) u(0) + 1"""
    relations = zf_mode_relations(preset_betagamma(), (-1, 0))
    listed = {r.to_json()["lhs"]: r.to_json()["terms"] for r in relations}
    assert listed["u(0)v(-1)"] == [["1", "v(-1)u(0)"], ["1", "1"]]
    assert listed["u(0)u(0)"] == [["1", "u(0)u(0)"]]


def test_relation_count():
    """Every ordered generator pair and mode pair"""
    relations = zf_mode_relations(preset_betagamma(), (-1, 1))
    assert len(relations) == 4 * 9


# ============================================
# VALIDATION AND Q-SYSTEMS
# ============================================

def test_pole_at_zero_rejected():
    S = identity_matrix(1)
    S[0][0] = rf("1/x")
    with pytest.raises(ExpressionError):
        ZFData(("h",), [[Fraction(0)]], S)


def test_pairing_shape_rejected():
    with pytest.raises(SeriesError):
        ZFData(("u", "v"), [[Fraction(0)]], identity_matrix(2))


def test_duplicate_names_rejected():
    with pytest.raises(SeriesError):
        ZFData(("u", "u"), [[Fraction(0)] * 2] * 2, identity_matrix(2))


def test_q_unitarity():
    """(1 - x)/(1 + x) times its value at -x is 1"""
    assert check_q_unitarity([[rf("(1 - x)/(1 + x)")]]).unitarity
    report = check_q_unitarity([[rf("2")]])
    assert not report.unitarity
    assert report.witness == {"i": 0, "j": 0}


def test_non_unitary_q_system_rejected():
    with pytest.raises(ExpressionError):
        preset_q_system([[rf("2")]])


def test_q_system_names_must_double():
    with pytest.raises(SeriesError):
        preset_q_system([[rf("1")]], names=("a", "b", "c"))


R = "(1 - x)/(1 + x)"
TWO_BY_TWO = [[rf("1"), rf(R)], [rf(R), rf("1")]]
TRIVIAL = [[rf("1"), rf("1")], [rf("1"), rf("1")]]


def test_q_system_generators_and_pairing():
    """u1 u2 v1 v2 with <u_i, v_i> = 1, <v_i, u_i> = -q_ii(0)"""
    data, report = preset_q_system(TWO_BY_TWO, factorization=[[rf("1"), rf("1 - x")], [rf("1 - x"), rf("1")]])
    assert report.unitarity
    assert report.factorization
    assert data.names == ("u1", "u2", "v1", "v2")
    assert data.pairing[0][2] == 1
    assert data.pairing[2][0] == -1
    assert data.pairing[0][3] == 0
    assert data.pairing[0][1] == 0


def test_q_system_braiding_blocks():
    """uu and vv carry q_ij(x), uv and vu carry q_ji(-x)"""
    data, _ = preset_q_system(TWO_BY_TWO)
    n = 4
    u1, u2, v2 = 0, 1, 3
    assert data.entry(u2 * n + u1, u2 * n + u1) == rf(R)
    assert data.entry(v2 * n + u1, v2 * n + u1) == rf("(1 + x)/(1 - x)")
    assert data.entry(u1 * n + v2, u1 * n + v2) == rf("(1 + x)/(1 - x)")
    assert data.entry(u1 * n + u2, u2 * n + u1).is_zero


def test_deformed_betagamma_is_one_by_one_q_system():
    """V[lambda]: uv is braided by the inverse of uu"""
    data, _ = preset_q_system([[rf("(1 - x)/(1 + x)")]])
    assert data.names == ("u", "v")
    assert data.entry(0, 0) == rf("(1 - x)/(1 + x)")
    assert data.entry(2, 2) == rf("(1 + x)/(1 - x)")
    assert data.pairing == [[0, 1], [-1, 0]]


@pytest.mark.parametrize("Q,trivial,expected", [
    ([[rf(R)]], [[rf("1")]], [1, 2, 5, 10, 20]),
    (TWO_BY_TWO, TRIVIAL, [1, 4, 14, 40, 105]),
])
def test_q_system_dimensions_match_trivial_braiding(Q, trivial, expected):
    """Graded dimensions of V(H,S) for a unitary Q equal those of betagamma^l"""
    deformed = build_vacuum_module(preset_q_system(Q)[0], 4)
    plain = build_vacuum_module(preset_q_system(trivial)[0], 4)
    assert [dim for _, dim in plain.dimensions()] == expected
    assert deformed.dimensions() == plain.dimensions()


def test_q_system_relations_hold():
    module = build_vacuum_module(preset_q_system(TWO_BY_TWO)[0], 3)
    checks = check_mode_relations(module, range(-3, 1), 1)
    assert all(check.passed for check in checks)
