"""
Tests for fields, Y_E products and identity verifiers on the betagamma module
"""

import pytest

from vertexforge.domain.exceptions import EvidenceError, OrientationError, SeriesError
from vertexforge.domain.fields import (
    LAURENT_UP,
    SLocalityDatum,
    TransportedStructure,
    combine_fields,
    identity_field,
    power_polynomial,
)
from vertexforge.domain.borcherds import DerivationStructure
from vertexforge.domain.linmod import ModuleVector
from vertexforge.domain.verifiers import (
    CheckWindow,
    check_compatibility,
    check_module_at_infinity,
    check_s_jacobi,
    check_s_locality,
    check_shift_hexagon,
    check_vacuum_axioms,
    check_weak_associativity,
    closure_generate,
    d_operator,
    solve_braiding,
    zn_rank_evidence,
    zn_slice_degree,
)
from vertexforge.domain.yangian import generator_datum, generator_label
from vertexforge.domain.zf import build_vacuum_module, preset_free_boson

U = generator_label("u")
V = generator_label("v")


def datum(structure, a, b):
    return generator_datum(structure.space.algebra, a, b)


# ============================================
# FIELDS
# ============================================

def test_identity_field(betagamma_module):
    one = identity_field(betagamma_module)
    w = ModuleVector.basis(U)
    assert one.mode(-1, w) == w
    assert one.mode(0, w) == 0
    assert one.mode(-2, w) == 0


def test_mixed_orientations_rejected(betagamma_module):
    down = identity_field(betagamma_module)
    up = identity_field(betagamma_module, LAURENT_UP)
    with pytest.raises(OrientationError):
        combine_fields([(1, down), (1, up)])


def test_empty_combination_rejected():
    with pytest.raises(SeriesError):
        combine_fields([])


def test_generator_field_of_word(betagamma_structure):
    """Y(u(-1)1, x) is u(x)"""
    field = betagamma_structure.field(U)
    vacuum = ModuleVector.basis(())
    assert field.mode(-1, vacuum) == ModuleVector.basis(U)
    assert field.mode(0, ModuleVector.basis(V)) == vacuum


def test_negative_locality_order_rejected():
    with pytest.raises(EvidenceError):
        SLocalityDatum([], -1)


# ============================================
# VERTEX ALGEBRA AXIOMS
# ============================================

def test_vacuum_axioms(betagamma_structure):
    report = check_vacuum_axioms(betagamma_structure, CheckWindow(2))
    assert report.verdict == "pass"
    assert report.checked > 0


def test_s_locality_finds_smallest_order(betagamma_structure):
    """u(x1) v(x2) = v(x2) u(x1) + delta: order 1"""
    structure = betagamma_structure
    resolved = datum(structure, "u", "v").resolve(structure)
    report = check_s_locality(structure.generator("u"), structure.generator("v"), resolved, CheckWindow(2),
                              max_order=8)
    assert report.verdict == "pass"
    assert report.smallest_order == 1


def test_wrong_datum_fails(betagamma_structure):
    """Negative control: f = 2 instead of 1"""
    structure = betagamma_structure
    wrong = SLocalityDatum([(V, U, 2)]).resolve(structure)
    report = check_s_locality(structure.generator("u"), structure.generator("v"), wrong, CheckWindow(2),
                              max_order=2)
    assert report.verdict == "fail"
    assert report.witness is not None


def test_s_jacobi(betagamma_structure):
    report = check_s_jacobi(U, V, betagamma_structure, datum(betagamma_structure, "u", "v"), CheckWindow(2))
    assert report.verdict == "pass"
    assert report.identity == "s_jacobi[u(-1)1,v(-1)1]"


def test_weak_associativity(betagamma_structure):
    report = check_weak_associativity(U, V, betagamma_structure, CheckWindow(2), max_order=3)
    assert report.verdict == "pass"


def test_d_operator(betagamma_structure):
    """D u(-1)1 = u(-2)1"""
    dv, report = d_operator(betagamma_structure, U, CheckWindow(1))
    assert dv == ModuleVector.basis((("u", -2),))
    assert report.verdict == "pass"
    assert report.details["value"] == [["u(-2)1", "1"]]


def test_module_at_infinity_needs_laurent_up(betagamma_structure):
    with pytest.raises(OrientationError):
        check_module_at_infinity(betagamma_structure, U, V, CheckWindow(1))


# ============================================
# BRAIDING AND EVIDENCE
# ============================================

def test_braiding_solve(betagamma_structure):
    """The only candidate v (x) u gets f = 1"""
    solution = solve_braiding(U, V, betagamma_structure, CheckWindow(2), [(V, U)], k=1, series_order=2)
    assert solution.status == "unique"
    (_, _, series), = solution.datum.triples
    assert series.coefficient(0) == 1
    assert solution.to_json(betagamma_structure.render)["status"] == "unique"


def test_braiding_needs_pool(betagamma_structure):
    with pytest.raises(EvidenceError):
        solve_braiding(U, V, betagamma_structure, CheckWindow(1), [])


def test_z1_rank(betagamma_structure):
    evidence = zn_rank_evidence(betagamma_structure, 1, 1, 1)
    assert evidence["identity"] == "z1_rank"
    assert evidence["label"] == "EVIDENCE"
    assert evidence["domain_dimension"] == 6
    assert evidence["full_rank"]


def test_zn_rank_only_small_n(betagamma_structure):
    with pytest.raises(EvidenceError):
        zn_rank_evidence(betagamma_structure, 3, 1, 1)


def test_report_json(betagamma_structure):
    report = check_vacuum_axioms(betagamma_structure, CheckWindow(1, (-2, 1)))
    data = report.to_json()
    assert data["identity"] == "vacuum_axioms"
    assert data["window"] == {"degree_bound": 1, "modes": [-2, 1]}
    assert "label" not in data


def test_s_jacobi_levels_follow_the_window(betagamma_structure):
    """Without explicit levels the x0 exponents cover the mode window"""
    report = check_s_jacobi(U, V, betagamma_structure, datum(betagamma_structure, "u", "v"), CheckWindow(1))
    assert report.verdict == "pass"
    assert report.details["levels"] == [-7, 7]


def test_s_jacobi_explicit_levels(betagamma_structure):
    report = check_s_jacobi(U, V, betagamma_structure, datum(betagamma_structure, "u", "v"), CheckWindow(1),
                            levels=[0])
    assert report.details["levels"] == [0, 0]


def test_search_needs_an_order_bound(betagamma_structure):
    structure = betagamma_structure
    resolved = datum(structure, "u", "v").resolve(structure)
    with pytest.raises(EvidenceError):
        check_s_locality(structure.generator("u"), structure.generator("v"), resolved, CheckWindow(1))
    with pytest.raises(EvidenceError):
        check_weak_associativity(U, V, structure, CheckWindow(1))


# ============================================
# COMPATIBILITY AND CLOSURE
# ============================================

def test_compatibility_needs_the_pole(betagamma_structure):
    """<u, v> = 1: (x1 - x2) u(x1) v(x2) is compatible, u(x1) v(x2) alone is not"""
    u, v = betagamma_structure.generator("u"), betagamma_structure.generator("v")
    assert check_compatibility([u, v], power_polynomial(1), CheckWindow(2)).verdict == "pass"
    report = check_compatibility([u, v], power_polynomial(0), CheckWindow(2))
    assert report.verdict == "fail"
    assert report.witness is not None


def test_compatibility_of_one_field(betagamma_structure):
    report = check_compatibility([betagamma_structure.generator("u")], power_polynomial(0), CheckWindow(1))
    assert report.verdict == "pass"


def test_closure_of_generators(betagamma_structure):
    """Depth 1 is 1_W and the seed; depth 2 adds normally ordered products"""
    seed = [betagamma_structure.generator("u"), betagamma_structure.generator("v")]
    assert len(closure_generate(seed, 1, CheckWindow(1))) == 3
    assert len(closure_generate(seed, 2, CheckWindow(1), max_order=4)) > 3


def test_closure_needs_order_bound(betagamma_structure):
    seed = [betagamma_structure.generator("u"), betagamma_structure.generator("v")]
    with pytest.raises(EvidenceError):
        closure_generate(seed, 2, CheckWindow(1))


def test_closure_needs_seed():
    with pytest.raises(EvidenceError):
        closure_generate([], 1, CheckWindow(1))


# ============================================
# SHIFT AND HEXAGON
# ============================================

def test_shift_and_hexagon_on_betagamma(betagamma_structure):
    structure = betagamma_structure
    braiding = {(generator_label(a), generator_label(b)): datum(structure, a, b) for a in "uv" for b in "uv"}
    reports = check_shift_hexagon(structure, braiding, CheckWindow(1), (-1, -1), max_order=4)
    identities = {report.identity for report in reports}
    assert "shift[u(-1)1,v(-1)1]" in identities
    assert any(identity.startswith("hexagon[") for identity in identities)
    assert all(report.evidence for report in reports)
    assert [report.identity for report in reports if report.verdict == "fail"] == []


def test_hexagon_needs_every_pair(betagamma_structure):
    structure = betagamma_structure
    braiding = {(U, V): datum(structure, "u", "v"), (V, U): datum(structure, "v", "u")}
    with pytest.raises(EvidenceError):
        check_shift_hexagon(structure, braiding, CheckWindow(1), (-1, -1), max_order=4)


# ============================================
# Z_n RANK
# ============================================

def test_z1_rank_on_free_boson():
    """Degree <= 4, series order 4: 12 labels times 5 exponents"""
    structure = TransportedStructure(build_vacuum_module(preset_free_boson(), zn_slice_degree(1, 4, 4)))
    evidence = zn_rank_evidence(structure, 1, 4, 4)
    assert evidence["domain_dimension"] == 60
    assert evidence["slice_degree"] == 8
    assert evidence["full_rank"]


def test_z2_rank_on_half_currents(half_currents):
    """u (x) v and v (x) u are told apart above the series order"""
    algebra, _ = half_currents
    evidence = zn_rank_evidence(DerivationStructure(algebra), 2, 1, 1)
    assert evidence["identity"] == "z2_rank"
    assert evidence["domain_dimension"] == 64
    assert evidence["undetermined_rows"] == []
    assert evidence["full_rank"]
