"""
Domain Layer - Double Yangian DY_q(sl2)
Двойной янгиан: соглашения at_zero (вакуумный модуль V_q) и at_infinity (ограниченные модули)

at_zero:      e(x1)e(x2) = (x2-x1-q)/(x2-x1+q) e(x2)e(x1),  [e(x1), f(x2)] = x1^{-1}delta(x2/x1) h(x2)
at_infinity:  prefactors expanded in negative powers of x1 - x2, [e(x1), f(x2)] = -x1^{-1}delta(x2/x1) h(x2)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from vertexforge.domain.exceptions import ExpressionError, SeriesError
from vertexforge.domain.fields import SLocalityDatum, TransportedStructure
from vertexforge.domain.presentations import (
    COVACUUM,
    VACUUM,
    BraidedRule,
    DeltaTerm,
    InfinityRule,
    ModeAlgebra,
    ModeModule,
    ModeRelation,
    SolvedInfinityRule,
    check_mode_relations,
    derive_relations,
)
from vertexforge.domain.ratfun import LazySeries, RationalFunction, iota_expand
from vertexforge.domain.scalar import format_scalar
from vertexforge.domain.series import INFINITY, ZERO, ExpansionDomain, Window, WindowSeries
from vertexforge.domain.verifiers import (
    CheckWindow,
    VerifierReport,
    check_module_at_infinity,
    check_s_jacobi,
    check_s_locality,
    check_vacuum_axioms,
    zn_rank_evidence,
)

logger = logging.getLogger("vertexforge.yangian")

AT_ZERO = "at_zero"
AT_INFINITY = "at_infinity"
GENERATORS = ("h", "e", "f")


@dataclass(frozen=True)
class DYPresentation:
    q: Fraction
    convention: str = AT_ZERO

    def __post_init__(self):
        self._validate()

    def _validate(self):
        if Fraction(self.q) == 0:
            raise ExpressionError("q must be nonzero")
        if self.convention not in (AT_ZERO, AT_INFINITY):
            raise SeriesError(f"unknown double Yangian convention {self.convention!r}")

    def prefactors(self) -> Tuple[RationalFunction, RationalFunction]:
        """(x - q)/(x + q) and its inverse"""
        x, q = RationalFunction.variable("x"), RationalFunction.constant(self.q)
        ratio = (x - q) / (x + q)
        return ratio, RationalFunction.constant(1) / ratio


def _at_zero_algebra(pres: DYPresentation) -> ModeAlgebra:
    """e, h pick up (x-q)/(x+q) in x = x2 - x1, f its inverse"""
    ratio, inverse = pres.prefactors()
    fe, fm = LazySeries(ratio, "x", ZERO), LazySeries(inverse, "x", ZERO)
    one = LazySeries(RationalFunction.constant(1), "x", ZERO)
    rules = {
        ("e", "e"): BraidedRule("e", "e", [("e", "e", fe)]),
        ("f", "f"): BraidedRule("f", "f", [("f", "f", fm)]),
        ("h", "e"): BraidedRule("h", "e", [("e", "h", fe)]),
        ("e", "h"): BraidedRule("e", "h", [("h", "e", fe)]),
        ("h", "f"): BraidedRule("h", "f", [("f", "h", fm)]),
        ("f", "h"): BraidedRule("f", "h", [("h", "f", fm)]),
        ("h", "h"): BraidedRule("h", "h", [("h", "h", one)]),
        ("e", "f"): BraidedRule("e", "f", [("f", "e", one)], [DeltaTerm(0, Fraction(1), "h")]),
        ("f", "e"): BraidedRule("f", "e", [("e", "f", one)], [DeltaTerm(0, Fraction(-1), "h")]),
    }
    orders = {key: 0 for key in rules}
    orders[("e", "f")] = orders[("f", "e")] = 1
    return ModeAlgebra("DY_q", GENERATORS, VACUUM, rules, orders)


def _at_infinity_algebra(pres: DYPresentation) -> ModeAlgebra:
    """
    Prefactors P(x1 - x2) expanded at infinity
    (e, h) и (f, h) решаются относительно обратного порядка; для них задан только квазипорядок
    """
    ratio, inverse = pres.prefactors()
    pe, pf = LazySeries(inverse, "x", INFINITY), LazySeries(ratio, "x", INFINITY)
    one = LazySeries(RationalFunction.constant(1), "x", INFINITY)
    rules = {
        ("e", "e"): InfinityRule("e", "e", [("e", "e", pe)]),
        ("f", "f"): InfinityRule("f", "f", [("f", "f", pf)]),
        ("h", "e"): InfinityRule("h", "e", [("e", "h", pe)]),
        ("h", "f"): InfinityRule("h", "f", [("f", "h", pf)]),
        ("h", "h"): InfinityRule("h", "h", [("h", "h", one)]),
        ("e", "h"): SolvedInfinityRule("e", "h", pe),
        ("f", "h"): SolvedInfinityRule("f", "h", pf),
        ("e", "f"): InfinityRule("e", "f", [("f", "e", one)], [DeltaTerm(0, Fraction(-1), "h")]),
        ("f", "e"): InfinityRule("f", "e", [("e", "f", one)], [DeltaTerm(0, Fraction(1), "h")]),
    }
    orders: Dict[Tuple[str, str], Optional[int]] = {key: 0 for key in rules}
    orders[("e", "f")] = orders[("f", "e")] = 1
    orders[("e", "h")] = orders[("f", "h")] = None
    return ModeAlgebra("DY_q^inf", GENERATORS, COVACUUM, rules, orders)


def dy_algebra(pres: DYPresentation) -> ModeAlgebra:
    if pres.convention == AT_ZERO:
        return _at_zero_algebra(pres)
    return _at_infinity_algebra(pres)


def dy_mode_relations(pres: DYPresentation, mode_window: Tuple[int, int]) -> List[ModeRelation]:
    """Rewrite rules e(m)f(n), ... for modes in the window"""
    lo, hi = mode_window
    return derive_relations(dy_algebra(pres), lo, hi)


# ============================================
# MODULES / МОДУЛИ
# ============================================


def build_vq(q: Fraction, maxdeg: int, max_cells: Optional[int] = None) -> ModeModule:
    """Vacuum module V_q: u(n) 1 = 0 for n >= 0"""
    module = ModeModule(dy_algebra(DYPresentation(Fraction(q), AT_ZERO)), maxdeg, max_cells, "V_q")
    logger.info("V_q at q=%s: dimensions %s", q, module.dimensions())
    return module


def build_dyinf_restricted(q: Fraction, maxdepth: int, max_cells: Optional[int] = None) -> ModeModule:
    """Co-vacuum restricted module: u(n) w0 = 0 for n <= -1, fields in Hom(W, W((x^{-1})))"""
    module = ModeModule(dy_algebra(DYPresentation(Fraction(q), AT_INFINITY)), maxdepth, max_cells, "W_q^inf")
    logger.info("restricted DY^inf module at q=%s: dimensions %s", q, module.dimensions())
    return module


def expansion_difference(q: Fraction, window: Window) -> Dict[str, object]:
    """
    iota_{x1@0,x2@0} - iota_{x1@inf,x2@0} of 1/(x1 - x2 + q)
    Разность сосредоточена на x1 - x2 = -q: её аннулирует множитель (x1 - x2 + q)
    """
    q = Fraction(q)
    if q == 0:
        raise ExpressionError("q must be nonzero")
    x1, x2 = RationalFunction.variable("x1"), RationalFunction.variable("x2")
    pole = x1 - x2 + RationalFunction.constant(q)
    inverse = RationalFunction.constant(1) / pole
    at_zero = iota_expand(inverse, ExpansionDomain([("x1", ZERO), ("x2", ZERO)]), window)
    at_infinity = iota_expand(inverse, ExpansionDomain([("x1", INFINITY), ("x2", ZERO)]), window)
    difference = at_zero - at_infinity
    multiplier = WindowSeries.polynomial(("x1", "x2"), {(1, 0): Fraction(1), (0, 1): Fraction(-1), (0, 0): q})
    product = multiplier * difference
    zero = WindowSeries(product.variables, {}, product.guarantee)
    witness = product.compare(zero)
    return {
        "identity": "expansion_difference",
        "verdict": "pass" if witness is None and len(difference) else "fail",
        "q": format_scalar(q),
        "support_terms": len(difference),
        "witness": witness,
    }


# ============================================
# VERIFICATION / ПРОВЕРКИ
# ============================================


def generator_label(name: str) -> Tuple[Tuple[str, int], ...]:
    """u(-1)1, the vector whose field is u(x)"""
    return ((name, -1),)


def generator_datum(algebra: ModeAlgebra, a: str, b: str) -> SLocalityDatum:
    """S-locality datum of (a, b) read off the exchange rule"""
    rule = algebra.rule(a, b)
    if not isinstance(rule, BraidedRule):
        raise SeriesError(f"no vacuum-side braiding for ({a}, {b})")
    return SLocalityDatum([(generator_label(b_i), generator_label(a_i), series)
                           for b_i, a_i, series in rule.components])


def check_dy_qva(q: Fraction, maxdeg: int, window: CheckWindow, pairs: Optional[Sequence[Tuple[str, str]]] = None,
                 rank_degree: int = 2, rank_order: int = 2, max_order: Optional[int] = None,
                 max_cells: Optional[int] = None) -> List[Dict[str, object]]:
    """
    Vacuum axioms, defining relations, S-locality and S-Jacobi on generator pairs of V_q, Z_1 evidence
    """
    module = build_vq(q, maxdeg, max_cells)
    structure = TransportedStructure(module)
    algebra = module.algebra
    pairs = list(pairs) if pairs else [(a, b) for a in GENERATORS for b in GENERATORS]
    lines: List[Dict[str, object]] = [{"identity": "dimensions", "module": module.name,
                                       "dimensions": module.dimensions(), "verdict": "pass"}]
    for check in check_mode_relations(module, range(-maxdeg, maxdeg + 1), window.degree_bound):
        lines.append({"identity": f"relation[{check.pair[0]},{check.pair[1]}]",
                      "verdict": "pass" if check.passed else "fail", "checked": check.checked,
                      "witness": check.witness})
    reports: List[VerifierReport] = [check_vacuum_axioms(structure, window)]
    for a, b in pairs:
        datum = generator_datum(algebra, a, b)
        reports.append(check_s_locality(structure.generator(a), structure.generator(b),
                                        datum.resolve(structure), window, max_order))
        reports.append(check_s_jacobi(generator_label(a), generator_label(b), structure, datum, window))
    lines.extend(report.to_json() for report in reports)
    evidence = zn_rank_evidence(structure, 1, rank_degree, rank_order, max_cells)
    evidence["verdict"] = "pass" if evidence["full_rank"] else "fail"
    lines.append(evidence)
    return lines


def check_module_at_infinity_dy(q: Fraction, window: CheckWindow, maxdeg: int = 3, maxdepth: int = 3,
                                pairs: Sequence[Tuple[str, str]] = (("e", "f"), ("h", "e")),
                                max_order: Optional[int] = None,
                                max_cells: Optional[int] = None) -> List[Dict[str, object]]:
    """
    The restricted DY^inf module as a V_q-module-at-infinity, Y_W(u(-1)1, x) = u(x)
    W - зеркальный ковакуумный модуль
    """
    vq = build_vq(q, maxdeg, max_cells)
    restricted = build_dyinf_restricted(q, maxdepth, max_cells)
    algebra = TransportedStructure(vq)
    structure = TransportedStructure(vq, restricted, algebra)
    lines: List[Dict[str, object]] = [{"identity": "dimensions", "module": restricted.name,
                                       "dimensions": restricted.dimensions(), "verdict": "pass",
                                       "label": "mirror co-vacuum module"}]
    for check in check_mode_relations(restricted, range(-maxdepth - 1, maxdepth + 1), window.degree_bound):
        lines.append({"identity": f"relation_inf[{check.pair[0]},{check.pair[1]}]",
                      "verdict": "pass" if check.passed else "fail", "checked": check.checked,
                      "witness": check.witness})
    for a, b in pairs:
        report = check_module_at_infinity(structure, generator_label(a), generator_label(b), window,
                                          max_order=max_order)
        lines.append(report.to_json())
    return lines
