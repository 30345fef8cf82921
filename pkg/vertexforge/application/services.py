"""
Application Layer - Services
Оркестрация команд сценария: построение объектов, проверки, строки отчёта
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Sequence

from pydantic import ValidationError

from vertexforge.application.builders import (
    StructureContext,
    build_lie,
    build_qyb_matrix,
    build_structure,
    build_window,
    build_zf_data,
    parse_domain,
    parse_expression,
)
from vertexforge.application.dto import (
    PAYLOADS,
    BorcherdsCheckDTO,
    BraidingSolveDTO,
    CheckWindowDTO,
    DatumDTO,
    DeltaCheckDTO,
    DYBuildDTO,
    DYInfBuildDTO,
    ExpandDTO,
    ModuleAtInfinityDTO,
    QYBCheckDTO,
    ScenarioDTO,
    SJacobiCheckDTO,
    SLocalCheckDTO,
    WeakAssocCheckDTO,
    ZFBuildDTO,
    ZnRankDTO,
    error_message,
    error_pointer,
)
from vertexforge.config import Settings
from vertexforge.domain.borcherds import (
    DerivationStructure,
    PolynomialAlgebra,
    check_half_current_relation,
    check_vad_locality,
    half_current_datum,
    preset_half_currents,
)
from vertexforge.domain.exceptions import ExpressionError, ResourceLimitError, ScenarioError, VertexForgeError
from vertexforge.domain.fields import SLocalityDatum, TransportedStructure, yE_product
from vertexforge.domain.presentations import ModeModule, RelationCheck, check_mode_relations
from vertexforge.domain.ratfun import RationalFunction, iota_expand, iota_pair_delta, qyb_check
from vertexforge.domain.scalar import format_scalar
from vertexforge.domain.series import (
    KERNEL_X1_MINUS_X0,
    KERNEL_X1_MINUS_X2,
    KERNEL_X2_MINUS_X1,
    TWO_VAR,
    WindowSeries,
    delta_kernel,
    formal_residue,
)
from vertexforge.domain.verifiers import (
    FAIL,
    PASS,
    UNDETERMINED,
    CheckWindow,
    check_compatibility,
    check_s_jacobi,
    check_s_locality,
    check_shift_hexagon,
    check_vacuum_axioms,
    check_weak_associativity,
    closure_generate,
    compare_fields,
    d_operator,
    solve_braiding,
    zn_rank_evidence,
)
from vertexforge.domain.yangian import (
    DYPresentation,
    build_dyinf_restricted,
    build_vq,
    check_dy_qva,
    check_module_at_infinity_dy,
    dy_mode_relations,
    expansion_difference,
)
from vertexforge.domain.zf import build_vacuum_module, zf_mode_relations

logger = logging.getLogger("vertexforge.services")

Line = Dict[str, object]

BRAIDING_VERDICTS = {"unique": PASS, "underdetermined": UNDETERMINED, "inconsistent": FAIL}


@dataclass
class RunResult:
    """Report lines of one scenario and its exit code"""
    lines: List[Line] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 0 if all(line.get("verdict") == PASS for line in self.lines) else 1


def _window(dto: CheckWindowDTO) -> CheckWindow:
    return CheckWindow(dto.degree_bound, tuple(dto.modes) if dto.modes else None)


def _zero_like(series: WindowSeries) -> WindowSeries:
    return WindowSeries(series.variables, {}, series.guarantee)


def _identity_line(identity: str, witness, **extra) -> Line:
    line: Line = {"identity": identity, "verdict": PASS if witness is None else FAIL}
    if witness is not None:
        line["witness"] = witness
    line.update(extra)
    return line


def _relation_lines(checks: List[RelationCheck], prefix: str) -> Iterator[Line]:
    for check in checks:
        yield {"identity": f"{prefix}[{check.pair[0]},{check.pair[1]}]",
               "verdict": PASS if check.passed else FAIL, "checked": check.checked,
               "undetermined": check.undetermined, "witness": check.witness}


def _expect_dimensions(line: Line, expected: Optional[List[int]], undetermined: Sequence[int] = ()) -> Line:
    """
    Compare graded dimensions with the expected list, degree by degree
    Where relations were dropped the computed dimension is only an upper bound
    """
    if expected is None:
        return line
    line["expected"] = expected
    actual = [dim for _, dim in line["dimensions"]]
    for degree, dim in enumerate(expected):
        if degree >= len(actual) or actual[degree] != dim:
            bounded = degree < len(actual) and degree in undetermined and actual[degree] > dim
            line["verdict"] = UNDETERMINED if bounded else FAIL
            line["witness"] = {"degree": degree}
            break
    return line


def _dimension_line(module, expected: Optional[List[int]], **extra) -> Line:
    line: Line = {"identity": "dimensions", "module": module.name, "dimensions": module.dimensions(),
                  "verdict": PASS}
    undetermined = module.undetermined_degrees() if isinstance(module, ModeModule) else []
    if undetermined:
        line["undetermined_degrees"] = undetermined
    line.update(extra)
    return _expect_dimensions(line, expected, undetermined)


class ScenarioService:
    """
    Сервис выполнения сценариев

    Отвечает за:
    - Проверку полезной нагрузки команды
    - Построение объектов через builders
    - Запуск проверок и сбор строк отчёта
    """

    def __init__(self, settings: Settings, max_cells: Optional[int] = None):
        self.settings = settings
        self.cli_max_cells = max_cells
        self._handlers: Dict[str, Callable] = {
            "expand": self._expand,
            "delta-check": self._delta_check,
            "zf-build": self._zf_build,
            "dy-build": self._dy_build,
            "dyinf-build": self._dyinf_build,
            "borcherds-check": self._borcherds_check,
            "slocal-check": self._slocal_check,
            "sjacobi-check": self._sjacobi_check,
            "weakassoc-check": self._weakassoc_check,
            "braiding-solve": self._braiding_solve,
            "zn-rank": self._zn_rank,
            "qyb-check": self._qyb_check,
            "module-at-infinity-check": self._module_at_infinity_check,
        }

    def run(self, scenario: ScenarioDTO) -> RunResult:
        """
        Выполнить сценарий

        Workflow:
        1. payload -> DTO команды (ScenarioError с указателем)
        2. обработчик команды выдаёт строки отчёта
        3. ResourceLimitError -> строка kind="resource"
        """
        try:
            payload = PAYLOADS[scenario.command].model_validate(scenario.payload)
        except ValidationError as exc:
            raise ScenarioError(error_message(exc), error_pointer(exc, "/payload")) from exc
        self.constants: Dict[str, Fraction] = dict(scenario.constants)
        self.max_cells = self.cli_max_cells or scenario.options.max_cells or self.settings.max_cells
        self.max_order = scenario.options.max_order if scenario.options.max_order is not None \
            else self.settings.max_order

        result = RunResult()
        try:
            for line in self._handlers[scenario.command](payload):
                result.lines.append(line)
        except ResourceLimitError as exc:
            logger.warning("%s: resource guard tripped: %s", scenario.command, exc)
            result.lines.append({"kind": "resource", "verdict": FAIL, "message": str(exc),
                                 "max_cells": self.max_cells})
        except ExpressionError as exc:
            raise ScenarioError(str(exc), "/payload") from exc
        except ScenarioError:
            raise
        except VertexForgeError as exc:
            result.lines.append({"kind": "error", "verdict": FAIL, "error": type(exc).__name__,
                                 "message": str(exc)})
        for line in result.lines:
            line.setdefault("command", scenario.command)
            if scenario.options.label:
                line.setdefault("scenario", scenario.options.label)
        logger.info("%s: %d lines, exit %d", scenario.command, len(result.lines), result.exit_code)
        return result

    # ============================================
    # Series / Ряды
    # ============================================

    def _expand(self, dto: ExpandDTO) -> Iterator[Line]:
        r = parse_expression(dto.expr, self.constants, "/payload/expr")
        domain = parse_domain(dto.domain, "/payload/domain")
        window = build_window(dto.window, domain.variables, "/payload/window")
        series = iota_expand(r, domain, window)
        line: Line = {"identity": "expand", "expr": dto.expr, "domain": str(domain), "window": window.as_dict(),
                      "terms": series.to_json(), "verdict": PASS}
        if len(domain.variables) == 1:
            var = domain.variables[0]
            lo, hi = window[var]
            coefficients = [series.coefficient({var: e}) for e in range(lo, hi + 1)]
            line["coefficients"] = [format_scalar(c) for c in coefficients]
            if dto.expect is not None:
                mismatch = [lo + i for i, (c, e) in enumerate(zip(coefficients, dto.expect)) if c != e]
                if mismatch or len(dto.expect) > len(coefficients):
                    line["verdict"] = FAIL
                    line["witness"] = {var: mismatch[0] if mismatch else lo + len(coefficients)}
        elif dto.expect is not None:
            raise ScenarioError("expect is supported for one-variable domains", "/payload/expect")
        yield line

    def _delta_check(self, dto: DeltaCheckDTO) -> Iterator[Line]:
        if dto.kind == "annihilation":
            window = build_window(dto.window, ("x1", "x2"), "/payload/window")
            factor = WindowSeries.polynomial(("x1", "x2"), {(1, 0): Fraction(1), (0, 1): Fraction(-1)})
            product = factor * delta_kernel(TWO_VAR, window)
            yield _identity_line("(x1-x2)delta(x2/x1)", product.compare(_zero_like(product)),
                                 window=product.guarantee.as_dict())
        elif dto.kind == "three_term":
            window = build_window(dto.window, ("x0", "x1", "x2"), "/payload/window")
            lhs = delta_kernel(KERNEL_X1_MINUS_X2, window) - delta_kernel(KERNEL_X2_MINUS_X1, window)
            rhs = delta_kernel(KERNEL_X1_MINUS_X0, window)
            yield _identity_line("three_term_delta", lhs.compare(rhs), window=window.as_dict())
        elif dto.kind == "pair_delta":
            window = build_window(dto.window, ("x1", "x2"), "/payload/window")
            text = dto.expr or "1/(x1 - x2)"
            r = parse_expression(text, self.constants, "/payload/expr")
            difference = iota_pair_delta(r, window)
            if dto.expr is None:
                witness = difference.compare(delta_kernel(TWO_VAR, window))
            else:
                pole = RationalFunction(r.denominator)
                factor = WindowSeries.polynomial(("x1", "x2"), pole.polynomial_terms(("x1", "x2")))
                product = factor * difference
                witness = product.compare(_zero_like(product))
            yield _identity_line("pair_delta", witness, expr=text, terms=len(difference), window=window.as_dict())
        elif dto.kind == "residue":
            r = parse_expression(dto.expr, self.constants, "/payload/expr")
            domain = parse_domain(dto.domain, "/payload/domain")
            window = build_window(dto.window, domain.variables, "/payload/window")
            residue = formal_residue(iota_expand(r, domain, window).derivative(dto.var), dto.var)
            yield _identity_line("residue_of_derivative", residue.compare(_zero_like(residue)),
                                 expr=dto.expr, var=dto.var, window=window.as_dict())
        else:
            window = build_window(dto.window, ("x1", "x2"), "/payload/window")
            yield expansion_difference(dto.q, window)

    # ============================================
    # Modules / Модули
    # ============================================

    def _zf_build(self, dto: ZFBuildDTO) -> Iterator[Line]:
        data, q_report = build_zf_data(dto, self.constants, "/payload")
        if q_report is not None:
            line: Line = {"identity": "q_system", "verdict": PASS if q_report.unitarity else FAIL,
                          "unitarity": q_report.unitarity}
            if q_report.factorization is not None:
                line["factorization"] = q_report.factorization
            yield line
        module = build_vacuum_module(data, dto.maxdeg, self.max_cells)
        yield _dimension_line(module, dto.expect_dimensions)
        if dto.relation_window is not None:
            window = _window(dto.relation_window)
            modes = window.modes or (-dto.maxdeg - 1, dto.maxdeg)
            yield from _relation_lines(
                check_mode_relations(module, range(modes[0], modes[1] + 1), window.degree_bound), "relation")
        if dto.mode_window is not None:
            relations = zf_mode_relations(data, tuple(dto.mode_window))
            yield {"identity": "mode_relations", "verdict": PASS, "count": len(relations),
                   "relations": [relation.to_json() for relation in relations]}
        if dto.vertex_checks:
            structure = TransportedStructure(module)
            window = _window(dto.relation_window) if dto.relation_window else CheckWindow(min(2, dto.maxdeg))
            yield check_vacuum_axioms(structure, window).to_json()
            for generator in module.algebra.generators:
                _, report = d_operator(structure, ((generator, -1),), window)
                yield report.to_json()

    def _dy_build(self, dto: DYBuildDTO) -> Iterator[Line]:
        if dto.mode_window is not None:
            relations = dy_mode_relations(DYPresentation(dto.q, dto.presentation), tuple(dto.mode_window))
            yield {"identity": "mode_relations", "presentation": dto.presentation, "verdict": PASS,
                   "count": len(relations), "relations": [relation.to_json() for relation in relations]}
        if dto.expansion_window is not None:
            yield expansion_difference(dto.q, build_window(dto.expansion_window, ("x1", "x2"),
                                                           "/payload/expansion_window"))
        if dto.qva is not None:
            pairs = [tuple(pair) for pair in dto.qva.pairs] if dto.qva.pairs else None
            lines = check_dy_qva(dto.q, dto.maxdeg, _window(dto.qva.window), pairs, dto.qva.rank_degree,
                                 dto.qva.rank_order, self.max_order, self.max_cells)
            _expect_dimensions(lines[0], dto.expect_dimensions)
            yield from lines
            return
        module = build_vq(dto.q, dto.maxdeg, self.max_cells)
        yield _dimension_line(module, dto.expect_dimensions)
        if dto.relation_window is not None:
            window = _window(dto.relation_window)
            modes = window.modes or (-dto.maxdeg, dto.maxdeg)
            yield from _relation_lines(
                check_mode_relations(module, range(modes[0], modes[1] + 1), window.degree_bound), "relation")

    def _dyinf_build(self, dto: DYInfBuildDTO) -> Iterator[Line]:
        module = build_dyinf_restricted(dto.q, dto.maxdepth, self.max_cells)
        yield _dimension_line(module, dto.expect_dimensions, label="mirror co-vacuum module")
        if dto.relation_window is not None:
            window = _window(dto.relation_window)
            modes = window.modes or (-dto.maxdepth - 1, dto.maxdepth)
            yield from _relation_lines(
                check_mode_relations(module, range(modes[0], modes[1] + 1), window.degree_bound), "relation_inf")

    def _module_at_infinity_check(self, dto: ModuleAtInfinityDTO) -> Iterator[Line]:
        yield from check_module_at_infinity_dy(dto.q, _window(dto.window), dto.maxdeg, dto.maxdepth,
                                               [tuple(pair) for pair in dto.pairs], self.max_order, self.max_cells)

    def _borcherds_check(self, dto: BorcherdsCheckDTO) -> Iterator[Line]:
        lie = build_lie(dto.lie, "/payload/lie")
        algebra, fields = preset_half_currents(lie, dto.maxdeg)
        window = _window(dto.window)
        if dto.axioms:
            yield _identity_line("diff_algebra_axioms", algebra.check_axioms(window.degree_bound),
                                 algebra=algebra.name)
        pairs = dto.pairs or [(a, b) for a in lie.names for b in lie.names]
        for position, (a, b) in enumerate(pairs):
            for name in (a, b):
                if name not in lie.names:
                    raise ScenarioError(f"unknown basis element {name!r}", f"/payload/pairs/{position}")
            yield check_half_current_relation(algebra, a, b, window).to_json()
        structure = DerivationStructure(algebra)
        for position, product in enumerate(dto.products):
            if product.a not in fields or product.b not in fields:
                raise ScenarioError("unknown basis element in product", f"/payload/products/{position}")
            datum = half_current_datum(algebra, product.a, product.b).resolve(structure)
            computed = yE_product(fields[product.a], fields[product.b], product.n, datum)
            expected = structure.field_of(structure.product(algebra.element(product.a), product.n,
                                                            algebra.element(product.b)))
            yield compare_fields(computed, expected, window,
                                 f"product[{product.a}^-_{product.n}{product.b}^-]").to_json()
        if dto.closure is not None:
            basis = closure_generate(list(fields.values()), dto.closure.depth, window,
                                     tuple(dto.closure.indices), max_order=self.max_order)
            yield {"identity": "closure", "verdict": PASS, "size": len(basis),
                   "fields": [f.name for f in basis], "depth": dto.closure.depth}
        if dto.polynomial is not None:
            polynomial = PolynomialAlgebra(dto.polynomial.maxdeg)
            yield _identity_line("diff_algebra_axioms", polynomial.check_axioms(dto.polynomial.degree_bound),
                                 algebra=polynomial.name)
            yield check_vad_locality(polynomial, dto.polynomial.degree_bound, dto.polynomial.order)

    # ============================================
    # Verifiers / Проверки тождеств
    # ============================================

    def _context(self, dto) -> StructureContext:
        return build_structure(dto.structure, self.constants, self.max_cells, "/payload/structure")

    def _datum(self, context: StructureContext, dto: Optional[DatumDTO], a, b) -> SLocalityDatum:
        """Explicit datum, or the one read off the generator exchange relation"""
        if dto is None:
            if not isinstance(a, str) or not isinstance(b, str) or a in ("1", "vacuum") or b in ("1", "vacuum"):
                raise ScenarioError("a datum is required unless both operands are generators", "/payload/datum")
            return context.generator_datum(a, b)
        triples = []
        for position, triple in enumerate(dto.triples):
            where = f"/payload/datum/triples/{position}"
            f = parse_expression(triple.f, self.constants, f"{where}/f")
            if set(f.variables) - {"x"}:
                raise ScenarioError("datum functions are univariate in x", f"{where}/f")
            triples.append((context.operand(triple.b, f"{where}/b"), context.operand(triple.a, f"{where}/a"), f))
        return SLocalityDatum(triples, dto.k)

    def _slocal_check(self, dto: SLocalCheckDTO) -> Iterator[Line]:
        context = self._context(dto)
        structure = context.structure
        window = _window(dto.window)
        a = structure.field_of(context.operand(dto.a, "/payload/a"))
        b = structure.field_of(context.operand(dto.b, "/payload/b"))
        if dto.compatibility is not None:
            p = parse_expression(dto.compatibility, self.constants, "/payload/compatibility")
            yield check_compatibility([a, b], p, window).to_json()
        datum = self._datum(context, dto.datum, dto.a, dto.b)
        yield check_s_locality(a, b, datum.resolve(structure), window, self.max_order).to_json()

    def _sjacobi_check(self, dto: SJacobiCheckDTO) -> Iterator[Line]:
        context = self._context(dto)
        structure = context.structure
        window = _window(dto.window)
        u = context.operand(dto.u, "/payload/u")
        v = context.operand(dto.v, "/payload/v")
        datum = self._datum(context, dto.datum, dto.u, dto.v)
        levels = tuple(dto.levels) if dto.levels else None
        jacobi = check_s_jacobi(u, v, structure, datum, window, levels)
        yield jacobi.to_json()
        if dto.equivalence:
            locality = check_s_locality(structure.field_of(u), structure.field_of(v), datum.resolve(structure),
                                        window, self.max_order)
            associativity = check_weak_associativity(u, v, structure, window, max_order=self.max_order)
            agree = jacobi.passed == (locality.passed and associativity.passed)
            yield {"identity": f"equivalence[{structure.render(u)},{structure.render(v)}]",
                   "verdict": PASS if agree else FAIL, "s_jacobi": jacobi.verdict,
                   "s_locality": locality.verdict, "weak_associativity": associativity.verdict}

    def _weakassoc_check(self, dto: WeakAssocCheckDTO) -> Iterator[Line]:
        context = self._context(dto)
        structure = context.structure
        window = _window(dto.window)
        u = context.operand(dto.u, "/payload/u")
        v = context.operand(dto.v, "/payload/v")
        quasi = parse_expression(dto.quasi, self.constants, "/payload/quasi") if dto.quasi else None
        yield check_weak_associativity(u, v, structure, window, dto.l, quasi, max_order=self.max_order).to_json()
        if dto.vacuum:
            yield check_vacuum_axioms(structure, window).to_json()
            _, report = d_operator(structure, u, window)
            yield report.to_json()

    def _braiding_solve(self, dto: BraidingSolveDTO) -> Iterator[Line]:
        context = self._context(dto)
        structure = context.structure
        window = _window(dto.window)
        u = context.operand(dto.u, "/payload/u")
        v = context.operand(dto.v, "/payload/v")
        if dto.pool is None:
            pool = context.generator_pairs()
        else:
            pool = [(context.operand(p, f"/payload/pool/{i}/0"), context.operand(q, f"/payload/pool/{i}/1"))
                    for i, (p, q) in enumerate(dto.pool)]
        solution = solve_braiding(u, v, structure, window, pool, dto.k, dto.series_order, self.max_order,
                                  self.max_cells)
        line: Line = {"identity": f"braiding[{structure.render(u)},{structure.render(v)}]",
                      "verdict": BRAIDING_VERDICTS[solution.status], "determined": solution.determined}
        line.update(solution.to_json(structure.render))
        yield line
        if dto.hexagon:
            if not context.mode_module:
                raise ScenarioError("shift and hexagon checks need a ZF or DY structure", "/payload/hexagon")
            braiding = {(context.read_generator(a), context.read_generator(b)): context.generator_datum(a, b)
                        for a in context.generators for b in context.generators}
            for report in check_shift_hexagon(structure, braiding, window, tuple(dto.indices), self.max_order):
                yield report.to_json()

    def _zn_rank(self, dto: ZnRankDTO) -> Iterator[Line]:
        context = self._context(dto)
        evidence = zn_rank_evidence(context.structure, dto.n, dto.degree_bound, dto.series_order, self.max_cells)
        evidence["verdict"] = PASS if evidence["full_rank"] else FAIL
        yield evidence

    def _qyb_check(self, dto: QYBCheckDTO) -> Iterator[Line]:
        matrix = build_qyb_matrix(dto.matrix, self.constants, "/payload/matrix")
        for report in qyb_check(matrix, dto.mode):
            yield _identity_line(f"qyb_{report.identity}", report.witness)
