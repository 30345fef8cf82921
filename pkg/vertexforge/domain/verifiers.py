"""
Domain Layer - Identity verifiers
Проверки тождеств: S-локальность, S-Якоби, слабая ассоциативность, модули в бесконечности

Every verifier compares both sides of an identity coefficient by
coefficient, applied to each basis vector of W up to a degree bound.
An explicit mode window is strict; without one the verifier walks the
modes the truncation determines and counts what it had to skip.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from vertexforge.domain.exceptions import (
    EvidenceError,
    LinearSystemError,
    OrientationError,
    ResourceLimitError,
    TruncationError,
)
from vertexforge.domain.fields import (
    LAURENT_DOWN,
    LAURENT_UP,
    FieldOperator,
    SLocalityDatum,
    VertexStructure,
    _polynomial_terms,
    _Substitution,
    check_orientation,
    identity_field,
    power_polynomial,
    yE_product,
)
from vertexforge.domain.linmod import EchelonForm, GradedModule, ModuleVector, linear_combination, rref_solve
from vertexforge.domain.ratfun import LazySeries, RationalFunction
from vertexforge.domain.scalar import format_scalar
from vertexforge.domain.series import binomial

logger = logging.getLogger("vertexforge.verifiers")

PASS = "pass"
FAIL = "fail"
UNDETERMINED = "undetermined"


# ============================================
# WINDOWS AND REPORTS / ОКНА И ОТЧЁТЫ
# ============================================


@dataclass(frozen=True)
class CheckWindow:
    """Degree bound on test vectors and an optional explicit mode window"""

    degree_bound: int
    modes: Optional[Tuple[int, int]] = None
    lenient: bool = False

    @property
    def strict(self) -> bool:
        return self.modes is not None and not self.lenient

    def mode_range(self, module: GradedModule) -> range:
        if self.modes is not None:
            return range(self.modes[0], self.modes[1] + 1)
        return range(-(module.maxdeg + 2), module.maxdeg + 3)

    def as_dict(self) -> Dict[str, object]:
        return {"degree_bound": self.degree_bound, "modes": list(self.modes) if self.modes else "auto"}


@dataclass
class VerifierReport:
    identity: str
    verdict: str
    window: Dict[str, object]
    degree_bound: int
    witness: Optional[Dict[str, object]] = None
    smallest_order: Optional[int] = None
    checked: int = 0
    undetermined: int = 0
    evidence: bool = False
    details: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_json(self) -> Dict[str, object]:
        data: Dict[str, object] = {
            "identity": self.identity,
            "verdict": self.verdict,
            "window": self.window,
            "degree_bound": self.degree_bound,
            "checked": self.checked,
            "undetermined": self.undetermined,
        }
        if self.witness is not None:
            data["witness"] = self.witness
        if self.smallest_order is not None:
            data["smallest_order"] = self.smallest_order
        if self.evidence:
            data["label"] = "EVIDENCE"
        data.update(self.details)
        return data


class _Tally:
    """Coefficient comparisons of one verification run"""

    def __init__(self, window: CheckWindow, render: Callable[[object], str]):
        self.strict = window.strict
        self.render = render
        self.checked = 0
        self.undetermined = 0
        self.witness: Optional[Dict[str, object]] = None

    @property
    def failed(self) -> bool:
        return self.witness is not None

    def compare(self, compute: Callable[[], Tuple[ModuleVector, ModuleVector]], where: Dict[str, object]):
        try:
            lhs, rhs = compute()
        except TruncationError:
            if self.strict:
                raise
            self.undetermined += 1
            return
        self.checked += 1
        if lhs != rhs and self.witness is None:
            self.witness = dict(where, lhs=lhs.to_json(self.render), rhs=rhs.to_json(self.render))

    def verdict(self) -> str:
        if self.witness is not None:
            return FAIL
        return PASS if self.checked else UNDETERMINED

    def report(self, identity: str, window: CheckWindow, **extra) -> VerifierReport:
        report = VerifierReport(identity, self.verdict(), window.as_dict(), window.degree_bound, self.witness,
                                checked=self.checked, undetermined=self.undetermined, **extra)
        logger.debug("%s: %s (%d checked, %d skipped)", identity, report.verdict, self.checked, self.undetermined)
        return report


def _labels(module: GradedModule, window: CheckWindow) -> List[object]:
    return module.basis_vectors(window.degree_bound)


def _mode_pairs(window: CheckWindow, a: FieldOperator, b: FieldOperator, d: int,
                offset: int = 0) -> Iterator[Tuple[int, int]]:
    modes = window.mode_range(a.module)
    for m in modes:
        for n in modes:
            if window.strict:
                yield m, n
                continue
            final = d + a.shift(m) + b.shift(n) - offset
            if 0 <= final <= a.module.maxdeg:
                yield m, n


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _search(orders: Iterable[int], run: Callable[[int], VerifierReport], searched: bool) -> VerifierReport:
    report = None
    for k in orders:
        report = run(k)
        if report.passed:
            if searched:
                report.smallest_order = k
            return report
    return report


def _orders(k: Optional[int], max_order: Optional[int]) -> Tuple[List[int], bool]:
    if k is not None:
        return [k], False
    if max_order is None:
        raise EvidenceError("an order k or a search bound max_order is required")
    return list(range(max_order + 1)), True


# ============================================
# COMPATIBILITY / СОВМЕСТИМОСТЬ
# ============================================


def check_compatibility(fields: Sequence[FieldOperator], p, window: CheckWindow) -> VerifierReport:
    """
    p(x1,x2) a(x1) b(x2) w has exponents bounded jointly in x1, x2
    E(W): снизу, E°(W): сверху; проверяется на каждом базисном векторе
    """
    identity = "compatibility"
    if len(fields) > 2:
        raise EvidenceError("compatibility is checked for at most two fields")
    terms = _polynomial_terms(p)
    if len(fields) < 2:
        return VerifierReport(identity, PASS, window.as_dict(), window.degree_bound)
    a, b = fields
    orientation = check_orientation(a, b)
    module = a.module
    tally = _Tally(window, module.render)
    exponents = window.mode_range(module)
    zero = ModuleVector.zero()
    for label in _labels(module, window):
        sub = _Substitution(a, b, terms, label)
        if orientation == LAURENT_DOWN:
            rows = [i for i in exponents if i < sub.i_bound]
            columns = [j for j in exponents if j >= sub.j_bound]
        else:
            rows = [i for i in exponents if i > sub.i_bound]
            columns = [j for j in exponents if j <= sub.j_bound]
        for i in rows:
            for j in columns:
                tally.compare(lambda: (sub.coefficient(i, j), zero),
                              {"vector": module.render(label), "monomial": {"x1": i, "x2": j}})
                if tally.failed:
                    break
            if tally.failed:
                break
        if tally.failed:
            break
    return tally.report(identity, window)


# ============================================
# S-LOCALITY / S-ЛОКАЛЬНОСТЬ
# ============================================


class _Products:
    """Memoized a(m) b(n) w"""

    def __init__(self):
        self._cache: Dict[tuple, ModuleVector] = {}

    def apply(self, a: FieldOperator, m: int, b: FieldOperator, n: int, label) -> ModuleVector:
        key = (id(a), m, id(b), n, label)
        cached = self._cache.get(key)
        if cached is None:
            d = b.module.degree(label)
            if b.vanishes(n, d):
                cached = ModuleVector.zero()
            else:
                cached = a.mode(m, b.act(n, label))
            self._cache[key] = cached
        return cached


def _locality_lhs(a, b, k, m, n, label, products: _Products) -> ModuleVector:
    """Coefficient of x1^{-m-1} x2^{-n-1} in (x1 - x2)^k a(x1) b(x2) w"""
    return linear_combination(
        (Fraction(binomial(k, s) * _sign(s)), products.apply(a, m + k - s, b, n + s, label)) for s in range(k + 1)
    )


def _locality_rhs(datum: SLocalityDatum, k, m, n, label, products: _Products) -> ModuleVector:
    """Coefficient of x1^{-m-1} x2^{-n-1} in (x1 - x2)^k sum_i f_i(x2 - x1) b_i(x2) a_i(x1) w"""
    pieces = []
    for b_i, a_i, f in datum.triples:
        d = a_i.module.degree(label)
        for shift in range(0, d + a_i.wt - m):
            if a_i.vanishes(m + shift, d):
                continue
            d_inner = d + a_i.shift(m + shift)
            for j in range(f.lowest, d_inner + b_i.wt - n - k + shift):
                factor = binomial(j + k, shift)
                if not factor:
                    continue
                c = f.coefficient(j)
                if not c:
                    continue
                value = products.apply(b_i, n + j + k - shift, a_i, m + shift, label)
                pieces.append((_sign(k) * _sign(shift) * factor * c, value))
    return linear_combination(pieces)


def check_s_locality(a: FieldOperator, b: FieldOperator, datum: SLocalityDatum, window: CheckWindow,
                     max_order: Optional[int] = None) -> VerifierReport:
    """(x1 - x2)^k a(x1) b(x2) = (x1 - x2)^k sum_i f_i(x2 - x1) b_i(x2) a_i(x1)"""
    for b_i, a_i, _ in datum.triples:
        if not isinstance(b_i, FieldOperator) or not isinstance(a_i, FieldOperator):
            raise EvidenceError("datum operands must be resolved to fields")
        check_orientation(a, b, b_i, a_i)
    if a.orientation != LAURENT_DOWN:
        raise OrientationError("S-locality is checked in E(W)")
    module = a.module
    products = _Products()
    identity = f"s_locality[{a.name},{b.name}]"

    def run(k: int) -> VerifierReport:
        tally = _Tally(window, module.render)
        for label in _labels(module, window):
            d = module.degree(label)
            for m, n in _mode_pairs(window, a, b, d, k):
                tally.compare(
                    lambda: (_locality_lhs(a, b, k, m, n, label, products),
                             _locality_rhs(datum, k, m, n, label, products)),
                    {"vector": module.render(label), "m": m, "n": n, "k": k},
                )
                if tally.failed:
                    return tally.report(identity, window)
        return tally.report(identity, window)

    orders, searched = _orders(datum.k, max_order)
    return _search(orders, run, searched)


# ============================================
# S-JACOBI AND WEAK ASSOCIATIVITY
# ============================================


def _jacobi_a(u: FieldOperator, v: FieldOperator, l: int, m: int, n: int, label, products: _Products) -> ModuleVector:
    """x0^{-1} delta((x1 - x2)/x0) Y(u,x1) Y(v,x2) w"""
    d = v.module.degree(label)
    pieces = []
    for s in range(0, max(d + v.wt - n, 0)):
        if l >= 0 and s > l:
            break
        factor = binomial(l, s) * _sign(s)
        if factor:
            pieces.append((Fraction(factor), products.apply(u, m + l - s, v, n + s, label)))
    return linear_combination(pieces)


def _jacobi_b(datum: SLocalityDatum, l: int, m: int, n: int, label, products: _Products) -> ModuleVector:
    """x0^{-1} delta((x2 - x1)/(-x0)) sum_i f_i(-x0) Y(v_i,x2) Y(u_i,x1) w"""
    pieces = []
    for v_i, u_i, f in datum.triples:
        d = u_i.module.degree(label)
        for shift in range(0, d + u_i.wt - m):
            if u_i.vanishes(m + shift, d):
                continue
            d_inner = d + u_i.shift(m + shift)
            for j in range(f.lowest, d_inner + v_i.wt - n - l + shift):
                factor = binomial(l + j, shift)
                if not factor:
                    continue
                c = f.coefficient(j)
                if not c:
                    continue
                value = products.apply(v_i, n + l + j - shift, u_i, m + shift, label)
                pieces.append((_sign(l) * _sign(shift) * factor * c, value))
    return linear_combination(pieces)


def _jacobi_c(structure: VertexStructure, u, v, l: int, m: int, n: int, label) -> ModuleVector:
    """x2^{-1} delta((x1 - x0)/x2) Y(Y(u,x0)v, x2) w"""
    algebra = structure.algebra
    u_field = algebra.field_of(u)
    v_vector = algebra.vector(v)
    dv = algebra.space.vector_degree(v_vector)
    pieces = []
    for t in range(0, max(dv + u_field.wt - l, 0)):
        factor = binomial(t - m - 1, t) * _sign(t)
        if not factor:
            continue
        inner = u_field.mode(l + t, v_vector)
        if inner:
            pieces.append((Fraction(factor), structure.field_of(inner).mode(m + n - t, ModuleVector.basis(label))))
    return linear_combination(pieces)


def check_s_jacobi(u, v, structure: VertexStructure, datum: SLocalityDatum, window: CheckWindow,
                   levels: Optional[Sequence[int]] = None) -> VerifierReport:
    """
    A - B = C on the coefficient of x0^{-l-1} x1^{-m-1} x2^{-n-1}
    Уровни l по умолчанию берутся из окна мод, как m и n
    """
    resolved = datum.resolve(structure)
    u_field, v_field = structure.field_of(u), structure.field_of(v)
    if u_field.orientation != LAURENT_DOWN:
        raise OrientationError("the S-Jacobi identity is checked in E(W)")
    module = structure.module
    levels = list(levels) if levels is not None else list(window.mode_range(module))
    products = _Products()
    tally = _Tally(window, module.render)
    identity = f"s_jacobi[{structure.render(u)},{structure.render(v)}]"

    def done() -> VerifierReport:
        report = tally.report(identity, window)
        report.details["levels"] = [min(levels), max(levels)] if levels else []
        return report

    for label in _labels(module, window):
        d = module.degree(label)
        for l in levels:
            for m, n in _mode_pairs(window, u_field, v_field, d, l):
                tally.compare(
                    lambda: (_jacobi_a(u_field, v_field, l, m, n, label, products)
                             - _jacobi_b(resolved, l, m, n, label, products),
                             _jacobi_c(structure, u, v, l, m, n, label)),
                    {"vector": module.render(label), "l": l, "m": m, "n": n},
                )
                if tally.failed:
                    return done()
    return done()


def _associator_terms(quasi: Optional[RationalFunction], l: int) -> Dict[Tuple[int, int], Fraction]:
    if quasi is None:
        return {(l, 0): Fraction(1)}
    return _polynomial_terms(quasi)


def _assoc_lhs(u: FieldOperator, v: FieldOperator, alpha: int, r: int, n: int, label,
               products: _Products) -> ModuleVector:
    """x0^{-r-1} x2^{-n-1} in (x0 + x2)^alpha Y(u, x0 + x2) Y(v, x2) w"""
    d = v.module.degree(label)
    pieces = []
    for s in range(0, max(d + v.wt - n, 0)):
        factor = binomial(s - r - 1, s)
        if factor:
            pieces.append((Fraction(factor), products.apply(u, alpha + r - s, v, n + s, label)))
    return linear_combination(pieces)


def _assoc_rhs(structure: VertexStructure, u, v, alpha: int, r: int, n: int, label) -> ModuleVector:
    """x0^{-r-1} x2^{-n-1} in (x0 + x2)^alpha Y(Y(u, x0) v, x2) w"""
    pieces = []
    w = ModuleVector.basis(label)
    for c in range(alpha + 1):
        inner = structure.product(u, alpha + r - c, v)
        if inner:
            pieces.append((Fraction(binomial(alpha, c)), structure.field_of(inner).mode(n + c, w)))
    return linear_combination(pieces)


def check_weak_associativity(u, v, structure: VertexStructure, window: CheckWindow, l: Optional[int] = None,
                             quasi: Optional[RationalFunction] = None, vectors: Optional[Sequence] = None,
                             max_order: Optional[int] = None) -> VerifierReport:
    """
    p(x0 + x2, x2) Y(u, x0 + x2) Y(v, x2) w = p(x0 + x2, x2) Y(Y(u, x0) v, x2) w
    p = x1^l, либо полином квазимодуля
    """
    u_field, v_field = structure.field_of(u), structure.field_of(v)
    if u_field.orientation != LAURENT_DOWN:
        raise OrientationError("weak associativity is checked in E(W)")
    module = structure.module
    labels = list(vectors) if vectors is not None else _labels(module, window)
    products = _Products()
    identity = f"weak_associativity[{structure.render(u)},{structure.render(v)}]"

    def run(order: int) -> VerifierReport:
        terms = _associator_terms(quasi, order)
        tally = _Tally(window, module.render)
        for label in labels:
            d = module.degree(label)
            for r, n in _mode_pairs(window, u_field, v_field, d):
                def compute():
                    lhs = linear_combination((c, _assoc_lhs(u_field, v_field, alpha, r, n + beta, label, products))
                                             for (alpha, beta), c in terms.items())
                    rhs = linear_combination((c, _assoc_rhs(structure, u, v, alpha, r, n + beta, label))
                                             for (alpha, beta), c in terms.items())
                    return lhs, rhs

                tally.compare(compute, {"vector": module.render(label), "r": r, "n": n, "l": order})
                if tally.failed:
                    return tally.report(identity, window)
        return tally.report(identity, window)

    if quasi is not None:
        return run(0)
    orders, searched = _orders(l, max_order)
    return _search(orders, run, searched)


# ============================================
# VACUUM AXIOMS AND D / АКСИОМЫ ВАКУУМА И D
# ============================================


def check_vacuum_axioms(structure: VertexStructure, window: CheckWindow) -> VerifierReport:
    """
    Y(1,x) = 1_W; Y(v,x)1 in V[[x]] with constant term v
    Поля составных слов считаются с промежуточными степенями: промахи усечения не фатальны
    """
    space = structure.space
    if structure.module is not space:
        raise EvidenceError("vacuum axioms are checked on V itself")
    tally = _Tally(replace(window, lenient=True), space.render)
    vacuum = ModuleVector.basis(structure.vacuum)
    one = structure.field(structure.vacuum)
    for label in _labels(space, window):
        w = ModuleVector.basis(label)
        d = space.degree(label)
        for n in window.mode_range(space):
            expected = w if n == -1 else ModuleVector.zero()
            tally.compare(lambda: (one.mode(n, w), expected), {"vector": space.render(label), "field": "1", "n": n})
        y = structure.field(label)
        for n in range(-1, d + y.wt):
            expected = w if n == -1 else ModuleVector.zero()
            tally.compare(lambda: (y.mode(n, vacuum), expected), {"field": space.render(label), "n": n})
    return tally.report("vacuum_axioms", window)


def d_operator(structure: VertexStructure, v, window: CheckWindow) -> Tuple[ModuleVector, VerifierReport]:
    """
    D v = v_{-2} 1 and [D, Y(v,x)] = Y(Dv, x) = d/dx Y(v, x)
    В модах: D v(n) w - v(n) D w = -n v(n-1) w
    Пары (n, w) с итоговой степенью выше maxdeg пропускаются и в явном окне
    """
    space = structure.space
    if structure.module is not space:
        raise EvidenceError("the D operator acts on V itself")
    vacuum = ModuleVector.basis(structure.vacuum)
    dv = structure.product(v, -2, vacuum)
    y = structure.field_of(v)
    y_dv = structure.field_of(dv) if dv else None

    def derivation(vector: ModuleVector) -> ModuleVector:
        return linear_combination((c, structure.field(label).mode(-2, vacuum)) for label, c in vector.items())

    tally = _Tally(replace(window, lenient=True), space.render)
    for label in _labels(space, window):
        w = ModuleVector.basis(label)
        d = space.degree(label)
        for n in window.mode_range(space):
            if d + y.shift(n) + 1 > space.maxdeg:
                tally.undetermined += 2
                continue

            def bracket():
                lhs = derivation(y.mode(n, w)) - y.mode(n, derivation(w))
                return lhs, y.mode(n - 1, w) * (-n)

            def derived():
                lhs = y_dv.mode(n, w) if y_dv is not None else ModuleVector.zero()
                return lhs, y.mode(n - 1, w) * (-n)

            where = {"vector": space.render(label), "n": n}
            tally.compare(bracket, dict(where, identity="bracket"))
            tally.compare(derived, dict(where, identity="derivative"))
    report = tally.report(f"d_operator[{structure.render(v)}]", window)
    report.details["value"] = dv.to_json(space.render)
    return dv, report


# ============================================
# CLOSURE / ЗАМЫКАНИЕ
# ============================================


def mode_table(f: FieldOperator, window: CheckWindow) -> Dict[tuple, Fraction]:
    """Coefficients of f(n) w on basis vectors, over the determinable modes"""
    module = f.module
    table: Dict[tuple, Fraction] = {}
    for label in _labels(module, window):
        d = module.degree(label)
        modes = window.mode_range(module) if window.strict else f.nonvanishing_modes(d)
        for n in modes:
            try:
                image = f.act(n, label)
            except TruncationError:
                continue
            for out, c in image.items():
                table[(repr(label), n, repr(out))] = c
    return table


def compare_fields(f: FieldOperator, g: FieldOperator, window: CheckWindow, identity: str) -> VerifierReport:
    """f(n) w = g(n) w on basis vectors, modes determinable for both"""
    check_orientation(f, g)
    module = f.module
    tally = _Tally(window, module.render)
    for label in _labels(module, window):
        d = module.degree(label)
        modes = window.mode_range(module) if window.strict else f.nonvanishing_modes(d)
        for n in modes:
            tally.compare(lambda: (f.act(n, label), g.act(n, label)), {"vector": module.render(label), "n": n})
            if tally.failed:
                return tally.report(identity, window)
    return tally.report(identity, window)


def _compatibility_order(a: FieldOperator, b: FieldOperator, window: CheckWindow, max_order: Optional[int]) -> int:
    orders, _ = _orders(None, max_order)
    for k in orders:
        if check_compatibility([a, b], power_polynomial(k), window).verdict != FAIL:
            return k
    raise EvidenceError(f"{a.name} and {b.name} are not compatible up to order {max_order}")


def closure_generate(seed: Sequence[FieldOperator], depth: int, window: CheckWindow,
                     indices: Tuple[int, int] = (-1, 0),
                     evidence: Optional[Callable[[FieldOperator, FieldOperator], object]] = None,
                     max_order: Optional[int] = None) -> List[FieldOperator]:
    """
    Independent fields spanning the Y_E-closure of seed and 1_W up to a nesting depth
    Независимость - по ступенчатой форме таблиц мод
    """
    if not seed:
        raise EvidenceError("closure needs a nonempty seed")
    orientation = check_orientation(*seed)
    module = seed[0].module
    echelon = EchelonForm(key=lambda column: column)
    basis: List[FieldOperator] = []

    def admit(f: FieldOperator) -> bool:
        if echelon.add(mode_table(f, window)):
            basis.append(f)
            return True
        return False

    admit(identity_field(module, orientation))
    frontier = [f for f in seed if admit(f)]
    for level in range(1, depth):
        new = []
        for a in list(basis):
            for b in list(basis):
                if a not in frontier and b not in frontier:
                    continue
                proof = evidence(a, b) if evidence else power_polynomial(_compatibility_order(a, b, window, max_order))
                for n in range(indices[0], indices[1] + 1):
                    product = yE_product(a, b, n, proof)
                    if admit(product):
                        new.append(product)
        logger.debug("closure level %d: %d new fields", level + 1, len(new))
        if not new:
            break
        frontier = new
    return basis


# ============================================
# BRAIDING SOLVE / ВЫЧИСЛЕНИЕ ПЛЕТЕНИЯ
# ============================================


@dataclass
class BraidingSolution:
    datum: Optional[SLocalityDatum]
    status: str
    k: Optional[int] = None
    determined: Dict[str, int] = field(default_factory=dict)

    def to_json(self, render: Callable[[object], str]) -> Dict[str, object]:
        data: Dict[str, object] = {"status": self.status, "k": self.k}
        if self.datum is not None:
            data["datum"] = [
                {"b": render(b), "a": render(a), "order": f.order,
                 "coefficients": [[j, format_scalar(f.coefficient(j))] for j in range(f.lowest, f.order + 1)
                                  if f.coefficient(j)]}
                for b, a, f in self.datum.triples
            ]
        return data


def solve_braiding(u, v, structure: VertexStructure, window: CheckWindow, pool: Sequence[Tuple[object, object]],
                   k: Optional[int] = None, series_order: Optional[int] = None, max_order: Optional[int] = None,
                   max_cells: Optional[int] = None) -> BraidingSolution:
    """
    Unknown f_i = sum_j c_ij x^j for pool pairs (b_i, a_i), from S-locality of Y(u) and Y(v)
    Решение единственно или сообщается как недоопределённое/несовместное
    """
    a, b = structure.field_of(u), structure.field_of(v)
    if a.orientation != LAURENT_DOWN:
        raise OrientationError("braiding is solved in E(W)")
    if not pool:
        raise EvidenceError("empty candidate pool")
    module = structure.module
    top = series_order if series_order is not None else 2 * module.maxdeg
    fields = [(structure.field_of(p), structure.field_of(q)) for p, q in pool]
    products = _Products()
    orders, _ = _orders(k, max_order)
    last = None
    for order in orders:
        unknowns = [(i, j) for i in range(len(pool)) for j in range(-order, top + 1)]
        rows, rhs = _braiding_system(a, b, fields, unknowns, order, window, products)
        if max_cells is not None and len(rows) * (len(unknowns) + 1) > max_cells:
            logger.warning("braiding system %dx%d exceeds the cell guard", len(rows), len(unknowns))
            raise ResourceLimitError(f"braiding system exceeds max_cells={max_cells}")
        if not rows:
            return BraidingSolution(None, "underdetermined", order)
        try:
            solution = rref_solve(rows, "solve", rhs, max_cells)
        except LinearSystemError:
            last = BraidingSolution(None, "inconsistent", order)
            continue
        kernel = rref_solve(rows, "kernel", None, max_cells)
        free = {idx for vector in kernel for idx, value in enumerate(vector) if value}
        triples = []
        determined = {}
        for i, (p, q) in enumerate(pool):
            indices = [idx for idx, (pi, _) in enumerate(unknowns) if pi == i]
            reach = -order - 1
            for idx in indices:
                if idx in free:
                    break
                reach = unknowns[idx][1]
            if reach < -order:
                return BraidingSolution(None, "underdetermined", order)
            table = {unknowns[idx][1]: solution[idx] for idx in indices if unknowns[idx][1] <= reach}
            determined[f"{structure.render(p)}|{structure.render(q)}"] = reach
            series = LazySeries(coefficients=table, order=reach)
            if not series.is_zero:
                triples.append((p, q, series))
        return BraidingSolution(SLocalityDatum(triples, order), "unique", order, determined)
    return last


def _braiding_system(a, b, fields, unknowns, k, window, products):
    module = a.module
    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    for label in _labels(module, window):
        d = module.degree(label)
        for m, n in _mode_pairs(window, a, b, d, k):
            try:
                lhs = _locality_lhs(a, b, k, m, n, label, products)
                columns = []
                for i, j in unknowns:
                    b_i, a_i = fields[i]
                    columns.append(_single_term(b_i, a_i, j, k, m, n, label, products))
            except TruncationError:
                continue
            outputs = set(lhs.labels)
            for column in columns:
                outputs.update(column.labels)
            for out in sorted(outputs, key=repr):
                row = [column.coefficient(out) for column in columns]
                value = lhs.coefficient(out)
                if any(row) or value:
                    rows.append(row)
                    rhs.append(value)
    return rows, rhs


def _single_term(b_i: FieldOperator, a_i: FieldOperator, j: int, k: int, m: int, n: int, label,
                 products: _Products) -> ModuleVector:
    """Contribution of x^j in f_i to the S-locality right-hand side"""
    d = a_i.module.degree(label)
    pieces = []
    for shift in range(0, max(d + a_i.wt - m, 0)):
        factor = binomial(j + k, shift)
        if factor and not a_i.vanishes(m + shift, d):
            value = products.apply(b_i, n + j + k - shift, a_i, m + shift, label)
            pieces.append((_sign(k) * _sign(shift) * factor, value))
    return linear_combination(pieces)


# ============================================
# NON-DEGENERACY EVIDENCE / НЕВЫРОЖДЕННОСТЬ
# ============================================


def zn_rank_evidence(structure: VertexStructure, n: int, degree_bound: int, series_order: int,
                     max_cells: Optional[int] = None) -> Dict[str, object]:
    """
    Rank of Z_n on a finite slice: labels up to degree_bound, exponents up to series_order
    Rows are output coefficients at exponents up to zn_row_reach; a coefficient of degree above
    maxdeg falls outside every row, and a (row, degree) block is left out when some column
    cannot be computed there.

    Полный ранг - свидетельство инъективности, не доказательство
    """
    if n not in (1, 2):
        raise EvidenceError("Z_n evidence is available for n = 1, 2")
    space = structure.space
    if structure.module is not space:
        raise EvidenceError("Z_n acts on V itself")
    labels = space.basis_vectors(degree_bound)
    vacuum = ModuleVector.basis(structure.vacuum)
    exponents = range(series_order + 1)
    reach = range(zn_row_reach(n, degree_bound, series_order) + 1)
    if n == 1:
        columns = [(v, i) for v in labels for i in exponents]
        row_keys = [(e,) for e in reach]
    else:
        columns = [(u, v, i, j) for u in labels for v in labels for i in exponents for j in exponents]
        low = -(2 * degree_bound + 2)
        row_keys = [(e1, e2) for e1 in range(low, reach[-1] + 1) for e2 in reach]
    cells = len(columns) * len(row_keys) * max(len(space.basis_vectors()), 1)
    if max_cells is not None and cells > max_cells:
        logger.warning("Z_%d slice of %d cells exceeds the guard", n, cells)
        raise ResourceLimitError(f"Z_{n} slice exceeds max_cells={max_cells}")

    def image(column, key) -> Tuple[int, Callable[[], ModuleVector]]:
        """Degree of the coefficient and how to compute it"""
        if n == 1:
            v, i = column
            (e,) = key
            y = structure.field(v)
            return y.shift(i - e - 1), lambda: y.mode(i - e - 1, vacuum)
        u, v, i, j = column
        e1, e2 = key
        yu, yv = structure.field(u), structure.field(v)
        degree = yv.shift(j - e2 - 1) + yu.shift(i - e1 - 1)
        return degree, lambda: yu.mode(i - e1 - 1, yv.mode(j - e2 - 1, vacuum))

    # a coefficient above maxdeg meets no output row of the slice
    table: Dict[tuple, List[ModuleVector]] = {}
    blind: Dict[tuple, Set[int]] = {}
    above = 0
    for key in row_keys:
        values = []
        for column in columns:
            degree, compute = image(column, key)
            if degree > space.maxdeg:
                above += 1
                values.append(ModuleVector.zero())
                continue
            try:
                values.append(compute())
            except TruncationError:
                blind.setdefault(key, set()).add(degree)
                values.append(ModuleVector.zero())
        table[key] = values
    undetermined = sorted([*key, degree] for key, degrees in blind.items() for degree in degrees)
    if undetermined:
        logger.warning("Z_%d: %d (row, degree) slices need words beyond maxdeg=%d", n, len(undetermined),
                       space.maxdeg)
    outputs = sorted({out for values in table.values() for value in values for out in value.labels}, key=repr)
    rows = [[value.coefficient(out) for value in values] for key, values in table.items() for out in outputs
            if space.degree(out) not in blind.get(key, ())]
    rows = [row for row in rows if any(row)]
    rank = rref_solve(rows, "rank", None, max_cells) if rows else 0
    return {
        "identity": f"z{n}_rank",
        "label": "EVIDENCE",
        "rank": rank,
        "domain_dimension": len(columns),
        "full_rank": rank == len(columns),
        "degree_bound": degree_bound,
        "series_order": series_order,
        "slice_degree": zn_slice_degree(n, degree_bound, series_order),
        "maxdeg": space.maxdeg,
        "cells_above_maxdeg": above,
        "undetermined_rows": undetermined,
    }


def zn_row_reach(n: int, degree_bound: int, series_order: int) -> int:
    """
    Top output exponent of the Z_n rows
    Z_1 is triangular in x^i; for Z_2 the columns u (x) v and v (x) u separate only past series_order
    """
    if n == 1:
        return series_order
    return series_order + degree_bound


def zn_slice_degree(n: int, degree_bound: int, series_order: int) -> int:
    """Top degree a coefficient of the Z_n slice can reach"""
    return n * (degree_bound + zn_row_reach(n, degree_bound, series_order))


# ============================================
# MODULES AT INFINITY / МОДУЛИ В БЕСКОНЕЧНОСТИ
# ============================================


def check_module_at_infinity(structure: VertexStructure, u, v, window: CheckWindow, k: Optional[int] = None,
                             max_order: Optional[int] = None) -> VerifierReport:
    """
    (x1 - x2)^k Y_W(u,x1) Y_W(v,x2) in Hom(W, W((x1^{-1}, x2^{-1}))) and
    x0^k Y_W(Y(u,x0)v, x2) = ((x1 - x2)^k Y_W(u,x1) Y_W(v,x2))|_{x1 = x2 + x0}
    """
    a, b = structure.field_of(u), structure.field_of(v)
    if check_orientation(a, b) != LAURENT_UP:
        raise OrientationError("modules at infinity carry laurent_up fields")
    module = structure.module
    identity = f"module_at_infinity[{structure.render(u)},{structure.render(v)}]"

    def run(order: int) -> VerifierReport:
        compatibility = check_compatibility([a, b], power_polynomial(order), window)
        if compatibility.verdict == FAIL:
            compatibility.identity = identity
            compatibility.witness = dict(compatibility.witness, k=order, part="truncation")
            return compatibility
        terms = _polynomial_terms(power_polynomial(order))
        tally = _Tally(window, module.render)
        for label in _labels(module, window):
            d = module.degree(label)
            sub = _Substitution(a, b, terms, label)
            for t in range(0, module.maxdeg + 1):
                for e in window.mode_range(module):
                    final = d + order - (e + t) - a.wt - b.wt
                    if not window.strict and not 0 <= final <= module.maxdeg:
                        continue

                    def compute():
                        inner = structure.product(u, order - t - 1, v)
                        lhs = structure.field_of(inner).mode(-e - 1, ModuleVector.basis(label))
                        return lhs, sub.substituted(t, e)

                    tally.compare(compute, {"vector": module.render(label), "t": t, "e": e, "k": order})
                    if tally.failed:
                        return tally.report(identity, window)
        return tally.report(identity, window)

    orders, searched = _orders(k, max_order)
    return _search(orders, run, searched)


# ============================================
# SHIFT CONDITION AND HEXAGON / СДВИГ И ШЕСТИУГОЛЬНИК
# ============================================


Braiding = Dict[Tuple[object, object], SLocalityDatum]


def _braiding(braiding: Braiding, pair: Tuple[object, object]) -> SLocalityDatum:
    datum = braiding.get(pair)
    if datum is None:
        raise EvidenceError(f"missing braiding data for the pair {pair}")
    return datum


def check_shift_hexagon(structure: VertexStructure, braiding: Braiding, window: CheckWindow,
                        indices: Tuple[int, int] = (-1, 0), max_order: Optional[int] = None) -> List[VerifierReport]:
    """
    Shift: S(x)(Dv (x) u) = sum Dv_i (x) u_i f_i + v_i (x) u_i f_i'
    Hexagon: S(z)(u_n v (x) w) = sum (u^(i)_{n+t} v^(j)) (x) w^(ij) (d^t g_i / t!) h_j
    Проверка предсказанных данных S-локальности на срезе образующих
    """
    reports = []
    vacuum = ModuleVector.basis(structure.vacuum)
    for (u, v), datum in sorted(braiding.items(), key=repr):
        dv = structure.product(v, -2, vacuum)
        triples = []
        for v_i, u_i, f in datum.triples:
            dv_i = structure.product(v_i, -2, vacuum)
            if dv_i:
                triples.append((dv_i, u_i, f))
            derivative = f.taylor(1)
            if not derivative.is_zero:
                triples.append((v_i, u_i, derivative))
        predicted = SLocalityDatum(triples)
        a, b = structure.field_of(u), structure.field_of(dv)
        report = check_s_locality(a, b, predicted.resolve(structure), window, max_order)
        report.identity = f"shift[{structure.render(u)},{structure.render(v)}]"
        report.evidence = True
        reports.append(report)

    generators = sorted({x for pair in braiding for x in pair}, key=repr)
    for u in generators:
        for v in generators:
            for w in generators:
                if (w, u) not in braiding:
                    continue
                for n in range(indices[0], indices[1] + 1):
                    reports.append(_hexagon(structure, braiding, u, v, w, n, window, max_order))
    return reports


def _hexagon(structure: VertexStructure, braiding: Braiding, u, v, w, n: int, window: CheckWindow,
             max_order: Optional[int]) -> VerifierReport:
    algebra = structure.algebra
    triples = []
    for u_i, w_i, g in _braiding(braiding, (w, u)).triples:
        u_field = algebra.field_of(u_i)
        for v_j, w_ij, h in _braiding(braiding, (w_i, v)).triples:
            v_vector = algebra.vector(v_j)
            top = algebra.space.vector_degree(v_vector) + u_field.wt
            for t in range(0, max(top - n, 0)):
                product = u_field.mode(n + t, v_vector)
                if product:
                    triples.append((product, w_ij, g.taylor(t) * h))
    target = structure.product(u, n, v)
    identity = f"hexagon[{structure.render(w)};{structure.render(u)}_{n}{structure.render(v)}]"
    if not target:
        return VerifierReport(identity, PASS, window.as_dict(), window.degree_bound, evidence=True)
    a, b = structure.field_of(w), structure.field_of(target)
    report = check_s_locality(a, b, SLocalityDatum(triples).resolve(structure), window, max_order)
    report.identity = identity
    report.evidence = True
    return report
