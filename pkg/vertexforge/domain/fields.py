"""
Domain Layer - Fields on truncated modules
Поля E(W) и E°(W), Y_E-произведения и вершинные структуры

A field a(x) = sum_n a(n) x^{-n-1} is realized by the action of its
modes on the basis labels of a truncated module W. laurent_down fields
(E(W)) kill a vector of degree d for n >= d + wt, laurent_up fields
(E°(W)) kill it for n <= wt - d - 2.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple, Union

from vertexforge.domain.exceptions import EvidenceError, OrientationError, SeriesError, TruncationError
from vertexforge.domain.linmod import GradedModule, ModuleVector, linear_combination
from vertexforge.domain.presentations import VACUUM, ModeModule, Word
from vertexforge.domain.ratfun import LazySeries, RationalFunction, iota_expand
from vertexforge.domain.series import INFINITY, ZERO, ExpansionDomain, Window, binomial

logger = logging.getLogger("vertexforge.fields")

LAURENT_DOWN = "laurent_down"
LAURENT_UP = "laurent_up"
ORIENTATIONS = (LAURENT_DOWN, LAURENT_UP)

Label = Hashable
Action = Callable[[int, Label], ModuleVector]


# ============================================
# FIELD OPERATORS / ПОЛЯ
# ============================================


class FieldOperator:
    """
    Field on a truncated module, given by a lazy mode action on basis labels
    Действие мод кэшируется; выход за maxdeg -> TruncationError
    """

    def __init__(
        self,
        name: str,
        module: GradedModule,
        action: Action,
        orientation: str = LAURENT_DOWN,
        wt: int = 1,
        support: Optional[Callable[[int], bool]] = None,
    ):
        self.name = name
        self.module = module
        self.orientation = orientation
        self.wt = wt
        self.support = support
        self._action = action
        self._cache: Dict[Tuple[int, Label], ModuleVector] = {}
        self._validate()

    def _validate(self):
        if self.orientation not in ORIENTATIONS:
            raise OrientationError(f"unknown field orientation {self.orientation!r}")

    @property
    def is_down(self) -> bool:
        return self.orientation == LAURENT_DOWN

    def shift(self, n: int) -> int:
        """Degree change of the mode n"""
        return self.wt - n - 1 if self.is_down else n + 1 - self.wt

    def vanishes(self, n: int, d: int) -> bool:
        if self.support is not None and not self.support(n):
            return True
        return d + self.shift(n) < 0

    def nonvanishing_modes(self, d: int) -> range:
        """Modes that may act nontrivially on degree d and stay inside the truncation"""
        if self.is_down:
            return range(d + self.wt - 1 - self.module.maxdeg, d + self.wt)
        return range(self.wt - d - 1, self.module.maxdeg + self.wt - d)

    def act(self, n: int, label: Label) -> ModuleVector:
        d = self.module.degree(label)
        if self.vanishes(n, d):
            return ModuleVector.zero()
        if d + self.shift(n) > self.module.maxdeg:
            raise TruncationError(f"{self.name}({n}) on degree {d} leaves degree <= {self.module.maxdeg}")
        key = (n, label)
        cached = self._cache.get(key)
        if cached is None:
            cached = self._action(n, label)
            self._cache[key] = cached
        return cached

    def mode(self, n: int, vector: ModuleVector) -> ModuleVector:
        return linear_combination((c, self.act(n, label)) for label, c in vector.items())

    def __repr__(self) -> str:
        return f"FieldOperator({self.name}, {self.orientation}, wt={self.wt})"


def check_orientation(*fields: FieldOperator) -> str:
    orientations = {f.orientation for f in fields}
    if len(orientations) > 1:
        raise OrientationError("fields of opposite orientation in one operation: "
                               + ", ".join(f.name for f in fields))
    modules = {id(f.module) for f in fields}
    if len(modules) > 1:
        raise OrientationError("fields act on different modules")
    return orientations.pop()


def identity_field(module: GradedModule, orientation: str = LAURENT_DOWN) -> FieldOperator:
    """1_W: the mode -1 is the identity, every other mode is zero"""
    return FieldOperator("1", module, lambda n, label: ModuleVector.basis(label),
                         orientation, wt=0, support=lambda n: n == -1)


def zero_field(module: GradedModule, orientation: str = LAURENT_DOWN) -> FieldOperator:
    return FieldOperator("0", module, lambda n, label: ModuleVector.zero(), orientation, wt=0,
                         support=lambda n: False)


def combine_fields(terms: Sequence[Tuple[Fraction, FieldOperator]], name: Optional[str] = None) -> FieldOperator:
    """sum c_i a_i(x) over fields on one module"""
    terms = [(Fraction(c), f) for c, f in terms if c]
    if not terms:
        raise SeriesError("empty field combination")
    orientation = check_orientation(*(f for _, f in terms))
    if len(terms) == 1 and terms[0][0] == 1:
        return terms[0][1]
    wts = [f.wt for _, f in terms]
    wt = max(wts) if orientation == LAURENT_DOWN else min(wts)

    def action(n: int, label: Label) -> ModuleVector:
        return linear_combination((c, f.act(n, label)) for c, f in terms)

    name = name or " + ".join(f"{c}*{f.name}" for c, f in terms)
    return FieldOperator(name, terms[0][1].module, action, orientation, wt)


def generator_field(module: ModeModule, generator: str) -> FieldOperator:
    """g(x) on the universal (co)vacuum module of a mode algebra"""
    if generator not in module.algebra.generators:
        raise SeriesError(f"{generator!r} is not a generator of {module.name}")
    if module.algebra.orientation == VACUUM:
        orientation, wt = LAURENT_DOWN, 1
    else:
        orientation, wt = LAURENT_UP, 0

    def action(n: int, label: Word) -> ModuleVector:
        return module.act((generator, n), ModuleVector.basis(label))

    return FieldOperator(generator, module, action, orientation, wt)


# ============================================
# S-LOCALITY DATA / ДАННЫЕ S-ЛОКАЛЬНОСТИ
# ============================================


Operand = Union[FieldOperator, ModuleVector, Label]


def as_series(value) -> LazySeries:
    """Coefficient function f(x), expanded at zero"""
    if isinstance(value, LazySeries):
        if value.point != ZERO:
            raise SeriesError("S-locality coefficients are expanded at zero")
        return value
    if not isinstance(value, RationalFunction):
        value = RationalFunction.constant(value)
    return LazySeries(value, "x", ZERO)


@dataclass
class SLocalityDatum:
    """
    sum_i b_i (x) a_i (x) f_i(x): a(x1)b(x2) ~ sum_i f_i(x2 - x1) b_i(x2) a_i(x1)
    b_i, a_i - поля или метки V; k - порядок (None: искать)
    """

    triples: List[Tuple[Operand, Operand, LazySeries]]
    k: Optional[int] = None

    def __post_init__(self):
        self.triples = [(b, a, as_series(f)) for b, a, f in self.triples]
        self._validate()

    def _validate(self):
        if self.k is not None and self.k < 0:
            raise EvidenceError("S-locality order must be nonnegative")

    def resolve(self, structure: "VertexStructure") -> "SLocalityDatum":
        """Replace V-labels and vectors by their fields"""
        return SLocalityDatum([(structure.field_of(b), structure.field_of(a), f) for b, a, f in self.triples],
                              self.k)

    def with_order(self, k: int) -> "SLocalityDatum":
        return SLocalityDatum(list(self.triples), k)


# ============================================
# PRODUCTS / ПРОИЗВЕДЕНИЯ Y_E
# ============================================


def power_polynomial(k: int) -> RationalFunction:
    """(x1 - x2)^k"""
    return (RationalFunction.variable("x1") - RationalFunction.variable("x2")) ** k


def _difference_power(terms: Dict[Tuple[int, int], Fraction]) -> Optional[int]:
    """K when the polynomial is exactly (x1 - x2)^K"""
    if not terms:
        return None
    total = {a + b for a, b in terms}
    if len(total) != 1:
        return None
    k = total.pop()
    expected = {(k - c, c): Fraction(binomial(k, c) * (-1) ** c) for c in range(k + 1)}
    return k if terms == expected else None


class _Substitution:
    """
    Q_{t,e}: coefficient of x0^t x^e in (p(x1,x2) a(x1) b(x2) w)|_{x1 = x + x0}
    Подстановка в разложении по неотрицательным степеням x0
    """

    def __init__(self, a: FieldOperator, b: FieldOperator, terms: Dict[Tuple[int, int], Fraction], label: Label):
        self.a = a
        self.b = b
        self.terms = terms
        self.label = label
        d = a.module.degree(label)
        if a.is_down:
            # x1-support of p a(x1) b(x2) w is bounded below by -(deg w + wt a)
            self.i_bound = -(d + a.wt)
            self.j_bound = -(d + b.wt)
        else:
            self.i_bound = max(alpha for alpha, _ in terms) + d - a.wt
            self.j_bound = max(beta for _, beta in terms) + d - b.wt
        self._p: Dict[Tuple[int, int], ModuleVector] = {}

    def coefficient(self, i: int, j: int) -> ModuleVector:
        """P_ij = sum p_ab a(a - i - 1) b(b - j - 1) w"""
        key = (i, j)
        cached = self._p.get(key)
        if cached is not None:
            return cached
        d = self.a.module.degree(self.label)
        pieces = []
        for (alpha, beta), c in self.terms.items():
            mode_b = beta - j - 1
            if self.b.vanishes(mode_b, d):
                continue
            inner = self.b.act(mode_b, self.label)
            if inner:
                pieces.append((c, self.a.mode(alpha - i - 1, inner)))
        result = linear_combination(pieces)
        self._p[key] = result
        return result

    def substituted(self, t: int, e: int) -> ModuleVector:
        """Q_{t,e} = sum_i binom(i, t) P_{i, e - i + t}"""
        if self.a.is_down:
            indices = range(self.i_bound, e + t - self.j_bound + 1)
        else:
            indices = range(e + t - self.j_bound, self.i_bound + 1)
        pieces = []
        for i in indices:
            factor = binomial(i, t)
            if factor:
                pieces.append((Fraction(factor), self.coefficient(i, e - i + t)))
        return linear_combination(pieces)

    @property
    def span(self) -> int:
        """i_bound + j_bound, the extreme e + t carrying a nonzero Q"""
        return self.i_bound + self.j_bound


def _polynomial_terms(evidence) -> Dict[Tuple[int, int], Fraction]:
    p = evidence if isinstance(evidence, RationalFunction) else RationalFunction.constant(evidence)
    if set(p.variables) - {"x1", "x2"}:
        raise EvidenceError(f"evidence polynomial {p} must use x1, x2")
    if p.is_zero:
        raise EvidenceError("evidence polynomial is zero")
    if not p.is_polynomial:
        raise EvidenceError(f"evidence {p} is not a polynomial")
    return {(a, b): c for (a, b), c in p.polynomial_terms(("x1", "x2")).items() if c}


class _QuasiKernel:
    """
    Coefficients g_{s,r} of iota(1/p(x0 + x, x)), x outermost
    Для E(W) разложение x@0, x0@0; для E°(W) - x@inf, x0@0
    """

    def __init__(self, p_terms: Dict[Tuple[int, int], Fraction], orientation: str):
        p = RationalFunction.from_terms(p_terms, ("x1", "x2"))
        x, x0 = RationalFunction.variable("x"), RationalFunction.variable("x0")
        shifted = p.substitute({"x1": x0 + x, "x2": x})
        self.inverse = RationalFunction.constant(1) / shifted
        self.valuation = min(e0 for e0, _ in shifted.polynomial_terms(("x0", "x")))
        self.degree = max(a + b for a, b in p_terms)
        point = ZERO if orientation == LAURENT_DOWN else INFINITY
        self.domain = ExpansionDomain([("x", point), ("x0", ZERO)])
        self._tables: Dict[Tuple[int, int, int, int], object] = {}

    def table(self, s_lo: int, s_hi: int, r_lo: int, r_hi: int):
        key = (s_lo, s_hi, r_lo, r_hi)
        if key not in self._tables:
            window = Window({"x": (r_lo, r_hi), "x0": (s_lo, s_hi)})
            self._tables[key] = iota_expand(self.inverse, self.domain, window)
        return self._tables[key]


def _polynomial_action(a: FieldOperator, b: FieldOperator, n: int, p_terms: Dict[Tuple[int, int], Fraction],
                       kernel: Optional[_QuasiKernel]) -> Action:
    power = _difference_power(p_terms)

    def action(mode: int, label: Label) -> ModuleVector:
        sub = _Substitution(a, b, p_terms, label)
        e0 = -mode - 1
        if power is not None:
            t = power - n - 1
            return sub.substituted(t, e0) if t >= 0 else ModuleVector.zero()
        s_lo, s_hi = -kernel.valuation, -n - 1
        if s_hi < s_lo:
            return ModuleVector.zero()
        reach = kernel.degree * (s_hi - s_lo + 1)
        if a.is_down:
            r_lo, r_hi = -reach, e0 - sub.span + (s_hi - s_lo)
        else:
            r_lo, r_hi = e0 - sub.span, reach
        if r_hi < r_lo:
            return ModuleVector.zero()
        table = kernel.table(s_lo, s_hi, r_lo, r_hi)
        pieces = []
        for s in range(s_lo, s_hi + 1):
            t = -n - 1 - s
            for r in range(r_lo, r_hi + 1):
                g = table.coefficient({"x0": s, "x": r})
                if g:
                    pieces.append((g, sub.substituted(t, e0 - r)))
        return linear_combination(pieces)

    return action


def _datum_action(a: FieldOperator, b: FieldOperator, n: int, datum: SLocalityDatum) -> Action:
    """
    (a_n b)(p) = sum_s (-1)^s binom(n,s) a(n-s) b(p+s)
                 - (-1)^n sum_i sum_{j,t} (-1)^t binom(j,t) g^i_j b_i(p+j-t) a_i(t),  g^i = y^n f_i
    """
    triples = datum.triples
    for b_i, a_i, _ in triples:
        if not isinstance(b_i, FieldOperator) or not isinstance(a_i, FieldOperator):
            raise EvidenceError("datum operands must be resolved to fields")
        check_orientation(a, b, b_i, a_i)
    sign_n = -1 if n % 2 else 1

    def action(mode: int, label: Label) -> ModuleVector:
        d = a.module.degree(label)
        pieces = []
        for s in range(0, d + b.wt - mode):
            if n >= 0 and s > n:
                break
            factor = binomial(n, s) * (-1 if s % 2 else 1)
            if not factor or b.vanishes(mode + s, d):
                continue
            inner = b.act(mode + s, label)
            if inner:
                pieces.append((Fraction(factor), a.mode(n - s, inner)))
        for b_i, a_i, f in triples:
            for t in range(0, d + a_i.wt):
                if a_i.vanishes(t, d):
                    continue
                inner = a_i.act(t, label)
                if not inner:
                    continue
                d_inner = d + a_i.shift(t)
                for j in range(f.lowest + n, d_inner + b_i.wt - mode + t):
                    factor = binomial(j, t)
                    if not factor:
                        continue
                    g = f.coefficient(j - n)
                    if not g:
                        continue
                    sign = -sign_n * (-1 if t % 2 else 1)
                    pieces.append((sign * factor * g, b_i.mode(mode + j - t, inner)))
        return linear_combination(pieces)

    return action


def yE_product(a: FieldOperator, b: FieldOperator, n: int,
               evidence: Union[RationalFunction, SLocalityDatum, int]) -> FieldOperator:
    """
    a(x)_n b(x), the x0^{-n-1} coefficient of Y_E(a(x), x0) b(x)
    Свидетельство: полином квазисовместимости p(x1, x2) или данные S-локальности
    """
    orientation = check_orientation(a, b)
    if isinstance(evidence, SLocalityDatum):
        if orientation != LAURENT_DOWN:
            raise OrientationError("S-locality products are taken in E(W)")
        action = _datum_action(a, b, n, evidence)
    else:
        terms = _polynomial_terms(evidence)
        kernel = None if _difference_power(terms) is not None else _QuasiKernel(terms, orientation)
        action = _polynomial_action(a, b, n, terms, kernel)
    return FieldOperator(f"{a.name}_{n}{b.name}", a.module, action, orientation, a.wt + b.wt - n - 1)


# ============================================
# VERTEX STRUCTURES / ВЕРШИННЫЕ СТРУКТУРЫ
# ============================================


class VertexStructure(ABC):
    """
    Map from V-labels to fields on W; the vacuum goes to 1_W
    space - пространство V, module - модуль W (возможно W = V)
    """

    def __init__(self, space: GradedModule, module: GradedModule, vacuum: Label, orientation: str,
                 algebra: Optional["VertexStructure"] = None):
        self.space = space
        self.module = module
        self.vacuum = vacuum
        self.orientation = orientation
        self._algebra = algebra
        self._fields: Dict[Label, FieldOperator] = {}
        self.identity = identity_field(module, orientation)

    @property
    def algebra(self) -> "VertexStructure":
        """The structure of V on itself"""
        if self._algebra is not None:
            return self._algebra
        if self.space is not self.module:
            raise EvidenceError("a module structure needs the vertex structure of its algebra")
        return self

    @abstractmethod
    def _build_field(self, label: Label) -> FieldOperator:
        pass

    def field(self, label: Label) -> FieldOperator:
        if label == self.vacuum:
            return self.identity
        cached = self._fields.get(label)
        if cached is None:
            cached = self._build_field(label)
            self._fields[label] = cached
        return cached

    def vector(self, operand) -> ModuleVector:
        if isinstance(operand, ModuleVector):
            return self.space.canonical(operand)
        return ModuleVector.basis(operand)

    def field_of(self, operand: Operand) -> FieldOperator:
        if isinstance(operand, FieldOperator):
            return operand
        if isinstance(operand, ModuleVector):
            vector = self.space.canonical(operand)
            if not vector:
                return zero_field(self.module, self.orientation)
            return combine_fields([(c, self.field(label)) for label, c in vector.items()],
                                  " + ".join(self.space.render(label) for label in vector.labels))
        return self.field(operand)

    def product(self, u: Operand, n: int, v: Operand) -> ModuleVector:
        """u_n v in V"""
        algebra = self.algebra
        return algebra.field_of(u).mode(n, algebra.vector(v))

    def render(self, operand) -> str:
        if isinstance(operand, FieldOperator):
            return operand.name
        if isinstance(operand, ModuleVector):
            return str(operand.to_json(self.space.render))
        return self.space.render(operand)


class TransportedStructure(VertexStructure):
    """
    Y_W(g(k)B) = Y_W(g)_k Y_W(B) for words of a universal vacuum module V
    Порядок совместимости: r(g, h(k)B) = r(g,h) + r(g,B) + r(h,B) - k - 1
    """

    def __init__(self, space: ModeModule, module: Optional[ModeModule] = None,
                 algebra: Optional[VertexStructure] = None):
        module = module or space
        orientation = LAURENT_DOWN if module.algebra.orientation == VACUUM else LAURENT_UP
        super().__init__(space, module, space.vacuum, orientation, algebra)
        self._generators = {g: generator_field(module, g) for g in module.algebra.generators}
        self._orders: Dict[Tuple[str, Word], int] = {}

    def pair_order(self, a: str, b: str) -> int:
        order = self.module.algebra.order(a, b)
        if order is None:
            raise EvidenceError(f"no compatibility order for ({a}, {b}) on {self.module.name}")
        return order

    def word_order(self, generator: str, word: Word) -> int:
        key = (generator, word)
        if key not in self._orders:
            if not word:
                value = 0
            else:
                (h, k), rest = word[0], word[1:]
                value = (self.pair_order(generator, h) + self.word_order(generator, rest)
                         + self.word_order(h, rest) - k - 1)
            self._orders[key] = max(value, 0)
        return self._orders[key]

    def generator(self, name: str) -> FieldOperator:
        return self._generators[name]

    def _build_field(self, label: Word) -> FieldOperator:
        (g, k), rest = label[0], label[1:]
        right = self.field(rest)
        order = self.word_order(g, rest)
        product = yE_product(self._generators[g], right, k, power_polynomial(order))
        product.name = self.space.render(label)
        logger.debug("field %s via order %d", product.name, order)
        return product
