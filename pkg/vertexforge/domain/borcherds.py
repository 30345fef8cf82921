"""
Domain Layer - Vertex algebras of differential algebras
Конструкция V(A, d): Y(a, x)b = (e^{xd} a) b; полутоки на U(t^{-1}g[t^{-1}])

For an associative algebra A with unit and a derivation d, the modes are
a(-k-1)b = (d^k a / k!) b for k >= 0 and a(n)b = 0 for n >= 0.
"""

from __future__ import annotations

import logging
import math
from abc import abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from vertexforge.domain.exceptions import EvidenceError, SeriesError, TruncationError
from vertexforge.domain.fields import LAURENT_DOWN, FieldOperator, SLocalityDatum, VertexStructure
from vertexforge.domain.linmod import GradedModule, ModuleVector, linear_combination
from vertexforge.domain.ratfun import RationalFunction
from vertexforge.domain.verifiers import CheckWindow, VerifierReport, check_s_locality

logger = logging.getLogger("vertexforge.borcherds")

Label = Hashable


# ============================================
# DIFFERENTIAL ALGEBRAS / ДИФФЕРЕНЦИАЛЬНЫЕ АЛГЕБРЫ
# ============================================


class DiffAlgebra(GradedModule):
    """
    Truncated associative algebra with unit and derivation
    Произведение и d задаются на метках базиса; выход за maxdeg -> TruncationError
    """

    #: degree added by d; 1 for d/dt on t^{-1}-polynomials, -1 for d/dy on Q[y]
    derivation_degree: int = 1

    def __init__(self, name: str, maxdeg: int, unit: Label):
        self.name = name
        self.maxdeg = maxdeg
        self.unit = unit
        self._products: Dict[Tuple[Label, Label], ModuleVector] = {}
        self._derived: Dict[Label, ModuleVector] = {}

    @abstractmethod
    def _multiply_labels(self, a: Label, b: Label) -> ModuleVector:
        pass

    @abstractmethod
    def _derive_label(self, a: Label) -> ModuleVector:
        pass

    def canonical(self, vector: ModuleVector) -> ModuleVector:
        return vector

    def multiply_labels(self, a: Label, b: Label) -> ModuleVector:
        key = (a, b)
        if key not in self._products:
            if self.degree(a) + self.degree(b) > self.maxdeg:
                raise TruncationError(f"{self.render(a)}*{self.render(b)} leaves degree <= {self.maxdeg}")
            self._products[key] = self._multiply_labels(a, b)
        return self._products[key]

    def multiply(self, u: ModuleVector, v: ModuleVector) -> ModuleVector:
        return linear_combination(
            (cu * cv, self.multiply_labels(a, b)) for a, cu in u.items() for b, cv in v.items()
        )

    def derive(self, u: ModuleVector) -> ModuleVector:
        pieces = []
        for label, c in u.items():
            if label not in self._derived:
                if self.degree(label) + self.derivation_degree > self.maxdeg:
                    raise TruncationError(f"d({self.render(label)}) leaves degree <= {self.maxdeg}")
                self._derived[label] = self._derive_label(label)
            pieces.append((c, self._derived[label]))
        return linear_combination(pieces)

    def divided_power(self, u: ModuleVector, k: int) -> ModuleVector:
        """d^k u / k!"""
        for _ in range(k):
            u = self.derive(u)
        return u * Fraction(1, math.factorial(k))

    def check_axioms(self, degree_bound: int) -> Optional[Dict[str, object]]:
        """
        Unit, associativity and Leibniz rule on basis labels up to degree_bound
        Возвращает первый контрпример или None
        """
        if self.degree(self.unit) != 0:
            return {"axiom": "unit degree"}
        labels = self.basis_vectors(degree_bound)
        one = ModuleVector.basis(self.unit)
        if self.derive(one):
            return {"axiom": "d(1) = 0"}
        for a in labels:
            u = ModuleVector.basis(a)
            if self.multiply(one, u) != u or self.multiply(u, one) != u:
                return {"axiom": "unit", "a": self.render(a)}
            for b in labels:
                v = ModuleVector.basis(b)
                try:
                    uv = self.multiply(u, v)
                    leibniz = self.multiply(self.derive(u), v) + self.multiply(u, self.derive(v))
                    if self.derive(uv) != leibniz:
                        return {"axiom": "leibniz", "a": self.render(a), "b": self.render(b)}
                    for c in labels:
                        w = ModuleVector.basis(c)
                        if self.multiply(uv, w) != self.multiply(u, self.multiply(v, w)):
                            return {"axiom": "associativity", "a": self.render(a), "b": self.render(b),
                                    "c": self.render(c)}
                except TruncationError:
                    continue
        return None


def vad_vertex_map(algebra: DiffAlgebra, a: Label, b: Label, order: int) -> Dict[int, ModuleVector]:
    """Y(a, x)b = sum_{k <= order} x^k (d^k a / k!) b, as {k: coefficient}"""
    u, v = ModuleVector.basis(a), ModuleVector.basis(b)
    result = {}
    for k in range(order + 1):
        coefficient = algebra.multiply(algebra.divided_power(u, k), v)
        if coefficient:
            result[k] = coefficient
    return result


def check_vad_locality(algebra: DiffAlgebra, degree_bound: int, order: int) -> Dict[str, object]:
    """
    Y(a,x1)Y(b,x2)c = Y(b,x2)Y(a,x1)c for basis labels a, b, c up to degree_bound
    Для V(A,d) ассоциативность выполнена всегда, поэтому тождество Якоби равносильно этой локальности
    """
    labels = algebra.basis_vectors(degree_bound)
    checked = 0
    for a in labels:
        for b in labels:
            for i in range(order + 1):
                for j in range(order + 1):
                    try:
                        da = algebra.divided_power(ModuleVector.basis(a), i)
                        db = algebra.divided_power(ModuleVector.basis(b), j)
                        for c in labels:
                            w = ModuleVector.basis(c)
                            lhs = algebra.multiply(da, algebra.multiply(db, w))
                            rhs = algebra.multiply(db, algebra.multiply(da, w))
                            checked += 1
                            if lhs != rhs:
                                return {"identity": f"vad_locality[{algebra.name}]", "verdict": "fail",
                                        "checked": checked,
                                        "witness": {"a": algebra.render(a), "b": algebra.render(b),
                                                    "c": algebra.render(c), "x1": i, "x2": j}}
                    except TruncationError:
                        continue
    return {"identity": f"vad_locality[{algebra.name}]", "verdict": "pass", "checked": checked}


class PolynomialAlgebra(DiffAlgebra):
    """Q[y] with d = d/dy; labels are exponents"""

    derivation_degree = -1

    def __init__(self, maxdeg: int):
        super().__init__("Q[y]", maxdeg, 0)

    def degree(self, label: int) -> int:
        return label

    def labels(self, d: int) -> List[int]:
        return [d] if 0 <= d <= self.maxdeg else []

    def render(self, label: int) -> str:
        return {0: "1", 1: "y"}.get(label, f"y^{label}")

    def _multiply_labels(self, a: int, b: int) -> ModuleVector:
        return ModuleVector.basis(a + b)

    def _derive_label(self, a: int) -> ModuleVector:
        return ModuleVector({a - 1: a}) if a else ModuleVector.zero()

    def derive(self, u: ModuleVector) -> ModuleVector:
        return linear_combination((c, self._derive_label(label)) for label, c in u.items())


# ============================================
# LIE ALGEBRAS / АЛГЕБРЫ ЛИ
# ============================================


@dataclass
class LieAlgebra:
    """
    Finite-dimensional Lie algebra by structure constants
    brackets[(i, j)] = {k: c}: [b_i, b_j] = sum c b_k
    """

    names: Tuple[str, ...]
    brackets: Dict[Tuple[int, int], Dict[int, Fraction]] = field(default_factory=dict)

    def __post_init__(self):
        self.brackets = {key: {k: Fraction(c) for k, c in value.items() if c}
                         for key, value in self.brackets.items()}
        self._complete()
        self._validate()

    def _complete(self):
        for (i, j), value in list(self.brackets.items()):
            if (j, i) not in self.brackets:
                self.brackets[(j, i)] = {k: -c for k, c in value.items()}

    def _validate(self):
        n = self.dim
        if len(set(self.names)) != n:
            raise SeriesError("Lie algebra basis names must be distinct")
        for (i, j), value in self.brackets.items():
            if not (0 <= i < n and 0 <= j < n) or any(not 0 <= k < n for k in value):
                raise SeriesError(f"bracket index out of range in [{i}, {j}]")
        for i in range(n):
            for j in range(n):
                if self.bracket(i, j) != {k: -c for k, c in self.bracket(j, i).items()}:
                    raise SeriesError(f"bracket is not antisymmetric on ({self.names[i]}, {self.names[j]})")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if self.jacobiator(i, j, k):
                        raise SeriesError(
                            f"Jacobi identity fails on ({self.names[i]}, {self.names[j]}, {self.names[k]})")

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def bracket(self, i: int, j: int) -> Dict[int, Fraction]:
        return self.brackets.get((i, j), {})

    def _bracket_vector(self, u: Dict[int, Fraction], j: int) -> Dict[int, Fraction]:
        result: Dict[int, Fraction] = {}
        for i, c in u.items():
            for k, value in self.bracket(i, j).items():
                result[k] = result.get(k, Fraction(0)) + c * value
        return {k: c for k, c in result.items() if c}

    def jacobiator(self, i: int, j: int, k: int) -> Dict[int, Fraction]:
        """[[i, j], k] + [[j, k], i] + [[k, i], j]"""
        total: Dict[int, Fraction] = {}
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            for label, value in self._bracket_vector(self.bracket(a, b), c).items():
                total[label] = total.get(label, Fraction(0)) + value
        return {k: c for k, c in total.items() if c}

    def is_abelian(self) -> bool:
        return not any(self.brackets.values())


def sl2() -> LieAlgebra:
    """e, f, h with [e, f] = h, [h, e] = 2e, [h, f] = -2f"""
    return LieAlgebra(("e", "f", "h"), {(0, 1): {2: 1}, (2, 0): {0: 2}, (2, 1): {1: -2}})


def abelian(names: Sequence[str]) -> LieAlgebra:
    return LieAlgebra(tuple(names))


# ============================================
# HALF-CURRENTS / ПОЛУТОКИ
# ============================================

Letter = Tuple[int, int]
Monomial = Tuple[Letter, ...]


class HalfCurrentAlgebra(DiffAlgebra):
    """
    U(t^{-1}g[t^{-1}]) in the PBW basis; the letter (i, m) is b_i (x) t^{-m}, of degree m
    Мономы упорядочены по (индекс в g, глубина); d = d/dt
    """

    def __init__(self, lie: LieAlgebra, maxdeg: int):
        super().__init__("U(t^-1 g[t^-1])", maxdeg, ())
        self.lie = lie
        self._left: Dict[Tuple[Letter, Monomial], ModuleVector] = {}
        self._by_degree = self._enumerate()
        logger.info("%s: dimensions %s", self.name, self.dimensions())

    def _enumerate(self) -> Dict[int, List[Monomial]]:
        letters = sorted((i, m) for i in range(self.lie.dim) for m in range(1, self.maxdeg + 1))
        by_degree: Dict[int, List[Monomial]] = {0: [()]}
        partial: List[Monomial] = [()]
        while partial:
            grown = []
            for word in partial:
                start = word[-1] if word else None
                for letter in letters:
                    if start is not None and letter < start:
                        continue
                    candidate = word + (letter,)
                    d = self.degree(candidate)
                    if d <= self.maxdeg:
                        grown.append(candidate)
                        by_degree.setdefault(d, []).append(candidate)
            partial = grown
        return {d: sorted(words) for d, words in by_degree.items()}

    def degree(self, label: Monomial) -> int:
        return sum(m for _, m in label)

    def labels(self, d: int) -> List[Monomial]:
        return list(self._by_degree.get(d, []))

    def render(self, label: Monomial) -> str:
        if not label:
            return "1"
        return "".join(f"{self.lie.names[i]}[-{m}]" for i, m in label)

    def left_letter(self, letter: Letter, label: Monomial) -> ModuleVector:
        """letter * monomial, reordered to PBW form with the bracket"""
        key = (letter, label)
        cached = self._left.get(key)
        if cached is not None:
            return cached
        if self.degree(label) + letter[1] > self.maxdeg:
            raise TruncationError(f"{self.render((letter,))} on {self.render(label)} leaves degree <= {self.maxdeg}")
        if not label or letter <= label[0]:
            result = ModuleVector.basis((letter,) + label)
        else:
            first, rest = label[0], label[1:]
            moved = self.left_letter(letter, rest)
            pieces = [(c, self.left_letter(first, word)) for word, c in moved.items()]
            depth = letter[1] + first[1]
            for k, c in self.lie.bracket(letter[0], first[0]).items():
                pieces.append((c, self.left_letter((k, depth), rest)))
            result = linear_combination(pieces)
        self._left[key] = result
        return result

    def apply_letters(self, letters: Sequence[Letter], vector: ModuleVector) -> ModuleVector:
        for letter in reversed(letters):
            vector = linear_combination((c, self.left_letter(letter, word)) for word, c in vector.items())
        return vector

    def _multiply_labels(self, a: Monomial, b: Monomial) -> ModuleVector:
        return self.apply_letters(a, ModuleVector.basis(b))

    def _derive_label(self, a: Monomial) -> ModuleVector:
        """d(b_i (x) t^{-m}) = -m b_i (x) t^{-m-1}, extended by the Leibniz rule"""
        pieces = []
        for position, (i, m) in enumerate(a):
            letters = a[:position] + ((i, m + 1),) + a[position + 1:]
            pieces.append((Fraction(-m), self.apply_letters(letters, ModuleVector.basis(()))))
        return linear_combination(pieces)

    def element(self, name: str, depth: int = 1) -> Monomial:
        return ((self.lie.index(name), depth),)


# ============================================
# VERTEX STRUCTURE OF V(A, d)
# ============================================


class DerivationStructure(VertexStructure):
    """
    Y(c, x) b = (e^{xd} c) b on a differential algebra with deg d = 1
    Поле метки c: c(-k-1) b = (d^k c / k!) b, wt = deg c
    """

    def __init__(self, algebra: DiffAlgebra):
        if algebra.derivation_degree != 1:
            raise EvidenceError(f"{algebra.name}: fields need a derivation of degree 1")
        super().__init__(algebra, algebra, algebra.unit, LAURENT_DOWN)
        self.diff = algebra

    def _build_field(self, label: Label) -> FieldOperator:
        algebra = self.diff
        source = ModuleVector.basis(label)

        def action(n: int, b: Label) -> ModuleVector:
            return algebra.multiply(algebra.divided_power(source, -n - 1), ModuleVector.basis(b))

        return FieldOperator(algebra.render(label), algebra, action, LAURENT_DOWN, algebra.degree(label),
                             support=lambda n: n < 0)


def half_current_field(algebra: HalfCurrentAlgebra, name: str) -> FieldOperator:
    """a(x)^- = sum_{n >= 0} (-1)^n (a (x) t^{-n-1}) x^n by left multiplication"""
    index = algebra.lie.index(name)

    def action(mode: int, label: Monomial) -> ModuleVector:
        depth = -mode
        sign = -1 if (depth - 1) % 2 else 1
        return algebra.left_letter((index, depth), label) * sign

    return FieldOperator(f"{name}^-", algebra, action, LAURENT_DOWN, 1, support=lambda n: n < 0)


def preset_half_currents(lie: LieAlgebra, maxdeg: int) -> Tuple[HalfCurrentAlgebra, Dict[str, FieldOperator]]:
    algebra = HalfCurrentAlgebra(lie, maxdeg)
    return algebra, {name: half_current_field(algebra, name) for name in lie.names}


def half_current_datum(algebra: HalfCurrentAlgebra, a: str, b: str,
                       bracket: Optional[ModuleVector] = None) -> SLocalityDatum:
    """
    a(x1)b(x2) = b(x2)a(x1) + (x2 - x1)^{-1} ([a,b](x1) - [a,b](x2)), k = 0
    Операнды - метки V = U(t^{-1}g[t^{-1}])
    """
    lie = algebra.lie
    if bracket is None:
        bracket = ModuleVector({((k, 1),): c for k, c in lie.bracket(lie.index(a), lie.index(b)).items()})
    triples = [(algebra.element(b), algebra.element(a), 1)]
    if bracket:
        inverse = RationalFunction.constant(1) / RationalFunction.variable("x")
        triples.append((algebra.unit, bracket, inverse))
        triples.append((bracket, algebra.unit, -inverse))
    return SLocalityDatum(triples, 0)


def check_half_current_relation(algebra: HalfCurrentAlgebra, a: str, b: str, window: CheckWindow,
                                bracket: Optional[ModuleVector] = None) -> VerifierReport:
    """
    a(x1)^- b(x2)^- - b(x2)^- a(x1)^- = iota_{x1}(x2 - x1)^{-1} ([a,b](x1)^- - [a,b](x2)^-)
    """
    structure = DerivationStructure(algebra)
    datum = half_current_datum(algebra, a, b, bracket).resolve(structure)
    report = check_s_locality(half_current_field(algebra, a), half_current_field(algebra, b), datum, window)
    report.identity = f"half_current[{a},{b}]"
    return report
