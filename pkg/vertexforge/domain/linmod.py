"""
Domain Layer - Linear algebra and graded modules
Точная линейная алгебра над Q и градуированные модули

Quotients are computed by exact row reduction. Columns are ordered so
that higher-degree labels are eliminated first; a relation with lower
degree tails is therefore a filtered relation, and the free labels of
each degree give the dimension of the associated graded piece.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from vertexforge.domain.exceptions import LinearSystemError, ResourceLimitError, SeriesError
from vertexforge.domain.scalar import format_scalar, from_sympy

logger = logging.getLogger("vertexforge.linmod")

Label = Hashable


# ============================================
# MODULE VECTOR
# ============================================


class ModuleVector:
    """
    Sparse linear combination of basis labels
    Вектор модуля: разреженная комбинация меток базиса
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Label, Fraction]] = None):
        self._terms: Dict[Label, Fraction] = {}
        for label, value in (terms or {}).items():
            value = Fraction(value)
            if value:
                self._terms[label] = value

    @classmethod
    def basis(cls, label: Label) -> "ModuleVector":
        return cls({label: Fraction(1)})

    @classmethod
    def zero(cls) -> "ModuleVector":
        return cls()

    @classmethod
    def _raw(cls, terms: Dict[Label, Fraction]) -> "ModuleVector":
        vector = cls.__new__(cls)
        vector._terms = terms
        return vector

    def items(self) -> Iterator[Tuple[Label, Fraction]]:
        return iter(self._terms.items())

    @property
    def labels(self) -> List[Label]:
        return list(self._terms)

    def coefficient(self, label: Label) -> Fraction:
        return self._terms.get(label, Fraction(0))

    def as_dict(self) -> Dict[Label, Fraction]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def _combine(self, other: "ModuleVector", sign: int) -> "ModuleVector":
        terms = dict(self._terms)
        for label, value in other._terms.items():
            total = terms.get(label, Fraction(0)) + sign * value
            if total:
                terms[label] = total
            else:
                terms.pop(label, None)
        return ModuleVector._raw(terms)

    def __add__(self, other) -> "ModuleVector":
        other = _as_vector(other)
        if other is None:
            return NotImplemented
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other) -> "ModuleVector":
        other = _as_vector(other)
        if other is None:
            return NotImplemented
        return self._combine(other, -1)

    def __rsub__(self, other) -> "ModuleVector":
        other = _as_vector(other)
        if other is None:
            return NotImplemented
        return other._combine(self, -1)

    def __mul__(self, factor) -> "ModuleVector":
        if isinstance(factor, ModuleVector) or isinstance(factor, bool):
            return NotImplemented
        try:
            factor = Fraction(factor)
        except TypeError:
            return NotImplemented
        if not factor:
            return ModuleVector()
        return ModuleVector._raw({label: factor * value for label, value in self._terms.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "ModuleVector":
        return self * -1

    def map_labels(self, fn: Callable[[Label], Label]) -> "ModuleVector":
        terms: Dict[Label, Fraction] = {}
        for label, value in self._terms.items():
            new = fn(label)
            terms[new] = terms.get(new, Fraction(0)) + value
        return ModuleVector(terms)

    def __eq__(self, other) -> bool:
        other = _as_vector(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def to_json(self, render: Callable[[Label], str] = str) -> List[list]:
        return sorted([render(label), format_scalar(value)] for label, value in self._terms.items())

    def __repr__(self) -> str:
        if not self._terms:
            return "ModuleVector(0)"
        body = " + ".join(f"{format_scalar(v)}*{k}" for k, v in self._terms.items())
        return f"ModuleVector({body})"


# A relation instance is a vector that vanishes in the quotient
RelationInstance = ModuleVector


def _as_vector(value) -> Optional[ModuleVector]:
    if isinstance(value, ModuleVector):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool) and value == 0:
        return ModuleVector()
    return None


def linear_combination(pairs: Iterable[Tuple[Fraction, ModuleVector]]) -> ModuleVector:
    terms: Dict[Label, Fraction] = {}
    for factor, vector in pairs:
        if not factor:
            continue
        for label, value in vector.items():
            terms[label] = terms.get(label, Fraction(0)) + factor * value
    return ModuleVector(terms)


# ============================================
# RREF OVER QQ / ПРИВЕДЕНИЕ К СТУПЕНЧАТОМУ ВИДУ
# ============================================


def _domain_matrix(rows: Sequence[Sequence[Fraction]], ncols: int) -> DomainMatrix:
    entries = {}
    for i, row in enumerate(rows):
        nonzero = {j: QQ(Fraction(v).numerator, Fraction(v).denominator) for j, v in enumerate(row) if v}
        if nonzero:
            entries[i] = nonzero
    return DomainMatrix(entries, (len(rows), ncols), QQ)


def rref(rows: Sequence[Sequence[Fraction]], ncols: Optional[int] = None,
         max_cells: Optional[int] = None) -> Tuple[List[List[Fraction]], Tuple[int, ...]]:
    """
    Reduced row echelon form with the pivots (first nonzero column, then smallest row)
    Возвращает ненулевые строки RREF и номера ведущих столбцов
    """
    ncols = ncols if ncols is not None else (len(rows[0]) if rows else 0)
    if any(len(row) != ncols for row in rows):
        raise SeriesError("ragged matrix")
    if max_cells is not None and len(rows) * ncols > max_cells:
        logger.warning("matrix %dx%d exceeds the cell guard %d", len(rows), ncols, max_cells)
        raise ResourceLimitError(f"matrix {len(rows)}x{ncols} exceeds max_cells={max_cells}")
    if not rows or ncols == 0:
        return [], ()
    reduced, pivots = _domain_matrix(rows, ncols).rref()
    table = [[Fraction(0)] * ncols for _ in range(len(pivots))]
    for (i, j), value in reduced.to_dok().items():
        if i < len(pivots):
            table[i][j] = from_sympy(value)
    return table, tuple(pivots)


def rref_solve(matrix: Sequence[Sequence], mode: str = "rank", rhs: Optional[Sequence] = None,
               max_cells: Optional[int] = None):
    """
    rank | kernel | solve over QQ
    Для solve возвращает одно решение (свободные переменные равны нулю)
    """
    rows = [[Fraction(v) for v in row] for row in matrix]
    ncols = len(rows[0]) if rows else 0
    if mode == "rank":
        _, pivots = rref(rows, ncols, max_cells)
        return len(pivots)
    if mode == "kernel":
        reduced, pivots = rref(rows, ncols, max_cells)
        kernel = []
        for free in (j for j in range(ncols) if j not in pivots):
            vector = [Fraction(0)] * ncols
            vector[free] = Fraction(1)
            for row, pivot in zip(reduced, pivots):
                vector[pivot] = -row[free]
            kernel.append(vector)
        return kernel
    if mode == "solve":
        if rhs is None or len(rhs) != len(rows):
            raise SeriesError("solve needs a right-hand side with one entry per row")
        augmented = [row + [Fraction(b)] for row, b in zip(rows, rhs)]
        reduced, pivots = rref(augmented, ncols + 1, max_cells)
        if ncols in pivots:
            raise LinearSystemError("inconsistent linear system")
        solution = [Fraction(0)] * ncols
        for row, pivot in zip(reduced, pivots):
            solution[pivot] = row[ncols]
        return solution
    raise SeriesError(f"unknown rref mode {mode!r}")


# ============================================
# INCREMENTAL ECHELON FORM
# ============================================


class EchelonForm:
    """
    Fully reduced sparse rows keyed by pivot label
    Инкрементальная ступенчатая форма: меньший ключ исключается первым
    """

    def __init__(self, key: Callable[[Label], tuple]):
        self.key = key
        self.rows: Dict[Label, Dict[Label, Fraction]] = {}

    @property
    def rank(self) -> int:
        return len(self.rows)

    def is_pivot(self, label: Label) -> bool:
        return label in self.rows

    def reduce(self, vector: Mapping[Label, Fraction]) -> Dict[Label, Fraction]:
        result = {k: Fraction(v) for k, v in vector.items() if v}
        for pivot in [label for label in result if label in self.rows]:
            factor = result.get(pivot)
            if not factor:
                continue
            for label, value in self.rows[pivot].items():
                total = result.get(label, Fraction(0)) - factor * value
                if total:
                    result[label] = total
                else:
                    result.pop(label, None)
        return result

    def add(self, vector: Mapping[Label, Fraction]) -> bool:
        reduced = self.reduce(vector)
        if not reduced:
            return False
        pivot = min(reduced, key=self.key)
        lead = reduced[pivot]
        row = {label: value / lead for label, value in reduced.items()}
        for other in self.rows.values():
            factor = other.get(pivot)
            if factor:
                for label, value in row.items():
                    total = other.get(label, Fraction(0)) - factor * value
                    if total:
                        other[label] = total
                    else:
                        other.pop(label, None)
        self.rows[pivot] = row
        return True


# ============================================
# GRADED BASIS AND QUOTIENTS
# ============================================


class GradedBasis:
    """
    Spanning labels per degree, graded-lex ordered
    Порядок: (степень, длина слова, последовательность мод)
    """

    def __init__(self, labels: Iterable[Label], degree: Callable[[Label], int],
                 sort_key: Optional[Callable[[Label], tuple]] = None):
        self.degree = degree
        self.sort_key = sort_key or (lambda label: (degree(label), repr(label)))
        self.by_degree: Dict[int, List[Label]] = {}
        for label in labels:
            self.by_degree.setdefault(degree(label), []).append(label)
        for d in self.by_degree:
            ordered = sorted(set(self.by_degree[d]), key=self.sort_key)
            self.by_degree[d] = ordered
        self._validate()

    def _validate(self):
        for d in self.by_degree:
            if d < 0:
                raise SeriesError(f"negative degree {d} in graded basis")

    def labels(self, d: int) -> List[Label]:
        return list(self.by_degree.get(d, []))

    def __iter__(self) -> Iterator[Label]:
        for d in sorted(self.by_degree):
            yield from self.by_degree[d]

    def __len__(self) -> int:
        return sum(len(v) for v in self.by_degree.values())

    def __contains__(self, label: Label) -> bool:
        return label in self.by_degree.get(self.degree(label), [])


class Quotient:
    """Quotient of a graded basis by an echelon form of relations"""

    def __init__(self, basis: GradedBasis, echelon: EchelonForm, maxdeg: int):
        self.basis = basis
        self.echelon = echelon
        self.maxdeg = maxdeg

    def canonical(self, vector: ModuleVector) -> ModuleVector:
        return ModuleVector._raw(self.echelon.reduce(vector.as_dict()))

    def labels(self, d: int) -> List[Label]:
        return [label for label in self.basis.labels(d) if not self.echelon.is_pivot(label)]

    def dimensions(self) -> List[List[int]]:
        return [[d, len(self.labels(d))] for d in range(self.maxdeg + 1)]


def default_elimination_key(basis: GradedBasis) -> Callable[[Label], tuple]:
    position = {label: i for i, label in enumerate(basis)}
    return lambda label: (-basis.degree(label), -position.get(label, -1))


def quotient_by_relations(basis: GradedBasis, relations: Iterable[RelationInstance], maxdeg: int,
                          elimination_key: Optional[Callable[[Label], tuple]] = None) -> Quotient:
    """
    Quotient by relation instances, degree by degree
    Отношения могут иметь младшие хвосты (фильтрованный случай)
    """
    echelon = EchelonForm(elimination_key or default_elimination_key(basis))
    count = 0
    for relation in relations:
        if any(basis.degree(label) > maxdeg for label in relation.labels):
            continue
        echelon.add(relation.as_dict())
        count += 1
    quotient = Quotient(basis, echelon, maxdeg)
    logger.info("quotient by %d relations, dimensions %s", count, quotient.dimensions())
    return quotient


# ============================================
# GRADED MODULE INTERFACE
# ============================================


class GradedModule(ABC):
    """
    Finite truncation of a graded module with an explicit basis
    Усечённый градуированный модуль с явным базисом
    """

    name: str = "module"
    maxdeg: int = 0

    @abstractmethod
    def degree(self, label: Label) -> int:
        pass

    @abstractmethod
    def labels(self, d: int) -> List[Label]:
        """Basis labels of the degree-d piece"""
        pass

    @abstractmethod
    def canonical(self, vector: ModuleVector) -> ModuleVector:
        """Express a vector in the basis"""
        pass

    def render(self, label: Label) -> str:
        return str(label)

    def basis_vectors(self, upto: Optional[int] = None) -> List[Label]:
        upto = self.maxdeg if upto is None else min(upto, self.maxdeg)
        return [label for d in range(upto + 1) for label in self.labels(d)]

    def dimensions(self) -> List[List[int]]:
        return [[d, len(self.labels(d))] for d in range(self.maxdeg + 1)]

    def vector_degree(self, vector: ModuleVector) -> int:
        return max((self.degree(label) for label in vector.labels), default=0)
