"""
Domain Layer - Zamolodchikov-Faddeev data and vacuum modules
Данные Замолодчикова-Фаддеева, правила для мод и вакуумный модуль V(H,S)

Relation for basis vectors h_a, h_b of H:

    h_a(x1) h_b(x2) = sum_{c,d} S_{(c,d),(b,a)}(x2 - x1) h_c(x2) h_d(x1)
                      + sum_j <h_a, h_b>_j (1/j!) d^j_{x2} x2^{-1} delta(x1/x2)

with S_{(c,d),(b,a)} stored at row c*n + d, column b*n + a.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from vertexforge.domain.exceptions import ExpressionError, SeriesError, TruncationError
from vertexforge.domain.presentations import (
    VACUUM,
    BraidedRule,
    DeltaTerm,
    ModeAlgebra,
    ModeModule,
    ModeRelation,
    derive_relations,
)
from vertexforge.domain.ratfun import LazySeries, QYBMatrix, RationalFunction
from vertexforge.domain.series import ZERO

logger = logging.getLogger("vertexforge.zf")

Entry = Union[RationalFunction, LazySeries]


# ============================================
# ZF DATA
# ============================================


@dataclass
class ZFData:
    """
    dim H, pairings and the braiding matrix S
    Элементы S - рациональные функции без полюса в 0 или усечённые ряды
    """

    names: Tuple[str, ...]
    pairing: List[List[Fraction]]
    S: List[List[Entry]]
    higher_pairings: Dict[int, List[List[Fraction]]] = field(default_factory=dict)
    order: Optional[int] = None

    def __post_init__(self):
        self._validate()

    def _validate(self):
        n = self.dim
        if n < 1 or len(set(self.names)) != n:
            raise SeriesError("ZF data needs distinct generator names")
        if len(self.pairing) != n or any(len(row) != n for row in self.pairing):
            raise SeriesError(f"pairing must be {n}x{n}")
        for j, matrix in self.higher_pairings.items():
            if j < 1 or len(matrix) != n or any(len(row) != n for row in matrix):
                raise SeriesError(f"higher pairing of order {j} must be {n}x{n}")
        size = n * n
        if len(self.S) != size or any(len(row) != size for row in self.S):
            raise SeriesError(f"S must be {size}x{size}")
        for row in self.S:
            for entry in row:
                if isinstance(entry, RationalFunction):
                    if set(entry.variables) - {"x"}:
                        raise ExpressionError(f"S entry {entry} is not univariate in x")
                    if not entry.is_zero and _has_pole_at_zero(entry):
                        raise ExpressionError(f"S entry {entry} has a pole at 0")
                elif isinstance(entry, LazySeries):
                    if entry.lowest < 0:
                        raise ExpressionError("S series entries must be power series")

    @property
    def dim(self) -> int:
        return len(self.names)

    def entry(self, row: int, column: int) -> Entry:
        return self.S[row][column]

    def series(self, row: int, column: int) -> Optional[LazySeries]:
        entry = self.S[row][column]
        if isinstance(entry, LazySeries):
            return None if entry.is_zero else entry
        if entry.is_zero:
            return None
        return LazySeries(entry, "x", ZERO)

    def truncation_order(self) -> Optional[int]:
        orders = [e.order for row in self.S for e in row if isinstance(e, LazySeries) and not e.is_rational]
        return min(orders) if orders else None


def _has_pole_at_zero(r: RationalFunction) -> bool:
    return r.denominator.subs({s: 0 for s in r.denominator.free_symbols}) == 0


def identity_matrix(n: int) -> List[List[RationalFunction]]:
    size = n * n
    one, zero = RationalFunction.constant(1), RationalFunction.constant(0)
    return [[one if i == j else zero for j in range(size)] for i in range(size)]


# ============================================
# MODE ALGEBRA OF ZF DATA
# ============================================


def zf_algebra(data: ZFData, name: str = "zf") -> ModeAlgebra:
    n = data.dim
    rules = {}
    orders = {}
    for a in range(n):
        for b in range(n):
            components = []
            column = b * n + a
            for c in range(n):
                for d in range(n):
                    series = data.series(c * n + d, column)
                    if series is not None:
                        components.append((data.names[c], data.names[d], series))
            deltas = []
            order = 0
            if data.pairing[a][b]:
                deltas.append(DeltaTerm(0, Fraction(data.pairing[a][b])))
                order = 1
            for j, matrix in sorted(data.higher_pairings.items()):
                if matrix[a][b]:
                    deltas.append(DeltaTerm(j, Fraction(matrix[a][b])))
                    order = max(order, j + 1)
            key = (data.names[a], data.names[b])
            rules[key] = BraidedRule(key[0], key[1], components, deltas)
            orders[key] = order
    for a, b in list(orders):
        orders[(a, b)] = orders[(b, a)] = max(orders[(a, b)], orders[(b, a)])
    return ModeAlgebra(name, tuple(data.names), VACUUM, rules, orders)


def zf_mode_relations(data: ZFData, mode_window: Tuple[int, int]) -> List[ModeRelation]:
    """
    Rewrite rules u(m) v(n) -> ordered terms + pairing terms for modes in the window
    Коэффициенты f_i(x2 - x1) берутся до порядка, равного ширине окна
    """
    lo, hi = mode_window
    span = hi - lo
    order = data.truncation_order()
    if order is not None and order < span:
        raise TruncationError(f"S truncation order {order} is below the mode window span {span}")
    return derive_relations(zf_algebra(data), lo, hi, span)


def build_vacuum_module(data: ZFData, maxdeg: int, max_cells: Optional[int] = None,
                        name: str = "V(H,S)") -> ModeModule:
    """Universal vacuum module V(H,S) truncated at maxdeg"""
    order = data.truncation_order()
    if order is not None and order < maxdeg:
        raise TruncationError(f"S truncation order {order} is below maxdeg {maxdeg}")
    module = ModeModule(zf_algebra(data, name), maxdeg, max_cells, name)
    logger.info("%s dimensions %s", name, module.dimensions())
    return module


# ============================================
# PRESETS / ПРЕДУСТАНОВКИ
# ============================================


@dataclass
class QSystemReport:
    unitarity: bool
    witness: Optional[Dict[str, object]] = None
    factorization: Optional[bool] = None


def _series_product_is_one(a: LazySeries, b_neg: LazySeries, order: int) -> Optional[int]:
    """First k <= order where a(x) b(-x) differs from 1, else None"""
    for k in range(order + 1):
        total = Fraction(0)
        for i in range(k + 1):
            total += a.coefficient(i) * b_neg.coefficient(k - i) * (-1) ** (k - i)
        if total != (1 if k == 0 else 0):
            return k
    return None


def check_q_unitarity(Q: Sequence[Sequence[Entry]], order: Optional[int] = None) -> QSystemReport:
    """q_ij(x) q_ji(-x) = 1, exactly for rational entries, to the truncation order for series"""
    n = len(Q)
    x = RationalFunction.variable("x")
    for i in range(n):
        for j in range(n):
            a, b = Q[i][j], Q[j][i]
            if isinstance(a, RationalFunction) and isinstance(b, RationalFunction):
                if not (a * b.substitute({"x": -x}) == RationalFunction.constant(1)):
                    return QSystemReport(False, {"i": i, "j": j})
                continue
            sa = a if isinstance(a, LazySeries) else LazySeries(a, "x", ZERO)
            sb = b if isinstance(b, LazySeries) else LazySeries(b, "x", ZERO)
            bound = order if order is not None else min(
                getattr(s, "order", 0) for s in (sa, sb) if not s.is_rational
            )
            k = _series_product_is_one(sa, sb, bound)
            if k is not None:
                return QSystemReport(False, {"i": i, "j": j, "order": k})
    return QSystemReport(True)


def _reflect(entry: Entry) -> Entry:
    if isinstance(entry, LazySeries):
        return entry.reflected()
    return entry.substitute({"x": -RationalFunction.variable("x")})


def _value_at_zero(entry: Entry) -> Fraction:
    series = entry if isinstance(entry, LazySeries) else LazySeries(entry, "x", ZERO)
    return series.coefficient(0)


def q_system_names(size: int) -> Tuple[str, ...]:
    if size == 1:
        return ("u", "v")
    return tuple(f"u{i + 1}" for i in range(size)) + tuple(f"v{i + 1}" for i in range(size))


def preset_q_system(
    Q: Sequence[Sequence[Entry]],
    names: Optional[Sequence[str]] = None,
    factorization: Optional[Sequence[Sequence[RationalFunction]]] = None,
    order: Optional[int] = None,
) -> Tuple[ZFData, QSystemReport]:
    """
    Generators u_1..u_l, v_1..v_l of an l x l unitary Q:

        u_i(x1) u_j(x2) = q_ij(x2 - x1) u_j(x2) u_i(x1), the same for v
        u_i(x1) v_j(x2) = q_ji(x1 - x2) v_j(x2) u_i(x1) + delta_ij x2^{-1} delta(x1/x2)

    The v u relation follows from unitarity, with <v_i, u_i> = -q_ii(0).
    Проверяется унитарность q_ij(x) q_ji(-x) = 1
    """
    size = len(Q)
    if size < 1 or any(len(row) != size for row in Q):
        raise SeriesError(f"Q must be a square matrix, got {size} rows")
    names = tuple(names) if names else q_system_names(size)
    if len(names) != 2 * size:
        raise SeriesError(f"a Q-system of size {size} has {2 * size} generators, got {len(names)} names")
    report = check_q_unitarity(Q, order)
    if not report.unitarity:
        raise ExpressionError(f"Q-system fails unitarity at {report.witness}")
    if factorization is not None:
        x = RationalFunction.variable("x")
        report.factorization = all(
            not _has_pole_at_zero(factorization[i][j])
            and factorization[i][j].substitute({"x": 0}) != RationalFunction.constant(0)
            and isinstance(Q[i][j], RationalFunction)
            and Q[i][j] == factorization[i][j] / factorization[j][i].substitute({"x": -x})
            for i in range(size) for j in range(size)
        )
    n = 2 * size
    zero = RationalFunction.constant(0)
    S: List[List[Entry]] = [[zero] * (n * n) for _ in range(n * n)]
    pairing = [[Fraction(0)] * n for _ in range(n)]
    for i in range(size):
        for j in range(size):
            same, mixed = Q[i][j], _reflect(Q[j][i])
            blocks = ((i, j, same), (size + i, size + j, same), (i, size + j, mixed), (size + i, j, mixed))
            for a, b, entry in blocks:
                S[b * n + a][b * n + a] = entry
        pairing[i][size + i] = Fraction(1)
        pairing[size + i][i] = -_value_at_zero(Q[i][i])
    data = ZFData(names, pairing, S, order=order)
    return data, report


def deformed_betagamma_functions(lam: Fraction) -> Tuple[RationalFunction, RationalFunction]:
    """(lam - x)/(lam + x) for uu and vv, its inverse for uv and vu"""
    lam = Fraction(lam)
    if lam == 0:
        raise ExpressionError("lambda must be nonzero")
    x = RationalFunction.variable("x")
    same = (RationalFunction.constant(lam) - x) / (RationalFunction.constant(lam) + x)
    return same, RationalFunction.constant(1) / same


def preset_deformed_betagamma(lam: Fraction) -> ZFData:
    """V[lambda]: the Q-system with l = 1 and q(x) = (lam - x)/(lam + x)"""
    same, _ = deformed_betagamma_functions(lam)
    data, _ = preset_q_system([[same]])
    return data


def preset_betagamma() -> ZFData:
    """Trivial braiding, <u,v> = 1, <v,u> = -1"""
    return ZFData(("u", "v"), [[Fraction(0), Fraction(1)], [Fraction(-1), Fraction(0)]], identity_matrix(2))


def preset_free_boson() -> ZFData:
    """[h(m), h(n)] = m delta_{m+n,0}"""
    return ZFData(("h",), [[Fraction(0)]], identity_matrix(1), {1: [[Fraction(1)]]})


def deformed_betagamma_matrix(lam: Fraction) -> QYBMatrix:
    same, mixed = deformed_betagamma_functions(lam)
    return QYBMatrix.diagonal(2, [same, mixed, mixed, same], "x")

