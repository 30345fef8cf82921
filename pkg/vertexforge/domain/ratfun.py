"""
Domain Layer - Rational functions and iota embeddings
Рациональные функции и их разложения в итерированные кольца Лорана

A rational function is expanded by the unique field embedding that keeps
every polynomial fixed; the defining check is q * iota(1/q) = 1.
"""

from __future__ import annotations

import logging
import math
import re
from tokenize import TokenError
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import sympy
from sympy import QQ, Poly
from sympy.core.sympify import SympifyError
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from vertexforge.domain.exceptions import ExpansionError, ExpressionError, TruncationError
from vertexforge.domain.scalar import from_sympy
from vertexforge.domain.series import (
    INFINITY,
    VARIABLES,
    ZERO,
    ExpansionDomain,
    Window,
    WindowSeries,
    binomial,
    check_variable,
    sort_variables,
)

logger = logging.getLogger("vertexforge.ratfun")

SYMBOLS: Dict[str, sympy.Symbol] = {name: sympy.Symbol(name) for name in VARIABLES}
_TRANSFORMATIONS = standard_transformations + (convert_xor,)
_ALLOWED_TEXT = re.compile(r"^[0-9A-Za-z_+\-*/^().\s]*$")
_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")

UPoly = Dict[int, Fraction]


# ============================================
# UNIVARIATE HELPERS / ОДНОМЕРНЫЕ МНОГОЧЛЕНЫ
# ============================================


def _upoly_mul(a: UPoly, b: UPoly) -> UPoly:
    result: UPoly = {}
    for i, x in a.items():
        for j, y in b.items():
            result[i + j] = result.get(i + j, Fraction(0)) + x * y
    return {k: v for k, v in result.items() if v}


def _upoly_add(a: UPoly, b: UPoly, sign: int = 1) -> UPoly:
    result = dict(a)
    for k, v in b.items():
        result[k] = result.get(k, Fraction(0)) + sign * v
    return {k: v for k, v in result.items() if v}


def laurent_at_zero(num: UPoly, den: UPoly, lo: int, hi: int) -> Tuple[UPoly, bool, bool]:
    """
    Expansion of num/den in C((v)) on exponents [lo, hi]
    Returns (coefficients, closed below, closed above)
    """
    if not den:
        raise ExpansionError("zero denominator")
    if not num:
        return {}, True, True
    m = min(den)
    alpha = den[m]
    shifted = {i - m: c for i, c in den.items()}
    lowest = min(num) - m
    depth = max(hi - lowest, 0)
    inverse: List[Fraction] = [1 / alpha]
    for j in range(1, depth + 1):
        acc = Fraction(0)
        for i, d in shifted.items():
            if 1 <= i <= j:
                acc += d * inverse[j - i]
        inverse.append(-acc / alpha)
    coefficients: UPoly = {}
    for e in range(max(lo, lowest), hi + 1):
        acc = Fraction(0)
        for k, n in num.items():
            index = e - k + m
            if 0 <= index <= depth:
                acc += n * inverse[index]
        if acc:
            coefficients[e] = acc
    closed_above = len(den) == 1 and hi >= max(num) - m
    return coefficients, lo <= lowest, closed_above


def laurent_at_infinity(num: UPoly, den: UPoly, lo: int, hi: int) -> Tuple[UPoly, bool, bool]:
    """Expansion of num/den in C((v^{-1})) via v = 1/t"""
    if not num:
        return {}, True, True
    deg_n, deg_d = max(num), max(den)
    rev_n = {deg_n - k: c for k, c in num.items()}
    rev_d = {deg_d - k: c for k, c in den.items()}
    shift = deg_d - deg_n
    t_coefficients, t_below, t_above = laurent_at_zero(rev_n, rev_d, -hi - shift, -lo - shift)
    coefficients = {-(tau + shift): c for tau, c in t_coefficients.items()}
    return coefficients, t_above, t_below


# ============================================
# RATIONAL FUNCTION
# ============================================


class RationalFunction:
    """
    Quotient of polynomials with rational coefficients in <= 2 variables
    Числитель и знаменатель сокращены, знаменатель нормирован (старший коэффициент 1)
    """

    def __init__(self, numerator, denominator=1):
        numerator = sympy.sympify(numerator)
        denominator = sympy.sympify(denominator)
        if denominator == 0:
            raise ExpressionError("denominator is zero")
        self.numerator, self.denominator = self._normalize(numerator, denominator)
        self._validate()

    def _validate(self):
        if len(self.variables) > 2:
            raise ExpressionError(f"at most two variables supported, got {', '.join(self.variables)}")

    @staticmethod
    def _normalize(numerator, denominator):
        expr = sympy.cancel(numerator / denominator)
        if expr.has(sympy.zoo, sympy.nan, sympy.oo, -sympy.oo):
            raise ExpressionError("expression is not a finite rational function")
        num, den = sympy.fraction(expr)
        num, den = sympy.expand(num), sympy.expand(den)
        if num == 0:
            return sympy.Integer(0), sympy.Integer(1)
        gens = [SYMBOLS[v] for v in VARIABLES if SYMBOLS[v] in den.free_symbols]
        lead = Poly(den, *gens, domain=QQ).LC() if gens else den
        return sympy.expand(num / lead), sympy.expand(den / lead)

    # ----- constructors -----

    @classmethod
    def parse(cls, text: str, constants: Optional[Mapping[str, Fraction]] = None) -> "RationalFunction":
        """
        ASCII expression with + - * / ^ and integer exponents
        Разбор выражения вида "(l + x1 - x2)/(l - x1 + x2)"
        """
        constants = dict(constants or {})
        if not isinstance(text, str) or not text.strip():
            raise ExpressionError("empty expression")
        if not _ALLOWED_TEXT.match(text) or "__" in text:
            raise ExpressionError(f"unexpected characters in {text!r}")
        for name in _IDENTIFIER.findall(text):
            if name not in SYMBOLS and name not in constants:
                raise ExpressionError(f"unknown identifier {name!r} in {text!r}")
        local = dict(SYMBOLS)
        for name, value in constants.items():
            value = Fraction(value)
            local[name] = sympy.Rational(value.numerator, value.denominator)
        try:
            expr = parse_expr(text, local_dict=local, transformations=_TRANSFORMATIONS)
        except (SyntaxError, TypeError, ValueError, ZeroDivisionError, SympifyError, TokenError) as exc:
            raise ExpressionError(f"cannot parse {text!r}: {exc}") from exc
        if expr.has(sympy.Float):
            raise ExpressionError(f"floating point literal in {text!r}")
        if expr.has(sympy.zoo, sympy.nan):
            raise ExpressionError(f"{text!r} is not a finite rational function")
        if not expr.is_rational_function(*SYMBOLS.values()):
            raise ExpressionError(f"{text!r} is not a rational function")
        return cls(expr)

    @classmethod
    def constant(cls, value) -> "RationalFunction":
        value = Fraction(value)
        return cls(sympy.Rational(value.numerator, value.denominator))

    @classmethod
    def variable(cls, name: str) -> "RationalFunction":
        return cls(SYMBOLS[check_variable(name)])

    @classmethod
    def from_terms(cls, terms: Mapping[Tuple[int, ...], Fraction], variables: Sequence[str]) -> "RationalFunction":
        """Polynomial (Laurent allowed) from an exponent table"""
        expr = sympy.Integer(0)
        for exps, c in terms.items():
            c = Fraction(c)
            term = sympy.Rational(c.numerator, c.denominator)
            for var, e in zip(variables, exps):
                term *= SYMBOLS[var] ** e
            expr += term
        return cls(expr)

    # ----- properties -----

    @property
    def variables(self) -> Tuple[str, ...]:
        free = self.numerator.free_symbols | self.denominator.free_symbols
        return sort_variables(str(s) for s in free)

    @property
    def is_zero(self) -> bool:
        return self.numerator == 0

    @property
    def is_polynomial(self) -> bool:
        return not self.denominator.free_symbols

    def polynomial_terms(self, variables: Sequence[str]) -> Dict[Tuple[int, ...], Fraction]:
        if not self.is_polynomial:
            raise ExpressionError(f"{self} is not a polynomial")
        return _terms(self.numerator / self.denominator, variables)

    def degree(self, var: str) -> int:
        symbol = SYMBOLS[check_variable(var)]
        if symbol not in self.numerator.free_symbols:
            return 0
        return int(Poly(self.numerator, symbol).degree())

    # ----- arithmetic -----

    def __add__(self, other) -> "RationalFunction":
        other = _coerce(other)
        return RationalFunction(self.numerator * other.denominator + other.numerator * self.denominator,
                                self.denominator * other.denominator)

    __radd__ = __add__

    def __sub__(self, other) -> "RationalFunction":
        other = _coerce(other)
        return RationalFunction(self.numerator * other.denominator - other.numerator * self.denominator,
                                self.denominator * other.denominator)

    def __rsub__(self, other) -> "RationalFunction":
        return _coerce(other) - self

    def __mul__(self, other) -> "RationalFunction":
        other = _coerce(other)
        return RationalFunction(self.numerator * other.numerator, self.denominator * other.denominator)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = _coerce(other)
        if other.is_zero:
            raise ExpressionError("division by the zero rational function")
        return RationalFunction(self.numerator * other.denominator, self.denominator * other.numerator)

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.numerator, self.denominator)

    def __pow__(self, exponent: int) -> "RationalFunction":
        if exponent >= 0:
            return RationalFunction(self.numerator ** exponent, self.denominator ** exponent)
        return RationalFunction(self.denominator ** -exponent, self.numerator ** -exponent)

    def __eq__(self, other) -> bool:
        try:
            other = _coerce(other)
        except ExpressionError:
            return NotImplemented
        return sympy.expand(self.numerator * other.denominator - other.numerator * self.denominator) == 0

    def __hash__(self) -> int:
        return hash((self.numerator, self.denominator))

    def substitute(self, mapping: Mapping[str, Union["RationalFunction", str, int]]) -> "RationalFunction":
        """Exact substitution, e.g. {"x": x + z}"""
        replacements = {}
        for var, value in mapping.items():
            value = _coerce(value) if not isinstance(value, str) else RationalFunction(SYMBOLS[check_variable(value)])
            replacements[SYMBOLS[check_variable(var)]] = value.numerator / value.denominator
        numerator = self.numerator.subs(replacements, simultaneous=True)
        denominator = self.denominator.subs(replacements, simultaneous=True)
        if sympy.expand(denominator) == 0:
            raise ExpressionError(f"substitution makes the denominator of {self} vanish")
        return RationalFunction(numerator, denominator)

    def derivative(self, var: str) -> "RationalFunction":
        symbol = SYMBOLS[check_variable(var)]
        return RationalFunction(sympy.diff(self.numerator / self.denominator, symbol))

    def __str__(self) -> str:
        if self.denominator == 1:
            return str(self.numerator)
        return f"({self.numerator})/({self.denominator})"

    def __repr__(self) -> str:
        return f"RationalFunction({self})"


def _coerce(value) -> RationalFunction:
    if isinstance(value, RationalFunction):
        return value
    if isinstance(value, (int, Fraction)):
        return RationalFunction.constant(value)
    raise ExpressionError(f"cannot use {value!r} as a rational function")


def _terms(expr, variables: Sequence[str]) -> Dict[Tuple[int, ...], Fraction]:
    expr = sympy.expand(expr)
    if expr == 0:
        return {}
    gens = [SYMBOLS[v] for v in variables]
    stray = expr.free_symbols - set(gens)
    if stray:
        raise ExpansionError(f"unexpected variables {sorted(map(str, stray))} for {list(variables)}")
    if not gens:
        return {(): from_sympy(sympy.Rational(expr))}
    poly = Poly(expr, *gens, domain=QQ)
    return {tuple(int(e) for e in exps): from_sympy(c) for exps, c in poly.as_dict(native=False).items()}


# ============================================
# IOTA EMBEDDINGS / ВЛОЖЕНИЯ IOTA
# ============================================


def _univariate(r: RationalFunction, var: str) -> Tuple[UPoly, UPoly]:
    num = {e[0]: c for e, c in _terms(r.numerator, [var]).items()}
    den = {e[0]: c for e, c in _terms(r.denominator, [var]).items()}
    return num, den


def _expand(num: UPoly, den: UPoly, point: str, lo: int, hi: int) -> Tuple[UPoly, bool, bool]:
    if point == ZERO:
        return laurent_at_zero(num, den, lo, hi)
    return laurent_at_infinity(num, den, lo, hi)


def _bounds(window: Window, var: str) -> Tuple[int, int]:
    if var not in window:
        raise ExpansionError(f"window lacks bounds for {var}")
    return window[var]


def iota_expand(r: RationalFunction, domain: ExpansionDomain, window: Window) -> WindowSeries:
    """
    Image of r under the polynomial-preserving embedding named by domain
    Поддерживаются [v@0], [v@inf], [o@0, i@0], [o@inf, i@0]
    """
    extra = set(r.variables) - set(domain.variables)
    if extra:
        raise ExpansionError(f"{r} has variables {sorted(extra)} outside the domain {domain}")
    if len(domain.pairs) == 1:
        (var, point), = domain.pairs
        lo, hi = _bounds(window, var)
        num, den = _univariate(r, var)
        coefficients, below, above = _expand(num, den, point, lo, hi)
        return WindowSeries(
            (var,),
            {(e,): c for e, c in coefficients.items()},
            Window({var: (lo, hi)}),
            domain,
            [var] if below else [],
            [var] if above else [],
        )
    if len(domain.pairs) == 2 and domain.pairs[1][1] == ZERO:
        return _iota_two(r, domain, window)
    raise ExpansionError(f"unsupported expansion domain {domain}")


def _iota_two(r: RationalFunction, domain: ExpansionDomain, window: Window) -> WindowSeries:
    (outer, point), (inner, _) = domain.pairs
    lo_o, hi_o = _bounds(window, outer)
    lo_i, hi_i = _bounds(window, inner)
    numerator = _terms(r.numerator, [inner, outer])
    denominator = _terms(r.denominator, [inner, outer])

    def split(terms) -> Dict[int, UPoly]:
        columns: Dict[int, UPoly] = {}
        for (ei, eo), c in terms.items():
            columns.setdefault(ei, {})[eo] = c
        return columns

    n_cols, d_cols = split(numerator), split(denominator)
    variables = sort_variables((outer, inner))
    box = Window({outer: (lo_o, hi_o), inner: (lo_i, hi_i)})
    if not n_cols:
        return WindowSeries(variables, {}, box, domain, variables, variables)

    k = min(d_cols)
    lead = d_cols[k]
    lowest = min(n_cols) - k
    top = hi_i + k - min(n_cols)
    # P_0 = 1, P_j = -sum_l D_{k+l} P_{j-l} D_k^{l-1}
    lead_powers: List[UPoly] = [{0: Fraction(1)}]
    pieces: List[UPoly] = [{0: Fraction(1)}]
    for j in range(1, max(top, 0) + 1):
        while len(lead_powers) <= j:
            lead_powers.append(_upoly_mul(lead_powers[-1], lead))
        acc: UPoly = {}
        for l in range(1, j + 1):
            column = d_cols.get(k + l)
            if column:
                acc = _upoly_add(acc, _upoly_mul(_upoly_mul(column, pieces[j - l]), lead_powers[l - 1]))
        pieces.append({e: -c for e, c in acc.items()})

    def lead_power(n: int) -> UPoly:
        while len(lead_powers) <= n:
            lead_powers.append(_upoly_mul(lead_powers[-1], lead))
        return lead_powers[n]

    coefficients = {}
    index = variables.index(outer)
    for e in range(max(lo_i, lowest), hi_i + 1):
        acc = {}
        for a, column in n_cols.items():
            j = e + k - a
            if 0 <= j < len(pieces):
                acc = _upoly_add(acc, _upoly_mul(_upoly_mul(column, pieces[j]), lead_power(a)))
        if not acc:
            continue
        inner_coefficients, _, _ = _expand(acc, lead_power(e + k + 1), point, lo_o, hi_o)
        for eo, c in inner_coefficients.items():
            exps = [0, 0]
            exps[index] = eo
            exps[1 - index] = e
            coefficients[tuple(exps)] = c
    lower = [inner] if lo_i <= lowest else []
    return WindowSeries(variables, coefficients, box, domain, lower)


def iota_pair_delta(r: RationalFunction, window: Window) -> WindowSeries:
    """
    iota_{x1,x2}(r) - iota_{x2,x1}(r) for r = s/(x1 - x2)^m
    Разность двух разложений, распределение типа дельта-функции
    """
    x1, x2 = SYMBOLS["x1"], SYMBOLS["x2"]
    extra = set(r.variables) - {"x1", "x2"}
    if extra:
        raise ExpansionError(f"{r} depends on {sorted(extra)}")
    den = r.denominator
    total = Poly(den, x1, x2, domain=QQ).total_degree() if den.free_symbols else 0
    if sympy.expand(den - (x1 - x2) ** total) != 0 and sympy.expand(den - (x2 - x1) ** total) != 0:
        raise ExpansionError(f"pole of {r} is not along x1 = x2")
    first = iota_expand(r, ExpansionDomain([("x1", ZERO), ("x2", ZERO)]), window)
    second = iota_expand(r, ExpansionDomain([("x2", ZERO), ("x1", ZERO)]), window)
    return first - second


# ============================================
# LAZY COEFFICIENT SERIES
# ============================================


class LazySeries:
    """
    Cached univariate coefficient provider
    Ленивый ряд: коэффициенты по запросу (разложение в 0 или в бесконечности)
    """

    def __init__(
        self,
        function: Optional[RationalFunction] = None,
        var: str = "x",
        point: str = ZERO,
        coefficients: Optional[Mapping[int, Fraction]] = None,
        order: Optional[int] = None,
    ):
        self.function = function
        self.var = check_variable(var)
        self.point = point
        self._cache: Dict[int, Fraction] = {}
        self._explicit = None
        if function is not None:
            if set(function.variables) - {var}:
                raise ExpansionError(f"{function} is not univariate in {var}")
            self._num, self._den = _univariate(function, var)
            if point == ZERO:
                self.lowest = (min(self._num) - min(self._den)) if self._num else 0
                self.highest = None
            else:
                self.highest = (max(self._num) - max(self._den)) if self._num else 0
                self.lowest = None
            self._computed = None
        else:
            self._explicit = {int(k): Fraction(v) for k, v in (coefficients or {}).items() if Fraction(v)}
            if point != ZERO:
                raise ExpansionError("explicit series are power series at zero")
            self.lowest = min(self._explicit, default=0)
            self.highest = None
            self.order = order if order is not None else max(self._explicit, default=0)

    @classmethod
    def from_coefficients(cls, coefficients: Sequence, order: Optional[int] = None, start: int = 0) -> "LazySeries":
        table = {start + i: Fraction(c) for i, c in enumerate(coefficients)}
        return cls(coefficients=table, order=order if order is not None else start + len(coefficients) - 1)

    @property
    def is_rational(self) -> bool:
        return self.function is not None

    @property
    def is_zero(self) -> bool:
        if self.function is not None:
            return self.function.is_zero
        return not self._explicit

    def coefficient(self, j: int) -> Fraction:
        if self._explicit is not None:
            if j < self.lowest:
                return Fraction(0)
            if j > self.order:
                raise TruncationError(f"series coefficient {j} beyond truncation order {self.order}")
            return self._explicit.get(j, Fraction(0))
        if self.point == ZERO and j < self.lowest:
            return Fraction(0)
        if self.point == INFINITY and j > self.highest:
            return Fraction(0)
        if j not in self._cache:
            self._fill(j)
        return self._cache.get(j, Fraction(0))

    def _fill(self, j: int):
        if self.point == ZERO:
            hi = max(j, self.lowest + 8, 2 * max(self._cache, default=0))
            coefficients, _, _ = laurent_at_zero(self._num, self._den, self.lowest, hi)
            for e in range(self.lowest, hi + 1):
                self._cache[e] = coefficients.get(e, Fraction(0))
        else:
            lo = min(j, self.highest - 8, 2 * min(self._cache, default=0))
            coefficients, _, _ = laurent_at_infinity(self._num, self._den, lo, self.highest)
            for e in range(lo, self.highest + 1):
                self._cache[e] = coefficients.get(e, Fraction(0))

    @property
    def truncation(self) -> Optional[int]:
        """Highest determined exponent, None when exact"""
        return None if self.function is not None else self.order

    def taylor(self, t: int) -> "LazySeries":
        """(1/t!) d^t f / dx^t"""
        if t == 0:
            return self
        if self.function is not None:
            derived = self.function
            for _ in range(t):
                derived = derived.derivative(self.var)
            return LazySeries(derived / math.factorial(t), self.var, self.point)
        table = {j - t: binomial(j, t) * c for j, c in self._explicit.items() if j >= t or j < 0}
        return LazySeries(coefficients=table, order=self.order - t)

    def reflected(self) -> "LazySeries":
        """f(-x)"""
        if self.function is not None:
            x = RationalFunction.variable(self.var)
            return LazySeries(self.function.substitute({self.var: -x}), self.var, self.point)
        table = {j: -c if j % 2 else c for j, c in self._explicit.items()}
        return LazySeries(coefficients=table, order=self.order)

    def __mul__(self, other: "LazySeries") -> "LazySeries":
        if self.function is not None and other.function is not None and self.point == other.point:
            return LazySeries(self.function * other.function, self.var, self.point)
        if self.point != ZERO or other.point != ZERO:
            raise ExpansionError("truncated series products are taken at zero")
        orders = [s.order + o.lowest for s, o in ((self, other), (other, self)) if s.truncation is not None]
        order = min(orders)
        table = {}
        for j in range(self.lowest + other.lowest, order + 1):
            total = sum((self.coefficient(i) * other.coefficient(j - i)
                         for i in range(self.lowest, j - other.lowest + 1)), Fraction(0))
            if total:
                table[j] = total
        return LazySeries(coefficients=table, order=order)

    def __repr__(self) -> str:
        if self.function is not None:
            return f"LazySeries({self.function} at {self.var}@{self.point})"
        return f"LazySeries(order={self.order})"


# ============================================
# QUANTUM YANG-BAXTER OPERATORS
# ============================================


@dataclass
class QYBReport:
    identity: str
    passed: bool
    witness: Optional[Dict[str, object]] = None


class QYBMatrix:
    """
    n^2 x n^2 matrix of rational functions in one variable
    Столбец - вход, базис e_i (x) e_j имеет индекс i*n + j
    """

    def __init__(self, n: int, entries: Sequence[Sequence[RationalFunction]], var: str = "x"):
        self.n = n
        self.var = check_variable(var)
        self.entries = [[_coerce(e) for e in row] for row in entries]
        self._validate()

    def _validate(self):
        size = self.n * self.n
        if self.n < 1 or len(self.entries) != size or any(len(row) != size for row in self.entries):
            raise ExpressionError(f"QYB matrix must be {size}x{size}")
        for row in self.entries:
            for entry in row:
                if set(entry.variables) - {self.var}:
                    raise ExpressionError(f"entry {entry} is not univariate in {self.var}")

    @classmethod
    def diagonal(cls, n: int, diagonal: Sequence[RationalFunction], var: str = "x") -> "QYBMatrix":
        size = n * n
        zero = RationalFunction.constant(0)
        rows = [[diagonal[i] if i == j else zero for j in range(size)] for i in range(size)]
        return cls(n, rows, var)

    @classmethod
    def identity(cls, n: int, var: str = "x") -> "QYBMatrix":
        return cls.diagonal(n, [RationalFunction.constant(1)] * (n * n), var)

    def at(self, value: RationalFunction) -> List[List[RationalFunction]]:
        return [[e.substitute({self.var: value}) if not e.is_zero else e for e in row] for row in self.entries]


def _sparse(rows: List[List[RationalFunction]]) -> Dict[int, Dict[int, RationalFunction]]:
    return {i: {j: e for j, e in enumerate(row) if not e.is_zero} for i, row in enumerate(rows)}


def _matmul(a: Dict[int, Dict[int, RationalFunction]], b: Dict[int, Dict[int, RationalFunction]]):
    result: Dict[int, Dict[int, RationalFunction]] = {}
    for i, row in a.items():
        out: Dict[int, RationalFunction] = {}
        for k, left in row.items():
            for j, right in b.get(k, {}).items():
                out[j] = out[j] + left * right if j in out else left * right
        result[i] = {j: e for j, e in out.items() if not e.is_zero}
    return result


def _first_difference(a, b, size: int) -> Optional[Dict[str, object]]:
    zero = RationalFunction.constant(0)
    for i in range(size):
        for j in range(size):
            left = a.get(i, {}).get(j, zero)
            right = b.get(i, {}).get(j, zero)
            if not (left == right):
                return {"row": i, "column": j, "left": str(left), "right": str(right)}
    return None


def qyb_check(matrix: QYBMatrix, mode: str = "both") -> List[QYBReport]:
    """
    Unitarity S(-x) S21(x) = 1 and the Yang-Baxter equation, exactly
    Проверка унитарности и уравнения Янга-Бакстера
    """
    if mode not in ("unitarity", "ybe", "both"):
        raise ExpressionError(f"unknown qyb_check mode {mode!r}")
    n, size = matrix.n, matrix.n * matrix.n
    x = RationalFunction.variable(matrix.var)
    reports = []

    if mode in ("unitarity", "both"):
        flip = [j * n + i for i in range(n) for j in range(n)]
        s = matrix.entries
        s21 = [[s[flip[r]][flip[c]] for c in range(size)] for r in range(size)]
        product = _matmul(_sparse(matrix.at(-x)), _sparse(s21))
        one = {i: {i: RationalFunction.constant(1)} for i in range(size)}
        witness = _first_difference(product, one, size)
        reports.append(QYBReport("unitarity", witness is None, witness))
        logger.debug("unitarity check: %s", "pass" if witness is None else witness)

    if mode in ("ybe", "both"):
        z = RationalFunction.variable("z" if matrix.var != "z" else "x0")
        s_x = matrix.entries
        s_z = matrix.at(z)
        s_xz = matrix.at(x + z)
        cube = n ** 3

        def build(entry) -> Dict[int, Dict[int, RationalFunction]]:
            table: Dict[int, Dict[int, RationalFunction]] = {}
            for row in range(cube):
                i, j, k = row // (n * n), (row // n) % n, row % n
                out = {}
                for col in range(cube):
                    a, b, c = col // (n * n), (col // n) % n, col % n
                    value = entry(i, j, k, a, b, c)
                    if value is not None and not value.is_zero:
                        out[col] = value
                table[row] = out
            return table

        s12 = build(lambda i, j, k, a, b, c: s_x[i * n + j][a * n + b] if k == c else None)
        s23 = build(lambda i, j, k, a, b, c: s_z[j * n + k][b * n + c] if i == a else None)
        s13 = build(lambda i, j, k, a, b, c: s_xz[i * n + k][a * n + c] if j == b else None)
        left = _matmul(_matmul(s12, s13), s23)
        right = _matmul(_matmul(s23, s13), s12)
        witness = _first_difference(left, right, cube)
        reports.append(QYBReport("ybe", witness is None, witness))
        logger.debug("Yang-Baxter check: %s", "pass" if witness is None else witness)
    return reports
