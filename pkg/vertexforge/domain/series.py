"""
Domain Layer - Window series
Усечённые формальные ряды с окном гарантированной точности

A WindowSeries is a sparse table of exact coefficients over a box of
exponents. Per variable the box may be closed below (every coefficient
under the box is zero) and closed above (every coefficient over the box
is zero); outside a closed side nothing is known. Arithmetic propagates
the box so that every coefficient inside it is exactly correct.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from vertexforge.domain.exceptions import SeriesError, TruncationError
from vertexforge.domain.scalar import format_scalar

# ============================================
# ROSTER / ПЕРЕМЕННЫЕ
# ============================================

VARIABLES: Tuple[str, ...] = ("x", "x0", "x1", "x2", "z")
ZERO = "zero"
INFINITY = "infinity"

Exponents = Tuple[int, ...]
INF = math.inf


def check_variable(name: str) -> str:
    if name not in VARIABLES:
        raise SeriesError(f"unknown variable {name!r}, expected one of {', '.join(VARIABLES)}")
    return name


def sort_variables(names: Iterable[str]) -> Tuple[str, ...]:
    unique = {check_variable(name) for name in names}
    return tuple(v for v in VARIABLES if v in unique)


def binomial(n: int, k: int) -> int:
    """Generalized binomial coefficient, n any integer, k >= 0"""
    if k < 0:
        return 0
    if n >= 0:
        return math.comb(n, k)
    return (-1) ** k * math.comb(k - n - 1, k)


def is_zero(value) -> bool:
    return not value


# ============================================
# WINDOW / ОКНО
# ============================================


class Window:
    """
    Per-variable closed exponent intervals [lo, hi]
    Окно показателей: для каждой переменной отрезок [lo, hi]
    """

    def __init__(self, bounds: Mapping[str, Tuple[int, int]]):
        self._bounds: Dict[str, Tuple[int, int]] = {}
        for var in sort_variables(bounds.keys()):
            lo, hi = bounds[var]
            self._bounds[var] = (int(lo), int(hi))
        self._validate()

    def _validate(self):
        for var, (lo, hi) in self._bounds.items():
            if lo > hi:
                raise SeriesError(f"empty window for {var}: [{lo}, {hi}]")

    @classmethod
    def cube(cls, variables: Sequence[str], lo: int, hi: int) -> "Window":
        return cls({var: (lo, hi) for var in variables})

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(self._bounds)

    def __getitem__(self, var: str) -> Tuple[int, int]:
        return self._bounds[var]

    def __contains__(self, var: str) -> bool:
        return var in self._bounds

    def get(self, var: str, default=None):
        return self._bounds.get(var, default)

    def points(self, variables: Optional[Sequence[str]] = None) -> Iterator[Exponents]:
        variables = self.variables if variables is None else tuple(variables)
        ranges = [range(self._bounds[v][0], self._bounds[v][1] + 1) for v in variables]
        return itertools.product(*ranges)

    def volume(self) -> int:
        return math.prod(hi - lo + 1 for lo, hi in self._bounds.values())

    def as_dict(self) -> Dict[str, List[int]]:
        return {var: [lo, hi] for var, (lo, hi) in self._bounds.items()}

    def __eq__(self, other) -> bool:
        return isinstance(other, Window) and self._bounds == other._bounds

    def __hash__(self) -> int:
        return hash(tuple(self._bounds.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}=[{lo},{hi}]" for v, (lo, hi) in self._bounds.items())
        return f"Window({inner})"


class ExpansionDomain:
    """
    Iterated Laurent ring tag, outermost variable first
    Например C((x1))((x2)) = [(x1, zero), (x2, zero)]
    """

    def __init__(self, pairs: Sequence[Tuple[str, str]]):
        self.pairs: Tuple[Tuple[str, str], ...] = tuple((check_variable(v), p) for v, p in pairs)
        self._validate()

    def _validate(self):
        names = [v for v, _ in self.pairs]
        if not names:
            raise SeriesError("expansion domain needs at least one variable")
        if len(set(names)) != len(names):
            raise SeriesError(f"repeated variable in expansion domain {names}")
        for _, point in self.pairs:
            if point not in (ZERO, INFINITY):
                raise SeriesError(f"expansion point must be zero or infinity, got {point!r}")

    @classmethod
    def parse(cls, text: str) -> "ExpansionDomain":
        """'x1@0,x2@0' or 'x@inf' (outermost first)"""
        pairs = []
        for chunk in text.split(","):
            var, _, point = chunk.strip().partition("@")
            point = point.strip().lower()
            if point in ("0", "zero"):
                pairs.append((var.strip(), ZERO))
            elif point in ("inf", "infinity", "oo"):
                pairs.append((var.strip(), INFINITY))
            else:
                raise SeriesError(f"cannot read expansion domain {text!r}")
        return cls(pairs)

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(v for v, _ in self.pairs)

    def point(self, var: str) -> Optional[str]:
        return dict(self.pairs).get(var)

    def __eq__(self, other) -> bool:
        return isinstance(other, ExpansionDomain) and self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash(self.pairs)

    def __str__(self) -> str:
        return ",".join(f"{v}@{'0' if p == ZERO else 'inf'}" for v, p in self.pairs)

    def __repr__(self) -> str:
        return f"ExpansionDomain({self})"


# ============================================
# WINDOW SERIES
# ============================================

Value = Union[Fraction, object]


class WindowSeries:
    """
    Exact coefficient table on a guarantee box
    Таблица точных коэффициентов в окне гарантии

    Values are Fractions, or module vectors for vector-valued tables.
    """

    def __init__(
        self,
        variables: Sequence[str],
        coefficients: Mapping[Exponents, Value],
        guarantee: Window,
        domain: Optional[ExpansionDomain] = None,
        lower_closed: Iterable[str] = (),
        upper_closed: Iterable[str] = (),
    ):
        self.variables = sort_variables(variables)
        if tuple(variables) != self.variables:
            order = [tuple(variables).index(v) for v in self.variables]
            coefficients = {tuple(e[i] for i in order): c for e, c in coefficients.items()}
        self.guarantee = guarantee
        self.domain = domain
        self.lower_closed = frozenset(lower_closed)
        self.upper_closed = frozenset(upper_closed)
        self._coefficients: Dict[Exponents, Value] = {}
        for exps, value in coefficients.items():
            if not is_zero(value):
                self._coefficients[tuple(int(e) for e in exps)] = value
        self._validate()

    def _validate(self):
        if set(self.guarantee.variables) != set(self.variables):
            raise SeriesError(
                f"guarantee window {self.guarantee} does not match variables {self.variables}"
            )
        for exps in self._coefficients:
            if len(exps) != len(self.variables):
                raise SeriesError(f"exponent vector {exps} has wrong length")
            for var, e in zip(self.variables, exps):
                lo, hi = self.guarantee[var]
                if not lo <= e <= hi:
                    raise SeriesError(f"stored exponent {exps} lies outside guarantee {self.guarantee}")
        for var in self.lower_closed | self.upper_closed:
            if var not in self.variables:
                raise SeriesError(f"closure flag on absent variable {var}")

    # ----- constructors -----

    @classmethod
    def constant(cls, value: Value) -> "WindowSeries":
        return cls((), {(): value}, Window({}))

    @classmethod
    def polynomial(
        cls,
        variables: Sequence[str],
        coefficients: Mapping[Exponents, Value],
        domain: Optional[ExpansionDomain] = None,
    ) -> "WindowSeries":
        """Finite support, known everywhere (closed on both sides)"""
        variables = tuple(variables)
        nonzero = {tuple(e): c for e, c in coefficients.items() if not is_zero(c)}
        bounds = {}
        for i, var in enumerate(variables):
            column = [e[i] for e in nonzero] or [0]
            bounds[var] = (min(column), max(column))
        return cls(variables, nonzero, Window(bounds), domain, variables, variables)

    @classmethod
    def monomial(cls, exponents: Mapping[str, int], value: Value = Fraction(1)) -> "WindowSeries":
        variables = sort_variables(exponents.keys())
        return cls.polynomial(variables, {tuple(exponents[v] for v in variables): value})

    # ----- access -----

    def items(self) -> Iterator[Tuple[Exponents, Value]]:
        return iter(sorted(self._coefficients.items()))

    def __len__(self) -> int:
        return len(self._coefficients)

    def is_finite(self, var: str) -> bool:
        return var not in self.variables or (var in self.lower_closed and var in self.upper_closed)

    def _determined(self, var: str, e: int) -> bool:
        lo, hi = self.guarantee[var]
        if e < lo:
            return var in self.lower_closed
        if e > hi:
            return var in self.upper_closed
        return True

    def coefficient(self, exponents: Union[Mapping[str, int], Sequence[int]]) -> Value:
        """Exact coefficient; TruncationError when it is not determined"""
        if isinstance(exponents, Mapping):
            for var, e in exponents.items():
                if var not in self.variables and e != 0:
                    return Fraction(0)
            exps = tuple(int(exponents.get(v, 0)) for v in self.variables)
        else:
            exps = tuple(int(e) for e in exponents)
        for var, e in zip(self.variables, exps):
            if not self._determined(var, e):
                raise TruncationError(f"coefficient {dict(zip(self.variables, exps))} outside {self.guarantee}")
        return self._coefficients.get(exps, Fraction(0))

    def _bounds(self, var: str) -> Tuple[float, float, bool, bool]:
        """lo, hi, closed below, closed above; absent variables are constants"""
        if var not in self.variables:
            return 0, 0, True, True
        lo, hi = self.guarantee[var]
        return lo, hi, var in self.lower_closed, var in self.upper_closed

    def _aligned(self, variables: Tuple[str, ...]) -> Iterator[Tuple[Exponents, Value]]:
        index = [self.variables.index(v) if v in self.variables else None for v in variables]
        for exps, value in self._coefficients.items():
            yield tuple(exps[i] if i is not None else 0 for i in index), value

    # ----- arithmetic -----

    def __add__(self, other: "WindowSeries") -> "WindowSeries":
        return series_arith(self, other, "add")

    def __sub__(self, other: "WindowSeries") -> "WindowSeries":
        return series_arith(self, other, "sub")

    def __mul__(self, other: "WindowSeries") -> "WindowSeries":
        return series_arith(self, other, "mul")

    def __neg__(self) -> "WindowSeries":
        return self.scale(Fraction(-1))

    def scale(self, factor) -> "WindowSeries":
        factor = Fraction(factor)
        return WindowSeries(
            self.variables,
            {e: factor * c for e, c in self._coefficients.items()},
            self.guarantee,
            self.domain,
            self.lower_closed,
            self.upper_closed,
        )

    def derivative(self, var: str) -> "WindowSeries":
        """d/dvar, the box moves down by one"""
        check_variable(var)
        if var not in self.variables:
            return WindowSeries(self.variables, {}, self.guarantee, self.domain,
                                self.variables, self.variables)
        i = self.variables.index(var)
        coefficients = {}
        for exps, value in self._coefficients.items():
            if exps[i] != 0:
                shifted = exps[:i] + (exps[i] - 1,) + exps[i + 1:]
                coefficients[shifted] = exps[i] * value
        bounds = {v: self.guarantee[v] for v in self.variables}
        lo, hi = bounds[var]
        bounds[var] = (lo - 1, hi - 1)
        return WindowSeries(self.variables, coefficients, Window(bounds), self.domain,
                            self.lower_closed, self.upper_closed)

    def restrict(self, window: Window) -> "WindowSeries":
        """Narrow the guarantee box; a narrowed side loses its closure flag"""
        bounds = {}
        lower, upper = set(self.lower_closed), set(self.upper_closed)
        for var in self.variables:
            lo, hi = self.guarantee[var]
            if var in window:
                new_lo, new_hi = window[var]
                if (new_lo < lo and var not in lower) or (new_hi > hi and var not in upper):
                    raise TruncationError(f"window {window} exceeds guarantee {self.guarantee}")
                if new_lo > lo:
                    lower.discard(var)
                if new_hi < hi:
                    upper.discard(var)
                lo, hi = new_lo, new_hi
            bounds[var] = (lo, hi)
        box = Window(bounds)
        coefficients = {
            e: c for e, c in self._coefficients.items()
            if all(box[v][0] <= x <= box[v][1] for v, x in zip(self.variables, e))
        }
        return WindowSeries(self.variables, coefficients, box, self.domain, lower, upper)

    def compare(self, other: "WindowSeries") -> Optional[Dict[str, int]]:
        """First exponent (sorted) where the tables differ on the common box, else None"""
        variables = sort_variables(set(self.variables) | set(other.variables))
        bounds = {}
        for var in variables:
            lo_a, hi_a, _, _ = self._bounds(var)
            lo_b, hi_b, _, _ = other._bounds(var)
            lo, hi = max(lo_a, lo_b), min(hi_a, hi_b)
            if lo > hi:
                return None
            bounds[var] = (int(lo), int(hi))
        box = Window(bounds)
        left = dict(self._aligned(variables))
        right = dict(other._aligned(variables))
        for exps in sorted(set(left) | set(right)):
            if not all(box[v][0] <= x <= box[v][1] for v, x in zip(variables, exps)):
                continue
            difference = left.get(exps, Fraction(0)) - right.get(exps, Fraction(0))
            if not is_zero(difference):
                return dict(zip(variables, exps))
        return None

    def to_json(self) -> List[list]:
        return [[list(e), format_scalar(c)] for e, c in self.items()]

    def __repr__(self) -> str:
        return (f"WindowSeries({self.variables}, terms={len(self)}, guarantee={self.guarantee}, "
                f"domain={self.domain})")


# ============================================
# OPERATIONS / ОПЕРАЦИИ
# ============================================


def _mul_bounds(a: WindowSeries, b: WindowSeries, var: str) -> Tuple[int, int, bool, bool]:
    lo_a, hi_a, lc_a, uc_a = a._bounds(var)
    lo_b, hi_b, lc_b, uc_b = b._bounds(var)
    reach_lo_a = lo_a if lc_a else -INF
    reach_hi_a = hi_a if uc_a else INF
    reach_lo_b = lo_b if lc_b else -INF
    reach_hi_b = hi_b if uc_b else INF

    if lc_a and lc_b:
        lo = lo_a + lo_b
    else:
        candidates = []
        if not lc_a:
            candidates.append(lo_a + reach_hi_b)
        if not lc_b:
            candidates.append(lo_b + reach_hi_a)
        lo = max(candidates)

    if uc_a and uc_b:
        hi = hi_a + hi_b
    else:
        candidates = []
        if not uc_a:
            candidates.append(hi_a + reach_lo_b)
        if not uc_b:
            candidates.append(hi_b + reach_lo_a)
        hi = min(candidates)

    if math.isinf(lo) or math.isinf(hi) or lo > hi:
        raise SeriesError(f"product has an empty guarantee window in {var}")
    return int(lo), int(hi), lc_a and lc_b, uc_a and uc_b


def _add_bounds(a: WindowSeries, b: WindowSeries, var: str) -> Tuple[int, int, bool, bool]:
    lo_a, hi_a, lc_a, uc_a = a._bounds(var)
    lo_b, hi_b, lc_b, uc_b = b._bounds(var)
    if lc_a and lc_b:
        lo = min(lo_a, lo_b)
    elif lc_a:
        lo = lo_b
    elif lc_b:
        lo = lo_a
    else:
        lo = max(lo_a, lo_b)
    if uc_a and uc_b:
        hi = max(hi_a, hi_b)
    elif uc_a:
        hi = hi_b
    elif uc_b:
        hi = hi_a
    else:
        hi = min(hi_a, hi_b)
    if lo > hi:
        raise SeriesError(f"sum has an empty guarantee window in {var}")
    return int(lo), int(hi), lc_a and lc_b, uc_a and uc_b


def _product_domain(a: WindowSeries, b: WindowSeries) -> Optional[ExpansionDomain]:
    if a.domain is not None and a.domain == b.domain:
        return a.domain
    shared = set(a.variables) & set(b.variables)
    for finite, other in ((a, b), (b, a)):
        if all(finite.is_finite(v) for v in shared) and all(finite.is_finite(v) for v in finite.variables):
            if other.domain is not None and set(finite.variables) <= set(other.domain.variables):
                return other.domain
            return None
    if a.domain is None and b.domain is None:
        for finite in (a, b):
            if all(finite.is_finite(v) for v in shared):
                return None
    raise SeriesError(f"incompatible expansion domains {a.domain} and {b.domain}")


def series_arith(a: WindowSeries, b: Optional[WindowSeries], op: str, factor=None) -> WindowSeries:
    """
    add / sub / mul / scale with guarantee propagation
    Арифметика рядов с распространением окна гарантии
    """
    if op == "scale":
        return a.scale(factor)
    if b is None:
        raise SeriesError(f"operation {op} needs two operands")
    variables = sort_variables(set(a.variables) | set(b.variables))

    if op in ("add", "sub"):
        boxes = {v: _add_bounds(a, b, v) for v in variables}
        sign = Fraction(1) if op == "add" else Fraction(-1)
        table: Dict[Exponents, Value] = dict(a._aligned(variables))
        for exps, value in b._aligned(variables):
            term = sign * value
            table[exps] = table[exps] + term if exps in table else term
        domain = a.domain if a.domain == b.domain else None
    elif op == "mul":
        domain = _product_domain(a, b)
        boxes = {v: _mul_bounds(a, b, v) for v in variables}
        left = list(a._aligned(variables))
        right = list(b._aligned(variables))
        table = {}
        for exps_a, value_a in left:
            for exps_b, value_b in right:
                exps = tuple(x + y for x, y in zip(exps_a, exps_b))
                if not all(boxes[v][0] <= e <= boxes[v][1] for v, e in zip(variables, exps)):
                    continue
                term = value_a * value_b
                table[exps] = table[exps] + term if exps in table else term
    else:
        raise SeriesError(f"unknown series operation {op!r}")

    window = Window({v: (boxes[v][0], boxes[v][1]) for v in variables})
    inside = {
        e: c for e, c in table.items()
        if all(window[v][0] <= x <= window[v][1] for v, x in zip(variables, e))
    }
    return WindowSeries(
        variables,
        inside,
        window,
        domain,
        [v for v in variables if boxes[v][2]],
        [v for v in variables if boxes[v][3]],
    )


def formal_residue(f: WindowSeries, var: str) -> WindowSeries:
    """Coefficient of var^{-1} as a series in the remaining variables"""
    check_variable(var)
    if var not in f.variables:
        rest = f.variables
        return WindowSeries(rest, {}, Window({v: f.guarantee[v] for v in rest}),
                            None, f.lower_closed, f.upper_closed)
    if not f._determined(var, -1):
        raise TruncationError(f"residue in {var} needs exponent -1, guarantee is {f.guarantee[var]}")
    i = f.variables.index(var)
    rest = f.variables[:i] + f.variables[i + 1:]
    coefficients = {e[:i] + e[i + 1:]: c for e, c in f._coefficients.items() if e[i] == -1}
    domain = None
    if f.domain is not None and var not in f.domain.variables:
        domain = f.domain
    elif f.domain is not None:
        remaining = [(v, p) for v, p in f.domain.pairs if v != var]
        domain = ExpansionDomain(remaining) if remaining else None
    return WindowSeries(
        rest,
        coefficients,
        Window({v: f.guarantee[v] for v in rest}),
        domain,
        f.lower_closed - {var},
        f.upper_closed - {var},
    )


def taylor_shift(f: WindowSeries, var: str, offset: str, window: Window) -> WindowSeries:
    """
    f(var + offset) = e^{offset d/dvar} f(var), nonnegative powers of offset
    Формула Тейлора: коэффициент при var^a offset^b равен binom(a+b, b) f_{a+b}
    """
    check_variable(var)
    check_variable(offset)
    if var == offset:
        raise SeriesError("shift variable and offset must differ")
    if f.variables not in ((var,), ()):
        raise SeriesError(f"taylor_shift needs a series in {var} only, got {f.variables}")
    if f.domain is None and f.variables and var not in f.lower_closed:
        raise SeriesError("substitution into the singular locus of a two-sided table")
    if var not in window or offset not in window:
        raise SeriesError(f"taylor_shift window must bound {var} and {offset}")

    point = ZERO
    if f.domain is not None:
        point = f.domain.point(var) or ZERO
    variables = sort_variables((var, offset))
    lo_b, hi_b = window[offset]
    lo_b = max(lo_b, 0)
    if lo_b > hi_b:
        raise SeriesError("offset window contains no nonnegative exponent")
    lo_a, hi_a = window[var]
    coefficients = {}
    for a in range(lo_a, hi_a + 1):
        for b in range(lo_b, hi_b + 1):
            n = a + b
            value = f.coefficient({var: n}) if f.variables else (f.coefficient(()) if n == 0 else Fraction(0))
            if is_zero(value):
                continue
            exps = {var: a, offset: b}
            coefficients[tuple(exps[v] for v in variables)] = binomial(n, b) * value
    box = Window({var: (lo_a, hi_a), offset: (lo_b, hi_b)})
    domain = ExpansionDomain([(var, point), (offset, ZERO)])
    return WindowSeries(variables, coefficients, box, domain, lower_closed=(offset,))


# ============================================
# DELTA KERNELS / ДЕЛЬТА-ФУНКЦИИ
# ============================================

TWO_VAR = "two_var"
KERNEL_X1_MINUS_X2 = "(x1-x2)/x0"
KERNEL_X2_MINUS_X1 = "(x2-x1)/(-x0)"
KERNEL_X1_MINUS_X0 = "(x1-x0)/x2"
DELTA_KINDS = (TWO_VAR, KERNEL_X1_MINUS_X2, KERNEL_X2_MINUS_X1, KERNEL_X1_MINUS_X0)


def _kernel_value(kind: str, e0: int, e1: int, e2: int) -> int:
    if kind == KERNEL_X1_MINUS_X2:
        # x0^{-n-1} (x1 - x2)^n
        if e2 < 0 or e0 + e1 + e2 != -1:
            return 0
        n = -e0 - 1
        return binomial(n, e2) * (-1) ** e2
    if kind == KERNEL_X2_MINUS_X1:
        # (-1)^n x0^{-n-1} (x2 - x1)^n
        if e1 < 0 or e0 + e1 + e2 != -1:
            return 0
        n = -e0 - 1
        return (-1) ** n * binomial(n, e1) * (-1) ** e1
    if kind == KERNEL_X1_MINUS_X0:
        # x2^{-n-1} (x1 - x0)^n
        if e0 < 0 or e0 + e1 + e2 != -1:
            return 0
        n = -e2 - 1
        return binomial(n, e0) * (-1) ** e0
    raise SeriesError(f"unknown delta kernel {kind!r}")


def delta_kernel(kind: str, window: Window) -> WindowSeries:
    """
    Formal delta kernels truncated to a window
    two_var: x1^{-1} delta(x2/x1) = sum_n x2^n x1^{-n-1}
    """
    if kind == TWO_VAR:
        variables = ("x1", "x2")
    elif kind in DELTA_KINDS:
        variables = ("x0", "x1", "x2")
    else:
        raise SeriesError(f"unknown delta kernel {kind!r}")
    missing = [v for v in variables if v not in window]
    if missing:
        raise SeriesError(f"delta kernel window must bound {', '.join(missing)}")
    box = Window({v: window[v] for v in variables})
    coefficients = {}
    for exps in box.points(variables):
        if kind == TWO_VAR:
            value = 1 if exps[0] + exps[1] == -1 else 0
        else:
            value = _kernel_value(kind, *exps)
        if value:
            coefficients[exps] = Fraction(value)
    return WindowSeries(variables, coefficients, box)
