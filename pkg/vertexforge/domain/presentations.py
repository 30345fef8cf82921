"""
Domain Layer - Mode algebras and their universal modules
Алгебры мод, правила перестановки и универсальные (ко)вакуумные модули

A word is a tuple of letters (generator, mode), leftmost applied last,
standing for letter_1 ... letter_r applied to the (co)vacuum. Modules are
literal quotients of the span of creation words by every relation
instance that fits the truncation, closed under the action of all modes.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from vertexforge.domain.exceptions import ResourceLimitError, SeriesError, TruncationError
from vertexforge.domain.linmod import EchelonForm, GradedBasis, GradedModule, ModuleVector, Quotient
from vertexforge.domain.ratfun import LazySeries
from vertexforge.domain.scalar import format_scalar
from vertexforge.domain.series import binomial

logger = logging.getLogger("vertexforge.presentations")

VACUUM = "vacuum"
COVACUUM = "covacuum"

Letter = Tuple[str, int]
Word = Tuple[Letter, ...]
Term = Tuple[Fraction, Tuple[Letter, ...]]


def letter_degree(orientation: str, mode: int) -> int:
    """Degree shift of a mode: -n on the vacuum side, n + 1 on the co-vacuum side"""
    return -mode if orientation == VACUUM else mode + 1


def render_word(word: Word) -> str:
    if not word:
        return "1"
    return "".join(f"{g}({m})" for g, m in word) + "1"


# ============================================
# EXCHANGE RULES / ПРАВИЛА ПЕРЕСТАНОВКИ
# ============================================


@dataclass(frozen=True)
class DeltaTerm:
    """
    c (1/j!) d^j_{x2} x2^{-1} delta(x1/x2), times g(x2) when a generator is named
    В модах: c binom(m, j) delta_{m+n+1, j} или c binom(m, j) g(m+n-j)
    """

    order: int
    coefficient: Fraction
    generator: Optional[str] = None

    def terms(self, m: int, n: int) -> List[Term]:
        factor = self.coefficient * binomial(m, self.order)
        if not factor:
            return []
        if self.generator is None:
            return [(factor, ())] if m + n + 1 == self.order else []
        return [(factor, ((self.generator, m + n - self.order),))]


class ExchangeRule(ABC):
    """a(m) b(n) = sum of ordered products plus delta terms"""

    def __init__(self, left: str, right: str, deltas: Sequence[DeltaTerm] = ()):
        self.left = left
        self.right = right
        self.deltas = tuple(deltas)

    @abstractmethod
    def braided_terms(self, m: int, n: int, budget: int) -> List[Term]:
        """Terms that can act nontrivially on a vector of degree budget"""

    def terms(self, m: int, n: int, budget: int) -> List[Term]:
        result = self.braided_terms(m, n, budget)
        for delta in self.deltas:
            result.extend(delta.terms(m, n))
        return result

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.left}, {self.right})"


class BraidedRule(ExchangeRule):
    """
    Vacuum side: a(x1)b(x2) = sum_i f_i(x2 - x1) b_i(x2) a_i(x1) + deltas
    f_i раскладывается по неотрицательным степеням x1
    """

    def __init__(self, left: str, right: str, components: Sequence[Tuple[str, str, LazySeries]],
                 deltas: Sequence[DeltaTerm] = ()):
        super().__init__(left, right, deltas)
        self.components = tuple(components)

    def braided_terms(self, m: int, n: int, budget: int) -> List[Term]:
        result: List[Term] = []
        for b_i, a_i, series in self.components:
            a_prime = 0
            while m + a_prime <= budget:
                b_prime = 0
                while m + a_prime + n + b_prime <= budget:
                    c = series.coefficient(a_prime + b_prime)
                    if c:
                        sign = -1 if a_prime % 2 else 1
                        factor = c * binomial(a_prime + b_prime, a_prime) * sign
                        result.append((factor, ((b_i, n + b_prime), (a_i, m + a_prime))))
                    b_prime += 1
                a_prime += 1
        return result


class InfinityRule(ExchangeRule):
    """
    Co-vacuum side: a(x1)b(x2) = sum_i P_i(x1 - x2) b_i(x2) a_i(x1) + deltas
    P_i раскладывается в бесконечности: P = sum_{j<=0} c_j z^j
    """

    def __init__(self, left: str, right: str, components: Sequence[Tuple[str, str, LazySeries]],
                 deltas: Sequence[DeltaTerm] = ()):
        super().__init__(left, right, deltas)
        self.components = tuple(components)

    def braided_terms(self, m: int, n: int, budget: int) -> List[Term]:
        result: List[Term] = []
        for b_i, a_i, series in self.components:
            top = series.highest
            low = max(-(budget + m + n + 2), -(budget + m + 1))
            for j in range(top, low - 1, -1):
                c = series.coefficient(j)
                if not c:
                    continue
                for t in range(0, budget + m + 1 + j + 1):
                    factor = c * binomial(j, t) * (-1 if t % 2 else 1)
                    if factor:
                        result.append((factor, ((b_i, n + t), (a_i, m + j - t))))
        return result


class SolvedInfinityRule(ExchangeRule):
    """
    a(m)b(n) solved from b(x1)a(x2) = P(x1 - x2) a(x2)b(x1)
    a(m)b(n) = (b(n)a(m) - sum_{j<=-1,t>=0} c_j binom(j,t) (-1)^t a(m+t) b(n+j-t)) / c_0
    """

    def __init__(self, left: str, right: str, series: LazySeries):
        super().__init__(left, right)
        self.series = series
        self._validate()

    def _validate(self):
        if self.series.highest != 0 or not self.series.coefficient(0):
            raise SeriesError("solved exchange rule needs a prefactor with nonzero constant term at infinity")

    def braided_terms(self, m: int, n: int, budget: int) -> List[Term]:
        lead = self.series.coefficient(0)
        result: List[Term] = [(1 / lead, ((self.right, n), (self.left, m)))]
        for j in range(-1, -(budget + m + n + 2) - 1, -1):
            c = self.series.coefficient(j)
            if not c:
                continue
            for t in range(0, budget + n + j + 2):
                factor = -c * binomial(j, t) * (-1 if t % 2 else 1) / lead
                if factor:
                    result.append((factor, ((self.left, m + t), (self.right, n + j - t))))
        return result


# ============================================
# MODE ALGEBRA
# ============================================


@dataclass
class ModeAlgebra:
    """
    Generators, an exchange rule for every ordered pair and compatibility data
    orders[(a, b)] - порядок полюса пары полей на модуле, None если только квази
    """

    name: str
    generators: Tuple[str, ...]
    orientation: str
    rules: Dict[Tuple[str, str], ExchangeRule]
    orders: Dict[Tuple[str, str], Optional[int]] = field(default_factory=dict)

    def __post_init__(self):
        self._validate()

    def _validate(self):
        if self.orientation not in (VACUUM, COVACUUM):
            raise SeriesError(f"unknown orientation {self.orientation!r}")
        for a in self.generators:
            for b in self.generators:
                if (a, b) not in self.rules:
                    raise SeriesError(f"{self.name}: no exchange rule for ({a}, {b})")

    def rule(self, a: str, b: str) -> ExchangeRule:
        return self.rules[(a, b)]

    def rank(self, gen: str) -> int:
        return self.generators.index(gen)

    def degree(self, mode: int) -> int:
        return letter_degree(self.orientation, mode)

    def is_creation(self, mode: int) -> bool:
        return self.degree(mode) >= 1

    def creation_modes(self, maxdeg: int) -> List[int]:
        if self.orientation == VACUUM:
            return list(range(-1, -maxdeg - 1, -1))
        return list(range(0, maxdeg))

    def annihilation_modes(self, maxdeg: int) -> List[int]:
        if self.orientation == VACUUM:
            return list(range(0, maxdeg + 1))
        return list(range(-1, -maxdeg - 2, -1))

    def order(self, a: str, b: str) -> Optional[int]:
        return self.orders.get((a, b), 0)


# ============================================
# UNIVERSAL MODULE / УНИВЕРСАЛЬНЫЙ МОДУЛЬ
# ============================================


class ModeModule(GradedModule):
    """
    Universal (co)vacuum module of a mode algebra, truncated at maxdeg
    Фактор пространства слов по всем экземплярам отношений
    """

    def __init__(self, algebra: ModeAlgebra, maxdeg: int, max_cells: Optional[int] = None,
                 name: Optional[str] = None):
        self.algebra = algebra
        self.maxdeg = maxdeg
        self.max_cells = max_cells
        self.name = name or algebra.name
        self._raw: Dict[Tuple[Letter, Word], Dict[Word, Fraction]] = {}
        self.dropped: Dict[int, int] = {}
        self._validate()
        self.words = self._enumerate_words()
        self.basis = GradedBasis(self.words, self.word_degree, self.sort_key)
        self.quotient = self._build()
        self._labels = {d: self.quotient.labels(d) for d in range(maxdeg + 1)}

    def _validate(self):
        if self.maxdeg < 0:
            raise SeriesError("maxdeg must be nonnegative")

    # ----- words -----

    def word_degree(self, word: Word) -> int:
        return sum(self.algebra.degree(m) for _, m in word)

    def letter_key(self, letter: Letter) -> Tuple[int, int]:
        return self.algebra.rank(letter[0]), letter[1]

    def sort_key(self, word: Word) -> tuple:
        return self.word_degree(word), len(word), tuple((m, self.algebra.rank(g)) for g, m in word)

    def is_normal(self, word: Word) -> bool:
        keys = [self.letter_key(letter) for letter in word]
        return all(keys[i] <= keys[i + 1] for i in range(len(keys) - 1))

    def elimination_key(self, word: Word) -> tuple:
        position = self.sort_key(word)
        return -self.word_degree(word), 1 if self.is_normal(word) else 0, tuple(-x for x in _flatten(position))

    def _enumerate_words(self) -> List[Word]:
        letters = [(g, m) for g in self.algebra.generators for m in self.algebra.creation_modes(self.maxdeg)]
        by_degree: Dict[int, List[Word]] = {0: [()]}
        for d in range(1, self.maxdeg + 1):
            words = []
            for letter in letters:
                rest = d - self.algebra.degree(letter[1])
                if rest >= 0:
                    words.extend((letter,) + w for w in by_degree.get(rest, []))
            by_degree[d] = words
            total = sum(len(v) for v in by_degree.values())
            if self.max_cells is not None and total > self.max_cells:
                logger.warning("%s: spanning set of %d words exceeds the guard", self.name, total)
                raise ResourceLimitError(f"spanning set of {total} words exceeds max_cells={self.max_cells}")
        return [w for d in sorted(by_degree) for w in by_degree[d]]

    # ----- raw action on words -----

    def act_raw(self, letter: Letter, word: Word) -> Dict[Word, Fraction]:
        """Action on the free span of words (before the quotient)"""
        key = (letter, word)
        cached = self._raw.get(key)
        if cached is not None:
            return cached
        gen, mode = letter
        target = self.word_degree(word) + self.algebra.degree(mode)
        if target < 0:
            result: Dict[Word, Fraction] = {}
        elif self.algebra.is_creation(mode):
            if target > self.maxdeg:
                raise TruncationError(f"{gen}({mode}) on {render_word(word)} leaves degree <= {self.maxdeg}")
            result = {(letter,) + word: Fraction(1)}
        elif not word:
            result = {}
        else:
            (first_gen, first_mode), rest = word[0], word[1:]
            rule = self.algebra.rule(gen, first_gen)
            result = self._apply_terms(rule.terms(mode, first_mode, self.word_degree(rest)), {rest: Fraction(1)})
        self._raw[key] = result
        return result

    def act_raw_vector(self, letter: Letter, vector: Mapping[Word, Fraction]) -> Dict[Word, Fraction]:
        result: Dict[Word, Fraction] = {}
        for word, c in vector.items():
            for image, value in self.act_raw(letter, word).items():
                total = result.get(image, Fraction(0)) + c * value
                if total:
                    result[image] = total
                else:
                    result.pop(image, None)
        return result

    def _apply_letters(self, letters: Tuple[Letter, ...], vector: Mapping[Word, Fraction]) -> Dict[Word, Fraction]:
        current = dict(vector)
        for letter in reversed(letters):
            if not current:
                break
            current = self.act_raw_vector(letter, current)
        return current

    def _apply_terms(self, terms: Iterable[Term], vector: Mapping[Word, Fraction]) -> Dict[Word, Fraction]:
        result: Dict[Word, Fraction] = {}
        for factor, letters in terms:
            for word, value in self._apply_letters(letters, vector).items():
                total = result.get(word, Fraction(0)) + factor * value
                if total:
                    result[word] = total
                else:
                    result.pop(word, None)
        return result

    # ----- construction -----

    def _swap_instances(self) -> Iterable[Dict[Word, Fraction]]:
        for word in self.words:
            for i in range(len(word) - 1):
                (a, m), (b, n) = word[i], word[i + 1]
                prefix, suffix = word[:i], word[i + 2:]
                rule = self.algebra.rule(a, b)
                try:
                    rhs = self._apply_terms(rule.terms(m, n, self.word_degree(suffix)), {suffix: Fraction(1)})
                except TruncationError:
                    self._drop(self.word_degree(word))
                    continue
                row = {word: Fraction(1)}
                for image, value in rhs.items():
                    full = prefix + image
                    row[full] = row.get(full, Fraction(0)) - value
                yield row

    def _mixed_instances(self, suffixes: Iterable[Word]) -> Iterable[Dict[Word, Fraction]]:
        algebra = self.algebra
        modes = algebra.creation_modes(self.maxdeg) + algebra.annihilation_modes(self.maxdeg)
        lowering = algebra.annihilation_modes(self.maxdeg)
        for suffix in suffixes:
            budget = self.word_degree(suffix)
            for a in algebra.generators:
                for b in algebra.generators:
                    rule = algebra.rule(a, b)
                    for n in lowering:
                        for m in modes:
                            final = budget + algebra.degree(m) + algebra.degree(n)
                            if final < 0 or final > self.maxdeg:
                                continue
                            try:
                                lhs = self.act_raw_vector((a, m), self.act_raw((b, n), suffix))
                                rhs = self._apply_terms(rule.terms(m, n, budget), {suffix: Fraction(1)})
                            except TruncationError:
                                self._drop(final)
                                continue
                            row = dict(lhs)
                            for word, value in rhs.items():
                                total = row.get(word, Fraction(0)) - value
                                if total:
                                    row[word] = total
                                else:
                                    row.pop(word, None)
                            if row:
                                yield row

    def _build(self) -> Quotient:
        echelon = EchelonForm(self.elimination_key)
        queue: List[Dict[Word, Fraction]] = []
        for row in self._swap_instances():
            if echelon.add(row):
                queue.append(row)
        free = [w for w in self.words if not echelon.is_pivot(w)]
        for row in self._mixed_instances(free):
            if echelon.add(row):
                queue.append(row)
        self._close(echelon, queue)
        quotient = Quotient(self.basis, echelon, self.maxdeg)
        logger.info("%s: dimensions %s", self.name, quotient.dimensions())
        if self.dropped:
            logger.debug("%s: relation instances beyond the truncation %s", self.name, sorted(self.dropped.items()))
        return quotient

    def _close(self, echelon: EchelonForm, queue: List[Dict[Word, Fraction]]):
        """Close the relation span under every mode that stays inside the truncation"""
        algebra = self.algebra
        letters = [(g, m) for g in algebra.generators
                   for m in algebra.annihilation_modes(self.maxdeg) + algebra.creation_modes(self.maxdeg)]
        rounds = 0
        while queue:
            row = queue.pop()
            rounds += 1
            top = max(self.word_degree(w) for w in row)
            for letter in letters:
                if top + algebra.degree(letter[1]) > self.maxdeg:
                    continue
                try:
                    image = self.act_raw_vector(letter, row)
                except TruncationError:
                    self._drop(top + algebra.degree(letter[1]))
                    continue
                if image and echelon.add(image):
                    queue.append(image)
        logger.debug("%s: closure processed %d rows, rank %d", self.name, rounds, echelon.rank)

    def _drop(self, degree: int):
        self.dropped[degree] = self.dropped.get(degree, 0) + 1

    def undetermined_degrees(self) -> List[int]:
        """
        Degrees where some relation instance needs words beyond maxdeg
        Там размерность - лишь верхняя оценка
        """
        return sorted(self.dropped)

    # ----- GradedModule -----

    def degree(self, label: Word) -> int:
        return self.word_degree(label)

    def labels(self, d: int) -> List[Word]:
        return list(self._labels.get(d, []))

    def canonical(self, vector: ModuleVector) -> ModuleVector:
        return self.quotient.canonical(vector)

    def render(self, label: Word) -> str:
        return render_word(label)

    @property
    def vacuum(self) -> Word:
        return ()

    def act(self, letter: Letter, vector: ModuleVector) -> ModuleVector:
        """Mode action on the quotient"""
        raw = self.act_raw_vector(letter, vector.as_dict())
        return self.canonical(ModuleVector(raw))


def _flatten(value) -> Tuple[int, ...]:
    if isinstance(value, tuple):
        return tuple(x for item in value for x in _flatten(item))
    return (value,)


# ============================================
# RELATION CHECKS / ПРОВЕРКА ОТНОШЕНИЙ
# ============================================


@dataclass
class RelationCheck:
    pair: Tuple[str, str]
    passed: bool
    checked: int
    undetermined: int
    witness: Optional[Dict[str, object]] = None


def check_mode_relations(module: ModeModule, modes: Sequence[int], degree_bound: int) -> List[RelationCheck]:
    """
    Every exchange rule as an operator identity on the quotient
    a(m) b(n) w = sum of terms applied to w, for w in the basis up to degree_bound
    """
    algebra = module.algebra
    results = []
    for a in algebra.generators:
        for b in algebra.generators:
            rule = algebra.rule(a, b)
            checked = undetermined = 0
            witness = None
            for label in module.basis_vectors(degree_bound):
                w = ModuleVector.basis(label)
                budget = module.degree(label)
                for m in modes:
                    for n in modes:
                        try:
                            lhs = module.act((a, m), module.act((b, n), w))
                            rhs = module.canonical(ModuleVector(module._apply_terms(rule.terms(m, n, budget), w.as_dict())))
                        except TruncationError:
                            undetermined += 1
                            continue
                        checked += 1
                        if lhs != rhs and witness is None:
                            witness = {"m": m, "n": n, "vector": module.render(label)}
                if witness is not None:
                    break
            results.append(RelationCheck((a, b), witness is None, checked, undetermined, witness))
            logger.debug("relation %s%s: %s", a, b, "pass" if witness is None else witness)
    return results


# ============================================
# RELATION LISTINGS / СПИСКИ ОТНОШЕНИЙ
# ============================================


@dataclass
class ModeRelation:
    """a(m) b(n) = sum of terms, listed to a fixed expansion order"""

    left: Letter
    right: Letter
    terms: List[Term]

    def mode_shifts(self) -> List[int]:
        base = self.left[1] + self.right[1]
        return [sum(mode for _, mode in letters) - base for _, letters in self.terms if len(letters) == 2]

    def to_json(self) -> Dict[str, object]:
        return {
            "lhs": render_word((self.left, self.right))[:-1],
            "terms": [[format_scalar(c), render_word(letters)[:-1] or "1"] for c, letters in self.terms],
        }


def expansion_terms(rule: ExchangeRule, m: int, n: int, order: int) -> List[Term]:
    """Terms of a(m)b(n) whose braiding coefficient has order at most `order`"""
    result: List[Term] = []
    if isinstance(rule, BraidedRule):
        for b_i, a_i, series in rule.components:
            for total in range(order + 1):
                c = series.coefficient(total)
                if not c:
                    continue
                for a_prime in range(total + 1):
                    factor = c * binomial(total, a_prime) * (-1 if a_prime % 2 else 1)
                    result.append((factor, ((b_i, n + total - a_prime), (a_i, m + a_prime))))
    elif isinstance(rule, InfinityRule):
        for b_i, a_i, series in rule.components:
            for j in range(series.highest, -order - 1, -1):
                c = series.coefficient(j)
                if not c:
                    continue
                for t in range(order + 1):
                    factor = c * binomial(j, t) * (-1 if t % 2 else 1)
                    if factor:
                        result.append((factor, ((b_i, n + t), (a_i, m + j - t))))
    elif isinstance(rule, SolvedInfinityRule):
        result.extend(rule.braided_terms(m, n, order - m - n - 2))
    for delta in rule.deltas:
        result.extend(delta.terms(m, n))
    return result


def derive_relations(algebra: ModeAlgebra, lo: int, hi: int, order: Optional[int] = None) -> List[ModeRelation]:
    """Mode rules for every generator pair and modes in [lo, hi]"""
    order = hi - lo if order is None else order
    relations = []
    for a in algebra.generators:
        for b in algebra.generators:
            rule = algebra.rule(a, b)
            for m in range(lo, hi + 1):
                for n in range(lo, hi + 1):
                    relations.append(ModeRelation((a, m), (b, n), expansion_terms(rule, m, n, order)))
    return relations
