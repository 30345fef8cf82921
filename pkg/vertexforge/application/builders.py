"""
Application Layer - Builders
Построение доменных объектов из DTO сценария

Errors in user input are raised as ScenarioError with a JSON pointer.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from vertexforge.application.dto import (
    DYStructureDTO,
    HalfCurrentStructureDTO,
    LieDTO,
    QYBMatrixDTO,
    WindowSpec,
    ZFDataDTO,
    ZFStructureDTO,
)
from vertexforge.domain.borcherds import (
    DerivationStructure,
    HalfCurrentAlgebra,
    LieAlgebra,
    abelian,
    half_current_datum,
    preset_half_currents,
    sl2,
)
from vertexforge.domain.exceptions import ExpressionError, ScenarioError, SeriesError
from vertexforge.domain.fields import SLocalityDatum, TransportedStructure, VertexStructure
from vertexforge.domain.linmod import ModuleVector
from vertexforge.domain.presentations import ModeModule
from vertexforge.domain.ratfun import QYBMatrix, RationalFunction
from vertexforge.domain.series import ExpansionDomain, Window
from vertexforge.domain.yangian import build_vq, generator_datum, generator_label
from vertexforge.domain.zf import (
    QSystemReport,
    ZFData,
    build_vacuum_module,
    deformed_betagamma_matrix,
    preset_betagamma,
    preset_deformed_betagamma,
    preset_free_boson,
    preset_q_system,
)

Constants = Mapping[str, Fraction]
OperandSpec = Union[str, Sequence[Sequence]]

VACUUM_NAMES = ("1", "vacuum")


# ============================================
# Parsing helpers / Разбор входных данных
# ============================================

def parse_expression(text: str, constants: Constants, pointer: str) -> RationalFunction:
    """RationalFunction.parse with the scenario constants; errors carry the pointer"""
    try:
        return RationalFunction.parse(text, constants)
    except ExpressionError as exc:
        raise ScenarioError(str(exc), pointer) from exc


def parse_domain(text: str, pointer: str) -> ExpansionDomain:
    try:
        return ExpansionDomain.parse(text)
    except SeriesError as exc:
        raise ScenarioError(str(exc), pointer) from exc


def build_window(spec: WindowSpec, variables: Sequence[str], pointer: str) -> Window:
    """
    [lo, hi] for every variable, or {"x1": [lo, hi], ...}
    Окно должно ограничивать все нужные переменные
    """
    if isinstance(spec, dict):
        missing = [v for v in variables if v not in spec]
        if missing:
            raise ScenarioError(f"window lacks bounds for {', '.join(missing)}", pointer)
        bounds = dict(spec)
    else:
        bounds = {v: spec for v in variables}
    try:
        return Window(bounds)
    except SeriesError as exc:
        raise ScenarioError(str(exc), pointer) from exc


# ============================================
# ZF data and Lie algebras
# ============================================

def build_zf_data(dto: ZFDataDTO, constants: Constants, pointer: str) -> Tuple[ZFData, Optional[QSystemReport]]:
    """ZF data of a preset; a Q-system also returns its unitarity report"""
    if dto.preset == "betagamma":
        return preset_betagamma(), None
    if dto.preset == "free_boson":
        return preset_free_boson(), None
    if dto.preset == "deformed_betagamma":
        try:
            return preset_deformed_betagamma(dto.lam), None
        except ExpressionError as exc:
            raise ScenarioError(str(exc), f"{pointer}/lambda") from exc
    Q = [[parse_expression(text, constants, f"{pointer}/Q/{i}/{j}") for j, text in enumerate(row)]
         for i, row in enumerate(dto.Q)]
    factorization = None
    if dto.factorization is not None:
        factorization = [[parse_expression(text, constants, f"{pointer}/factorization/{i}/{j}")
                          for j, text in enumerate(row)] for i, row in enumerate(dto.factorization)]
    try:
        return preset_q_system(Q, dto.names, factorization)
    except (ExpressionError, SeriesError) as exc:
        raise ScenarioError(str(exc), f"{pointer}/Q") from exc


def build_lie(dto: LieDTO, pointer: str) -> LieAlgebra:
    if dto.preset == "sl2":
        return sl2()
    if dto.preset == "abelian":
        return abelian(dto.names)
    names = list(dto.names)
    brackets: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for position, bracket in enumerate(dto.brackets):
        where = f"{pointer}/brackets/{position}"
        try:
            key = (names.index(bracket.left), names.index(bracket.right))
            value = {names.index(name): c for name, c in bracket.value.items()}
        except ValueError as exc:
            raise ScenarioError(f"unknown basis element in bracket: {exc}", where) from exc
        brackets[key] = value
    try:
        return LieAlgebra(tuple(names), brackets)
    except SeriesError as exc:
        raise ScenarioError(str(exc), pointer) from exc


def build_qyb_matrix(dto: QYBMatrixDTO, constants: Constants, pointer: str) -> QYBMatrix:
    try:
        if dto.preset == "identity":
            return QYBMatrix.identity(dto.n, dto.var)
        if dto.preset == "deformed_betagamma":
            return deformed_betagamma_matrix(dto.lam)
        if dto.diagonal is not None:
            diagonal = [parse_expression(text, constants, f"{pointer}/diagonal/{i}")
                        for i, text in enumerate(dto.diagonal)]
            if len(diagonal) != dto.n * dto.n:
                raise ScenarioError(f"diagonal needs {dto.n * dto.n} entries", f"{pointer}/diagonal")
            return QYBMatrix.diagonal(dto.n, diagonal, dto.var)
        entries = [[parse_expression(text, constants, f"{pointer}/entries/{i}/{j}") for j, text in enumerate(row)]
                   for i, row in enumerate(dto.entries)]
        return QYBMatrix(dto.n, entries, dto.var)
    except (ExpressionError, SeriesError) as exc:
        raise ScenarioError(str(exc), pointer) from exc


# ============================================
# Vertex structures / Вершинные структуры
# ============================================

@dataclass
class StructureContext:
    """
    A vertex structure with the readers of its operand family
    Операнды: имя образующей, "1" (вакуум) или список букв
    """
    structure: VertexStructure
    generators: Tuple[str, ...]
    read_generator: Callable[[str], object]
    read_letters: Callable[[List[Tuple[str, int]]], ModuleVector]
    generator_datum: Callable[[str, str], SLocalityDatum]
    mode_module: bool

    def operand(self, spec: OperandSpec, pointer: str):
        """Basis label when the operand is one basis vector, else the vector"""
        if isinstance(spec, str):
            if spec in VACUUM_NAMES:
                return self.structure.vacuum
            if spec not in self.generators:
                raise ScenarioError(f"unknown generator {spec!r}", pointer)
            return self.read_generator(spec)
        letters = []
        for name, index in spec:
            if name not in self.generators:
                raise ScenarioError(f"unknown generator {name!r}", pointer)
            letters.append((name, int(index)))
        vector = self.read_letters(letters)
        labels = vector.labels
        if len(labels) == 1 and vector.coefficient(labels[0]) == 1:
            return labels[0]
        return vector

    def generator_pairs(self) -> List[Tuple[object, object]]:
        return [(self.read_generator(a), self.read_generator(b)) for a in self.generators for b in self.generators]


def _mode_context(module: ModeModule) -> StructureContext:
    def read_letters(letters: List[Tuple[str, int]]) -> ModuleVector:
        vector = ModuleVector.basis(module.vacuum)
        for letter in reversed(letters):
            vector = module.act(letter, vector)
        return vector

    return StructureContext(
        structure=TransportedStructure(module),
        generators=tuple(module.algebra.generators),
        read_generator=generator_label,
        read_letters=read_letters,
        generator_datum=lambda a, b: generator_datum(module.algebra, a, b),
        mode_module=True,
    )


def _half_current_context(algebra: HalfCurrentAlgebra) -> StructureContext:
    lie = algebra.lie

    def read_letters(letters: List[Tuple[str, int]]) -> ModuleVector:
        if any(depth < 1 for _, depth in letters):
            raise ScenarioError("half-current letters need depth >= 1")
        return algebra.apply_letters([(lie.index(name), depth) for name, depth in letters],
                                     ModuleVector.basis(algebra.unit))

    return StructureContext(
        structure=DerivationStructure(algebra),
        generators=tuple(lie.names),
        read_generator=algebra.element,
        read_letters=read_letters,
        generator_datum=lambda a, b: half_current_datum(algebra, a, b),
        mode_module=False,
    )


def build_structure(dto, constants: Constants, max_cells: Optional[int], pointer: str) -> StructureContext:
    """ZF vacuum module, V_q, or the half-current algebra, with its vertex structure"""
    if isinstance(dto, ZFStructureDTO):
        data, _ = build_zf_data(dto, constants, pointer)
        return _mode_context(build_vacuum_module(data, dto.maxdeg, max_cells))
    if isinstance(dto, DYStructureDTO):
        return _mode_context(build_vq(dto.q, dto.maxdeg, max_cells))
    if isinstance(dto, HalfCurrentStructureDTO):
        algebra, _ = preset_half_currents(build_lie(dto.lie, f"{pointer}/lie"), dto.maxdeg)
        return _half_current_context(algebra)
    raise ScenarioError(f"unknown structure kind {getattr(dto, 'kind', None)!r}", pointer)
