"""
Application Layer - DTOs (Data Transfer Objects)
Схемы сценариев: общий конверт и полезная нагрузка каждой команды

Every model forbids unknown keys; scalars are JSON integers or "p/q" strings.
"""

import re
from fractions import Fraction
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union, get_args

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError, field_validator, model_validator

from vertexforge.domain.exceptions import ExpressionError
from vertexforge.domain.scalar import to_scalar
from vertexforge.domain.series import VARIABLES


def _parse_scalar(value: Any) -> Fraction:
    try:
        return to_scalar(value)
    except ExpressionError as exc:
        raise ValueError(str(exc)) from exc


Scalar = Annotated[Fraction, BeforeValidator(_parse_scalar)]
Bounds = Tuple[int, int]
WindowSpec = Union[Bounds, Dict[str, Bounds]]

Command = Literal[
    "expand",
    "delta-check",
    "zf-build",
    "dy-build",
    "dyinf-build",
    "borcherds-check",
    "slocal-check",
    "sjacobi-check",
    "weakassoc-check",
    "braiding-solve",
    "zn-rank",
    "qyb-check",
    "module-at-infinity-check",
]
COMMANDS = get_args(Command)

_CONSTANT_NAME = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")


class StrictModel(BaseModel):
    """Base for scenario models: unknown keys are errors"""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


def _check_bounds(bounds: Bounds) -> Bounds:
    lo, hi = bounds
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    return bounds


# ============================================
# Scenario envelope / Конверт сценария
# ============================================

class OptionsDTO(StrictModel):
    """Per-scenario overrides of the settings"""
    max_cells: Optional[int] = Field(None, gt=0)
    max_order: Optional[int] = Field(None, ge=0, le=32)
    label: Optional[str] = Field(None, max_length=200)


class ScenarioDTO(StrictModel):
    """Command, named constants, command payload and options"""
    command: Command
    constants: Dict[str, Scalar] = Field(default_factory=dict)
    payload: Dict[str, Any] = Field(default_factory=dict)
    options: OptionsDTO = Field(default_factory=OptionsDTO)

    @field_validator("constants")
    @classmethod
    def constant_names(cls, v: Dict[str, Fraction]) -> Dict[str, Fraction]:
        """Имена констант не должны совпадать с формальными переменными"""
        for name in v:
            if not _CONSTANT_NAME.match(name):
                raise ValueError(f"invalid constant name {name!r}")
            if name in VARIABLES:
                raise ValueError(f"constant {name!r} shadows a formal variable")
        return v


# ============================================
# Shared pieces / Общие части
# ============================================

class CheckWindowDTO(StrictModel):
    """Degree bound on test vectors, optional explicit mode window"""
    degree_bound: int = Field(..., ge=0, le=16)
    modes: Optional[Bounds] = None

    @field_validator("modes")
    @classmethod
    def modes_nonempty(cls, v: Optional[Bounds]) -> Optional[Bounds]:
        return _check_bounds(v) if v is not None else v


class LieDTO(StrictModel):
    """Preset sl2 / abelian, or a basis with brackets [left, right] = value"""
    preset: Optional[Literal["sl2", "abelian"]] = None
    names: Optional[List[str]] = Field(None, min_length=1, max_length=8)
    brackets: List["BracketDTO"] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_source(self) -> "LieDTO":
        if self.preset == "sl2" and (self.names or self.brackets):
            raise ValueError("the sl2 preset takes no names or brackets")
        if self.preset != "sl2" and not self.names:
            raise ValueError("names are required unless preset is sl2")
        if self.preset == "abelian" and self.brackets:
            raise ValueError("an abelian Lie algebra has no brackets")
        return self


class BracketDTO(StrictModel):
    left: str
    right: str
    value: Dict[str, Scalar]


LieDTO.model_rebuild()


class ZFDataDTO(StrictModel):
    """
    Presets of ZF data, or a Q-system on generators u_i, v_i
    Q - матрица l x l выражений q_ij(x); names - 2l имён (сначала u, затем v)
    """
    preset: Literal["betagamma", "deformed_betagamma", "free_boson", "q_system"]
    lam: Optional[Scalar] = Field(None, alias="lambda")
    Q: Optional[List[List[str]]] = None
    names: Optional[List[str]] = None
    factorization: Optional[List[List[str]]] = None

    @model_validator(mode="after")
    def check_preset(self) -> "ZFDataDTO":
        if self.preset == "deformed_betagamma" and self.lam is None:
            raise ValueError("deformed_betagamma needs lambda")
        if self.preset == "q_system" and self.Q is None:
            raise ValueError("q_system needs Q")
        if self.preset != "q_system" and (self.Q or self.names or self.factorization):
            raise ValueError(f"preset {self.preset} takes no Q, names or factorization")
        return self


class ZFStructureDTO(ZFDataDTO):
    kind: Literal["zf"]
    maxdeg: int = Field(..., ge=0, le=12)


class DYStructureDTO(StrictModel):
    kind: Literal["dy"]
    q: Scalar
    maxdeg: int = Field(..., ge=0, le=10)


class HalfCurrentStructureDTO(StrictModel):
    kind: Literal["half_currents"]
    lie: LieDTO = Field(default_factory=lambda: LieDTO(preset="sl2"))
    maxdeg: int = Field(..., ge=0, le=10)


StructureDTO = Annotated[
    Union[ZFStructureDTO, DYStructureDTO, HalfCurrentStructureDTO],
    Field(discriminator="kind"),
]

# "e" is the generator vector, [["e", -1], ["f", -1]] a word read left to right
Operand = Union[str, List[Tuple[str, int]]]


class TripleDTO(StrictModel):
    """One term f(x) b (x) a of an S-locality datum"""
    b: Operand
    a: Operand
    f: str


class DatumDTO(StrictModel):
    triples: List[TripleDTO] = Field(..., min_length=1)
    k: Optional[int] = Field(None, ge=0, le=32)


# ============================================
# Series commands / Команды для рядов
# ============================================

class ExpandDTO(StrictModel):
    """expr expanded in domain, e.g. "x@0" or "x1@0,x2@0" """
    expr: str
    domain: str
    window: WindowSpec
    expect: Optional[List[Scalar]] = None


class DeltaCheckDTO(StrictModel):
    """Delta-calculus identities on a window"""
    kind: Literal["annihilation", "three_term", "pair_delta", "residue", "dy_difference"]
    window: WindowSpec
    expr: Optional[str] = None
    domain: Optional[str] = None
    var: Optional[str] = None
    q: Optional[Scalar] = None

    @model_validator(mode="after")
    def check_kind(self) -> "DeltaCheckDTO":
        if self.kind == "residue" and not (self.expr and self.domain and self.var):
            raise ValueError("residue needs expr, domain and var")
        if self.kind == "dy_difference" and self.q is None:
            raise ValueError("dy_difference needs q")
        return self


# ============================================
# Module commands / Построение модулей
# ============================================

class ZFBuildDTO(ZFDataDTO):
    maxdeg: int = Field(..., ge=0, le=12)
    expect_dimensions: Optional[List[int]] = None
    relation_window: Optional[CheckWindowDTO] = None
    mode_window: Optional[Bounds] = None
    vertex_checks: bool = False


class QvaDTO(StrictModel):
    window: CheckWindowDTO
    pairs: Optional[List[Tuple[str, str]]] = None
    rank_degree: int = Field(2, ge=0, le=8)
    rank_order: int = Field(2, ge=0, le=8)


class DYBuildDTO(StrictModel):
    q: Scalar
    maxdeg: int = Field(..., ge=0, le=10)
    presentation: Literal["at_zero", "at_infinity"] = "at_zero"
    expect_dimensions: Optional[List[int]] = None
    relation_window: Optional[CheckWindowDTO] = None
    mode_window: Optional[Bounds] = None
    expansion_window: Optional[WindowSpec] = None
    qva: Optional[QvaDTO] = None


class DYInfBuildDTO(StrictModel):
    q: Scalar
    maxdepth: int = Field(..., ge=0, le=10)
    expect_dimensions: Optional[List[int]] = None
    relation_window: Optional[CheckWindowDTO] = None


class ProductDTO(StrictModel):
    """a^-_n b^- against the field of a_n b"""
    a: str
    b: str
    n: int


class ClosureDTO(StrictModel):
    depth: int = Field(2, ge=1, le=4)
    indices: Bounds = (-1, 0)


class PolynomialDTO(StrictModel):
    """Q[y] with d/dy"""
    maxdeg: int = Field(..., ge=0, le=16)
    degree_bound: int = Field(..., ge=0, le=16)
    order: int = Field(..., ge=0, le=16)


class BorcherdsCheckDTO(StrictModel):
    lie: LieDTO = Field(default_factory=lambda: LieDTO(preset="sl2"))
    maxdeg: int = Field(..., ge=0, le=10)
    window: CheckWindowDTO
    pairs: Optional[List[Tuple[str, str]]] = None
    axioms: bool = True
    products: List[ProductDTO] = Field(default_factory=list)
    closure: Optional[ClosureDTO] = None
    polynomial: Optional[PolynomialDTO] = None


class ModuleAtInfinityDTO(StrictModel):
    q: Scalar
    maxdeg: int = Field(3, ge=0, le=8)
    maxdepth: int = Field(3, ge=0, le=8)
    window: CheckWindowDTO
    pairs: List[Tuple[str, str]] = Field(default_factory=lambda: [("e", "f"), ("h", "e")])


# ============================================
# Verifier commands / Команды проверки тождеств
# ============================================

class SLocalCheckDTO(StrictModel):
    structure: StructureDTO
    a: Operand
    b: Operand
    datum: Optional[DatumDTO] = None
    window: CheckWindowDTO
    compatibility: Optional[str] = None


class SJacobiCheckDTO(StrictModel):
    structure: StructureDTO
    u: Operand
    v: Operand
    datum: Optional[DatumDTO] = None
    window: CheckWindowDTO
    levels: Optional[List[int]] = Field(None, min_length=1)
    equivalence: bool = False


class WeakAssocCheckDTO(StrictModel):
    structure: StructureDTO
    u: Operand
    v: Operand
    window: CheckWindowDTO
    l: Optional[int] = Field(None, ge=0, le=32)
    quasi: Optional[str] = None
    vacuum: bool = False


class BraidingSolveDTO(StrictModel):
    structure: StructureDTO
    u: Operand
    v: Operand
    window: CheckWindowDTO
    pool: Optional[List[Tuple[Operand, Operand]]] = None
    k: Optional[int] = Field(None, ge=0, le=32)
    series_order: Optional[int] = Field(None, ge=0, le=32)
    hexagon: bool = False
    indices: Bounds = (-1, 0)


class ZnRankDTO(StrictModel):
    structure: StructureDTO
    n: Literal[1, 2]
    degree_bound: int = Field(..., ge=0, le=8)
    series_order: int = Field(..., ge=0, le=8)


class QYBMatrixDTO(StrictModel):
    """Full entries, a diagonal, or a preset"""
    n: Optional[int] = Field(None, ge=1, le=4)
    var: str = "x"
    entries: Optional[List[List[str]]] = None
    diagonal: Optional[List[str]] = None
    preset: Optional[Literal["identity", "deformed_betagamma"]] = None
    lam: Optional[Scalar] = Field(None, alias="lambda")

    @model_validator(mode="after")
    def check_source(self) -> "QYBMatrixDTO":
        sources = [s for s in (self.entries, self.diagonal, self.preset) if s is not None]
        if len(sources) != 1:
            raise ValueError("give exactly one of entries, diagonal, preset")
        if self.preset != "deformed_betagamma" and self.n is None:
            raise ValueError("n is required")
        if self.preset == "deformed_betagamma" and self.lam is None:
            raise ValueError("deformed_betagamma needs lambda")
        return self


class QYBCheckDTO(StrictModel):
    matrix: QYBMatrixDTO
    mode: Literal["unitarity", "ybe", "both"] = "both"


PAYLOADS = {
    "expand": ExpandDTO,
    "delta-check": DeltaCheckDTO,
    "zf-build": ZFBuildDTO,
    "dy-build": DYBuildDTO,
    "dyinf-build": DYInfBuildDTO,
    "borcherds-check": BorcherdsCheckDTO,
    "slocal-check": SLocalCheckDTO,
    "sjacobi-check": SJacobiCheckDTO,
    "weakassoc-check": WeakAssocCheckDTO,
    "braiding-solve": BraidingSolveDTO,
    "zn-rank": ZnRankDTO,
    "qyb-check": QYBCheckDTO,
    "module-at-infinity-check": ModuleAtInfinityDTO,
}


def error_pointer(exc: ValidationError, prefix: str = "") -> str:
    """JSON pointer of the first validation error, e.g. /payload/window/0"""
    errors = exc.errors()
    if not errors:
        return prefix or "/"
    parts = [str(part) for part in errors[0]["loc"]]
    return prefix + "".join(f"/{part}" for part in parts) if parts else prefix or "/"


def error_message(exc: ValidationError) -> str:
    errors = exc.errors()
    return errors[0]["msg"] if errors else str(exc)
