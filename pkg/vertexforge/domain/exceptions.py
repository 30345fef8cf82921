"""
Domain Layer - Exceptions
Исключения предметной области

Every error raised by the engine derives from VertexForgeError, so the
application layer can map them to exit codes in one place.
"""


class VertexForgeError(Exception):
    """Base error / Базовая ошибка"""


class SeriesError(VertexForgeError):
    """Invalid series operation: incompatible domains, empty window, bad variable"""


class ExpansionError(VertexForgeError):
    """Unsupported expansion domain or window unreachable for an iota map"""


class ExpressionError(VertexForgeError):
    """Expression text could not be parsed into a rational function"""


class TruncationError(VertexForgeError):
    """A requested coefficient lies outside what the truncation determines"""


class ResourceLimitError(VertexForgeError):
    """A computation would exceed the configured resource guard"""


class OrientationError(VertexForgeError):
    """Fields of opposite orientation were mixed in one operation"""


class EvidenceError(VertexForgeError):
    """Supplied evidence (polynomial or datum) is missing or inconsistent"""


class ScenarioError(VertexForgeError):
    """Scenario file content is invalid"""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(message)
        self.pointer = pointer


class LinearSystemError(VertexForgeError):
    """A linear system has no solution"""
