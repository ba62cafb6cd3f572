"""
Error types for MemDrift

Every failure a simulation can raise is one of the classes below. Each error
keeps the offending key, value or solver report as attributes so callers
(the CLI in particular) can decide on an exit status without parsing text.
"""

from typing import Any, Dict, Optional


class MemDriftError(Exception):
    """Base class for all MemDrift errors."""


class ConfigurationError(MemDriftError):
    """Raised when a mesh, boundary layout or scenario file is inconsistent."""

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(message)


class DataError(MemDriftError):
    """Raised when field data violates a sign or shape requirement."""

    def __init__(self, message: str, field: Optional[str] = None, index: Optional[int] = None):
        self.field = field
        self.index = index
        super().__init__(message)


class ParameterError(MemDriftError):
    """Raised when a numeric parameter lies outside an operation's range."""

    def __init__(self, message: str, name: Optional[str] = None, value: Any = None):
        self.name = name
        self.value = value
        super().__init__(message)


class DomainError(ParameterError):
    """Raised when a pointwise function is evaluated outside its domain."""


class NumericalError(MemDriftError):
    """Raised when a linear or nonlinear solve breaks down."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)


class StepFailure(NumericalError):
    """Raised when Newton's method cannot complete an implicit Euler step."""

    def __init__(self, message: str, report: Any = None):
        self.report = report
        diagnostics = {}
        if report is not None:
            diagnostics = {
                "iterations": report.iterations,
                "residual": report.residual,
                "dt": report.dt,
            }
        super().__init__(message, diagnostics)
