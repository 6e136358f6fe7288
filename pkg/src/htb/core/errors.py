"""
Error hierarchy for HTB.

Every exception raised on purpose by the library derives from HtbError so
callers (the CLI in particular) can map failures to exit codes without
catching unrelated exceptions.
"""

from typing import Any, Dict, Optional


class HtbError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message
        self.phase: Optional[int] = None
        self.t: Optional[int] = None

    def with_run_context(self, phase: Optional[int], t: Optional[int]) -> "HtbError":
        """Attach the phase/round at which a run failed and return self."""
        self.phase = phase
        self.t = t
        where = []
        if phase is not None:
            where.append(f"phase {phase}")
        if t is not None:
            where.append(f"round {t}")
        if where:
            self.message = f"[{', '.join(where)}] {self.message}"
            self.args = (self.message,)
        return self


class DomainError(HtbError, ValueError):
    """A precondition on the inputs of an operation is violated."""


class ConstructionError(DomainError):
    """A reward law could not be built (a probability left [0, 1])."""


class ConfigError(HtbError, ValueError):
    """A configuration value, file or flag is invalid."""

    def __init__(self, message: str, suggestions: Optional[list[str]] = None):
        super().__init__(message)
        self.suggestions = suggestions or []


class NumericError(HtbError, ArithmeticError):
    """A numerical routine failed; diagnostics describe the failure."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SingularityError(NumericError):
    """A regularized Gram matrix is numerically singular."""

    def __init__(self, message: str, deficiency: int, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message, diagnostics)
        self.deficiency = deficiency


class OutputError(HtbError, OSError):
    """Results could not be written."""
