"""
Command result formatting and exit codes.

Handlers return a CommandResult (status, what was done, attributes to show,
errors); format_command_result renders it for the terminal and
exit_code_for maps exceptions to the process exit code.
"""

from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from ..core.enums import ExitCode
from ..core.errors import ConfigError, DomainError, NumericError, OutputError


class CommandResult:
    """Represents the result of a command execution."""

    def __init__(self, success: bool, operation: str = "", subject: str = ""):
        self.success = success
        self.operation = operation  # e.g. "solved", "simulated", "aggregated"
        self.subject = subject  # e.g. "design d=10", "experiment appendix-d"
        self.attributes: Dict[str, Any] = {}
        self.errors: List[str] = []
        self.exit_code: ExitCode = ExitCode.SUCCESS if success else ExitCode.CONFIG_ERROR

    def add_attribute(self, key: str, value: Any) -> None:
        """Add an attribute to display."""
        self.attributes[key] = value

    def add_error(self, error: str) -> None:
        """Add an error message."""
        self.errors.append(error)


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def format_command_result(result: CommandResult) -> str:
    """
    Format a command result for display.

    Returns:
        Status line, confirmation, then one indented line per attribute or error
    """
    lines = ["SUCCESS" if result.success else "ERROR"]

    if result.success:
        if result.subject and result.operation:
            lines.append(f"{result.subject} {result.operation}")
        if result.attributes:
            lines.append("")
            width = max(len(key) for key in result.attributes)
            for key, value in result.attributes.items():
                lines.append(f"  {key.ljust(width)}  {_format_value(value)}")
    elif result.errors:
        lines.append("")
        for error in result.errors:
            lines.append(f"  {error}")

    return "\n".join(lines)


def create_success_result(operation: str, subject: str, attributes: Optional[Dict[str, Any]] = None) -> CommandResult:
    """Create a successful command result."""
    result = CommandResult(success=True, operation=operation, subject=subject)
    for key, value in (attributes or {}).items():
        result.add_attribute(key, value)
    return result


def create_error_result(errors: List[str], exit_code: ExitCode = ExitCode.CONFIG_ERROR) -> CommandResult:
    """Create an error command result."""
    result = CommandResult(success=False)
    for error in errors:
        result.add_error(error)
    result.exit_code = exit_code
    return result


def exit_code_for(exc: BaseException) -> ExitCode:
    """0 success, 2 configuration/domain errors, 3 numeric errors, 4 I/O errors."""
    if isinstance(exc, NumericError):
        return ExitCode.NUMERIC_ERROR
    if isinstance(exc, (OutputError, OSError)):
        return ExitCode.IO_ERROR
    if isinstance(exc, (ConfigError, DomainError, ValidationError, ValueError)):
        return ExitCode.CONFIG_ERROR
    raise exc


def create_result_from_exception(exc: BaseException) -> CommandResult:
    """Error result carrying the exit code of exc; unexpected exceptions propagate."""
    code = exit_code_for(exc)
    message = getattr(exc, "message", None) or str(exc)
    return create_error_result([message], code)
