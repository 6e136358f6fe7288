"""
Command system for the htb command line.

Handles subcommand definition, registration, option validation and
execution. Each command names the options it reads and links to a handler
function; the registry resolves user input (with fuzzy suggestions) to a
command and runs it.
"""

from typing import Any, Callable, Dict, List, Optional, Set

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..core.errors import ConfigError
from .options import get_option
from .parser import unknown
from .results import CommandResult

# ==================== INVOCATION ====================


class Invocation(BaseModel):
    """Everything a handler gets: resolved option values and where they came from."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    command_id: str
    values: Dict[str, Any] = Field(default_factory=dict, description="option id -> value after preset/file/flag precedence")
    flag_keys: Set[str] = Field(default_factory=set, description="Options given as command-line flags")

    def get(self, key: str, default: Any = None) -> Any:
        value = self.values.get(key)
        return default if value is None else value


# ==================== COMMAND DEFINITION ====================


class Command(BaseModel):
    """A subcommand: its options and its handler."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    command_id: str = Field(description="Subcommand name as typed")
    description: str
    options: Set[str] = Field(default_factory=set, description="Option ids the command reads")
    handler: Optional[Callable[[Invocation], CommandResult]] = None
    examples: List[str] = Field(default_factory=list)

    @field_validator("options")
    @classmethod
    def validate_option_ids_exist(cls, v: Set[str]) -> Set[str]:
        """Validate that all option ids exist in the option registry"""
        invalid = sorted(option_id for option_id in v if get_option(option_id) is None)
        if invalid:
            raise ValueError(f"Unknown option ids: {', '.join(invalid)}. Option ids must be defined in options.py")
        return v

    def validate_flags(self, flag_keys: Set[str]) -> tuple[bool, str]:
        """
        Check that every option given as a flag is read by this command.

        Returns:
            (is_valid, error_message)
        """
        unused = sorted(flag_keys - self.options)
        if unused:
            flags = ", ".join(get_option(k).flag or k for k in unused)
            return False, f"'{self.command_id}' does not use {flags}"
        return True, ""

    def execute(self, invocation: Invocation) -> CommandResult:
        if not self.handler:
            raise NotImplementedError(f"Command '{self.command_id}' has no execution handler")
        return self.handler(invocation)


# ==================== COMMAND REGISTRY ====================


class CommandRegistry:
    """Central registry for all subcommands."""

    def __init__(self):
        self._commands: Dict[str, Command] = {}

    def register(self, command: Command) -> None:
        self._commands[command.command_id] = command

    def get_command(self, command_id: str) -> Optional[Command]:
        return self._commands.get(command_id)

    def resolve(self, command_id: str) -> Command:
        """
        Raises:
            ConfigError: Unknown command, with suggestions
        """
        command = self.get_command(command_id)
        if command is None:
            raise unknown("command", command_id, self.list_command_ids())
        return command

    def get_all_commands(self) -> Dict[str, Command]:
        return self._commands.copy()

    def list_command_ids(self) -> List[str]:
        return list(self._commands.keys())

    def execute_command(self, invocation: Invocation) -> CommandResult:
        """
        Validate the flags of an invocation against its command and run it.

        Raises:
            ConfigError: Unknown command or a flag the command does not use
        """
        command = self.resolve(invocation.command_id)
        is_valid, error_msg = command.validate_flags(invocation.flag_keys)
        if not is_valid:
            raise ConfigError(error_msg)
        return command.execute(invocation)


# ==================== DECORATOR FOR AUTO-REGISTRATION ====================

# Global registry instance
_command_registry = CommandRegistry()


def register_command(
    command_id: str,
    description: str,
    options: Optional[Set[str]] = None,
    examples: Optional[List[str]] = None,
):
    """
    Decorator to register a subcommand handler.

    Usage:
        @register_command(
            command_id="exponents",
            description="Print bound exponents",
            options={"epsilon", "dims", "nu", "n"},
        )
        def exponents_handler(invocation: Invocation) -> CommandResult:
            ...
    """

    def decorator(handler_func: Callable[[Invocation], CommandResult]) -> Callable[[Invocation], CommandResult]:
        _command_registry.register(
            Command(
                command_id=command_id,
                description=description,
                options=options or set(),
                handler=handler_func,
                examples=examples or [],
            )
        )
        return handler_func

    return decorator


# ==================== COMMAND REGISTRY ACCESS ====================


def get_registry() -> CommandRegistry:
    return _command_registry


def execute_command(invocation: Invocation) -> CommandResult:
    """Execute a command with flag validation"""
    return _command_registry.execute_command(invocation)
