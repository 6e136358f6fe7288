"""
Main entry point for the htb command line.

Parses the subcommand and its flags, merges preset, config file and flags
(in that order of precedence), runs the registered handler and maps failures
to exit codes: 0 success, 2 configuration error, 3 numeric error, 4 I/O
error.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from . import __version__, handlers  # noqa: F401  (registers the subcommands)
from .cli.commands import Invocation, execute_command, get_registry
from .cli.options import get_flag_options, get_option
from .cli.parser import ConfigFileParser, parse_value
from .cli.results import create_result_from_exception, format_command_result
from .core.enums import PresetName
from .harness.config import preset_values

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(verbosity: int) -> None:
    """WARNING by default, INFO with -v, DEBUG with -vv."""
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def build_parser() -> argparse.ArgumentParser:
    commands = get_registry().get_all_commands()
    epilog = "commands:\n" + "\n".join(f"  {cid:<12} {cmd.description}" for cid, cmd in commands.items())
    parser = argparse.ArgumentParser(
        prog="htb",
        description="Heavy-tailed linear bandits: MED-PE, baselines and experiments",
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", help="Subcommand to run")
    parser.add_argument("--config", type=str, default=None, help="Config file (key = value lines with [sections])")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More logging (-v info, -vv debug)")
    parser.add_argument("--version", action="version", version=f"htb {__version__}")
    for option in get_flag_options().values():
        parser.add_argument(option.flag, dest=option.id, default=None, help=option.description)
    return parser


def resolve_values(args: argparse.Namespace) -> Dict[str, Any]:
    """
    Merge preset < config file < flags into one mapping of option values.

    Raises:
        ConfigError: Invalid file, key or value
    """
    file_values: Dict[str, Any] = {}
    if args.config:
        file_values = ConfigFileParser().parse_file(args.config).values

    flag_values = {
        option_id: parse_value(get_option(option_id), raw)
        for option_id in get_flag_options()
        if (raw := getattr(args, option_id, None)) is not None
    }

    values: Dict[str, Any] = {}
    preset = flag_values.get("preset") or file_values.get("preset")
    if preset:
        values.update(preset_values(PresetName(preset)))
    values.update(file_values)
    values.update(flag_values)
    return values


def build_invocation(args: argparse.Namespace) -> Invocation:
    flag_keys = {option_id for option_id in get_flag_options() if getattr(args, option_id, None) is not None}
    return Invocation(command_id=args.command, values=resolve_values(args), flag_keys=flag_keys)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one htb command and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        result = execute_command(build_invocation(args))
    except KeyboardInterrupt:
        print("\nInterrupted.", file=sys.stderr)
        return 130
    except Exception as exc:
        result = create_result_from_exception(exc)
    print(format_command_result(result))
    return int(result.exit_code)


if __name__ == "__main__":
    sys.exit(main())
