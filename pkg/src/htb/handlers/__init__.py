"""
Command handlers for HTB.

Importing this package registers every subcommand with the command registry.
"""

from . import analysis, experiment  # noqa: F401
