"""
Command-line components for HTB.

Contains the option vocabulary, config-file parsing, the subcommand
registry and result formatting.
"""
