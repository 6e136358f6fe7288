"""
HTB: heavy-tailed linear bandits.

This package provides a library and a command-line simulator for phased
elimination under heavy-tailed noise with moment-aware experimental design,
together with robust estimators, a kernelized extension, hard reward
instances, a truncated-mean UCB baseline and an experiment harness.
"""

__version__ = "0.1.0"
