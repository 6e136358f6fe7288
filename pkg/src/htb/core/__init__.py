"""
Core domain layer for HTB.

Contains the shared enums, the error hierarchy, the typed domain models,
seed provenance and pseudo-regret accounting.
"""
