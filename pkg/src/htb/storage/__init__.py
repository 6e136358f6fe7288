"""
Storage layer for HTB: run files, aggregates and manifests.
"""
