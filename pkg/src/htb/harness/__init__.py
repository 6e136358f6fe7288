"""
Experiment harness: configuration, presets, discretization, orchestration,
aggregation, plot data and the bound-exponent calculator.
"""
