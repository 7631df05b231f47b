"""Predict program resilience to single-bit faults from dynamic-trace features."""

__version__ = "0.1.0"
