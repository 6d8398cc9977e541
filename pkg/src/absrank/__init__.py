"""Absolute-ranking normalization for benchmarking optimization algorithms."""

__version__ = "0.1.0"
