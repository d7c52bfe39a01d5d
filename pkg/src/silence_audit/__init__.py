"""Measure how much label information leaks through leading/trailing silence."""

__version__ = "0.1.0"
