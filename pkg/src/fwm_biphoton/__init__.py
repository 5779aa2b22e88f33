"""Biphoton states from degenerate four-wave mixing with structured pumps."""

__version__ = "0.1.0"
