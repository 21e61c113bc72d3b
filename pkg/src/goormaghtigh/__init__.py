"""Exhaustive search for numbers with two repunit representations."""

__version__ = "0.1.0"
