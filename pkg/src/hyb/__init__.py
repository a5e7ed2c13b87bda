"""Compiler, translator, and demand-driven runtime for hybrid programs:
stream expressions embedded in classes of a small Java-like host subset."""

__version__ = "0.1.0"
