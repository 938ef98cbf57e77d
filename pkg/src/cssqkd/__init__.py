"""Simulation lab for CSS-code based quantum key distribution."""

__version__ = "0.1.0"
