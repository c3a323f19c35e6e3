"""Knot Floer complexes of satellite knots with L-space patterns."""

__version__ = "0.1.0"
