"""Exact additivity cones for entropic channel formulas."""

__version__ = "0.1.0"
