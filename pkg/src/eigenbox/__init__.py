"""Guaranteed lower and upper eigenvalue bounds for 2D Schroedinger operators."""
__version__ = "0.1.0"
