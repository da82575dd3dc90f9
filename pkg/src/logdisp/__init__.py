"""Numerical laboratory for logarithmic dispersion."""
__version__ = "0.1.0"
