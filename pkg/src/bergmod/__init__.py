"""Numerical toolkit for quotient modules of the Bergman space on the unit ball."""

__version__ = "0.1.0"
