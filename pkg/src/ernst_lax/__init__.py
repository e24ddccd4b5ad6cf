"""Numerical verification of the Ernst equation's linearization and its charge tower."""

__version__ = "0.1.0"
