"""Exact combinatorics of QHD surface singularities and elliptic degenerations."""

__version__ = "0.1.0"
