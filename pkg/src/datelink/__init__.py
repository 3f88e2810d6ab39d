"""Handwritten date recognition and iterative record linkage."""

__version__ = "0.1.0"
