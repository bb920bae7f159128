"""Numerical geometry of the compact rank-one symmetric spaces and their
non-compact duals, built uniformly from normed module structures."""

__version__ = "0.1.0"
