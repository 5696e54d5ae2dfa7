"""Exact certificates for Lusternik-Schnirelmann-type lower bounds from loop homology."""

__version__ = "0.1.0"
