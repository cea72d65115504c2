"""Conformal mesh parameterization by discrete Calabi flow on circle packing metrics."""

__version__ = "0.1.0"
