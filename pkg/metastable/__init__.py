"""Metastable hierarchy analysis for Metropolis dynamics on finite energy landscapes."""

__version__ = "0.1.0"
