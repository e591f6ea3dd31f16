"""Lagrangian-Floer homology of restricted immersed curves in the pillowcase."""

__version__ = "0.1.0"
