"""Slipping-rod dynamics, paradox regions and equilibrium analysis."""

__version__ = "0.1.0"
