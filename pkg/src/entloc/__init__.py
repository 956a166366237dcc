"""Entanglement and localization of random and physical wavefunctions."""

__version__ = "0.1.0"
