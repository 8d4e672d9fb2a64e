"""Numerical verification of a counterexample to the Extended Courant Property."""

__version__ = "0.1.0"
