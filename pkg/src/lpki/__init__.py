"""Lightweight public key infrastructure testbed over elliptic curves."""

__version__ = "0.1.0"
