"""Finite verification toolkit for composed Karchmer-Wigderson relations."""

__version__ = "0.1.0"
