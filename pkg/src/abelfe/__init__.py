"""Verification toolkit for the alpha-transform of generalized Abel equations."""

__version__ = "0.1.0"
