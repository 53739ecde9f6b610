"""Effective constructions around Hilbert's Tenth Problem for subrings of Q."""

__version__ = "0.1.0"
