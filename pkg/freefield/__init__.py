"""Exact symbolic engine for free-field vertex superalgebras and the chiral de Rham complex."""

__version__ = "0.1.0"
