"""Quantum-battery charging by double quenches on the open ANNNI chain."""

__version__ = "0.1.0"
