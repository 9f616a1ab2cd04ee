"""Finite-mode photon detection operators, indirect measurement and detector complementarity."""

__version__ = "0.1.0"
