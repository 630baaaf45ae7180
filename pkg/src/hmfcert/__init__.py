"""Certifier toolkit for congruence-prime hypotheses of Hilbert modular forms."""

__version__ = "0.1.0"
