"""Characteristic-based solver and asymptotic analysis for the continuum
Kuramoto model with identical oscillators."""

__version__ = "0.1.0"
