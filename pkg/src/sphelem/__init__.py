"""Spectral-element spherical harmonic transforms and sphere scattering solvers."""

__version__ = "0.1.0"
