"""Simulation and design toolkit for detecting spatial decoherence of a trapped
particle through the 2 Omega breathing of its position distribution, probed by
parity-sensitive scattering in a ring cavity."""

__version__ = "0.1.0"
