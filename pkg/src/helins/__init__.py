"""Pseudo-spectral Navier-Stokes on the 3-torus with helical decomposition diagnostics."""
__version__ = "0.1.0"
