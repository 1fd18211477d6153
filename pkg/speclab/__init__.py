"""speclab: finite-n laboratory for spectral distributions of matrix sequences."""

__version__ = "0.1.0"
