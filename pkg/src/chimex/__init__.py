"""Fourier-spectral IMEX solver for Cahn-Hilliard with energy-stability certificates."""

from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
