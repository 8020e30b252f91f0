"""Spectral Galerkin simulation of stochastic Burgers on (0, 1) with Dirichlet walls."""

__version__ = "0.1.0"
