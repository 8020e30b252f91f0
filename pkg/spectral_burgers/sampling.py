"""Seeded random inputs for the inequality checkers."""

import numpy as np

from .types import SpectralVector


def random_vector(
    rng: np.random.Generator, n_modes: int, decay: float = 0.0, scale: float = 1.0,
) -> SpectralVector:
    """Gaussian coefficients z_n n^{-decay} scale on n_modes modes."""
    n = np.arange(1, n_modes + 1, dtype=np.float64)
    return SpectralVector(scale * rng.standard_normal(n_modes) * n**-decay)


def random_pair(
    rng: np.random.Generator, max_modes: int, decay: float = 0.0,
) -> tuple[SpectralVector, SpectralVector]:
    """Two vectors with independent random lengths in 1..max_modes and log-uniform scales."""
    out = []
    for _ in range(2):
        n = int(rng.integers(1, max_modes + 1))
        out.append(random_vector(rng, n, decay=decay, scale=10.0 ** rng.uniform(-1.5, 1.5)))
    return out[0], out[1]
