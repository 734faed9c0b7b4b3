"""Initial-data families on a periodic grid."""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .spectral import Field, Grid, hs_sq


def single_mode(grid: Grid, amplitude: float, k: int = 1) -> Field:
    """``amplitude * sin(2 pi k x / L)``."""
    if not 0 < k < grid.n // 2:
        raise ConfigurationError(f"wavenumber index {k} not resolved on N={grid.n}")
    return Field.from_function(grid, lambda x: amplitude * np.sin(2 * np.pi * k * x / grid.length))


def random_bandlimited(grid: Grid, kmax: int, rng: np.random.Generator, amplitude: float = 1.0,
                       decay: float = 0.0) -> Field:
    """Gaussian coefficients on ``1 <= k <= kmax`` damped by ``k^-decay``, scaled to L2 norm ``amplitude``."""
    if not 1 <= kmax < grid.n // 2:
        raise ConfigurationError(f"band limit {kmax} not resolved on N={grid.n}")
    c = np.zeros(grid.n // 2 + 1, dtype=complex)
    k = np.arange(1, kmax + 1)
    c[1:kmax + 1] = (rng.standard_normal(kmax) + 1j * rng.standard_normal(kmax)) * k ** (-decay)
    f = Field.from_coeffs(grid, c)
    return Field(grid, f.samples * amplitude / np.sqrt(hs_sq(f, 0.0)))


def gaussian_bump(grid: Grid, amplitude: float, width: float) -> Field:
    """Periodized Gaussian ``amplitude * exp(-(x - L/2)^2 / width^2)`` with its mean removed."""
    if width <= 0:
        raise ConfigurationError("width must be positive")
    L = grid.length
    x = grid.x
    vals = sum(np.exp(-((x - L / 2 + m * L) / width) ** 2) for m in (-1, 0, 1))
    return Field(grid, amplitude * (vals - vals.mean()))


def power_law(grid: Grid, exponent: float, rng: np.random.Generator, amplitude: float = 1.0,
              kmin: int = 1) -> Field:
    """Random phases with ``|c_k| = amplitude * k^-exponent`` for ``k >= kmin``; Nyquist left empty."""
    c = np.zeros(grid.n // 2 + 1, dtype=complex)
    k = np.arange(kmin, grid.n // 2)
    c[kmin:grid.n // 2] = amplitude * k ** (-exponent) * np.exp(2j * np.pi * rng.random(k.size))
    return Field.from_coeffs(grid, c)


def scale_to_norm(f: Field, s: float, target: float) -> Field:
    n = np.sqrt(hs_sq(f, s))
    if n == 0:
        raise ConfigurationError("cannot rescale the zero field")
    return Field(f.grid, f.samples * (target / n))
