"""Periodic grids, fields and Fourier multipliers.

The real line is replaced by a torus ``[0, L)``. Fields are stored as
collocation samples; their spectrum is the normalized real FFT
``c_k = rfft(f)[k] / N`` on wavenumbers ``xi_k = 2 pi k / L``, so that

    ||f||_{L^2}^2 = L * sum_{k in Z_N} |c_k|^2.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import ConfigurationError, NumericError


@dataclass(frozen=True)
class Grid:
    length: float
    n: int

    def __post_init__(self):
        if not np.isfinite(self.length) or self.length <= 0:
            raise ConfigurationError(f"grid length must be positive, got {self.length!r}")
        if int(self.n) != self.n or self.n % 2 or self.n < 8:
            raise ConfigurationError(f"grid size must be an even integer >= 8, got {self.n!r}")
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "n", int(self.n))

    @cached_property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @cached_property
    def xi(self) -> np.ndarray:
        """Non-negative wavenumbers of the rfft bins, ``k = 0..N/2``."""
        return 2 * np.pi * np.arange(self.n // 2 + 1) / self.length

    @cached_property
    def kmodes(self) -> np.ndarray:
        """Full mode index set ``-N/2+1 .. N/2`` (Nyquist counted as positive)."""
        return np.arange(-self.n // 2 + 1, self.n // 2 + 1)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2 * np.pi * self.kmodes / self.length

    @cached_property
    def mode_weights(self) -> np.ndarray:
        """Multiplicity of each rfft bin in the full spectrum (1 for k=0 and Nyquist, else 2)."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    @property
    def xi_max(self) -> float:
        return float(self.xi[-1])


def make_grid(length: float, n: int) -> Grid:
    return Grid(length, n)


@dataclass(frozen=True, eq=False)
class Field:
    """Real periodic function sampled on a grid. Immutable."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        a = np.array(self.samples, dtype=float)
        if a.shape != (self.grid.n,):
            raise ConfigurationError(f"expected {self.grid.n} samples, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return cls(grid, fn(grid.x))

    @classmethod
    def from_coeffs(cls, grid: Grid, coeffs: np.ndarray) -> "Field":
        f = cls(grid, np.fft.irfft(np.asarray(coeffs) * grid.n, n=grid.n))
        return f

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.n))

    @cached_property
    def coeffs(self) -> np.ndarray:
        """Normalized rfft coefficients ``c_k``, ``k = 0..N/2`` (read-only)."""
        c = np.fft.rfft(self.samples) / self.grid.n
        c.setflags(write=False)
        return c

    @property
    def spectrum(self) -> np.ndarray:
        """Full conjugate-symmetric spectrum on ``grid.kmodes``."""
        c = self.coeffs
        n2 = self.grid.n // 2
        neg = np.conj(c[1:n2][::-1])
        return np.concatenate([neg, c[: n2 + 1]])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.samples)))

    def mean(self) -> float:
        return float(self.coeffs[0].real)

    def _check_grid(self, other):
        if other.grid != self.grid:
            raise ConfigurationError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check_grid(other)
            return Field(self.grid, self.samples + other.samples)
        return Field(self.grid, self.samples + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check_grid(other)
            return Field(self.grid, self.samples - other.samples)
        return Field(self.grid, self.samples - other)

    def __mul__(self, scalar):
        return Field(self.grid, self.samples * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.samples)


@dataclass(frozen=True)
class SymbolSpec:
    """Fourier symbol description.

    kinds: ``abs_power`` (s), ``abs_power_phi`` (s, phi), ``heat`` (nu_t),
    ``poisson`` (t), ``derivative`` (order).
    """

    kind: str
    s: float = 0.0
    phi: object = None
    nu_t: float = 0.0
    t: float = 0.0
    order: int = 1

    def __post_init__(self):
        if self.kind not in ("abs_power", "abs_power_phi", "heat", "poisson", "derivative"):
            raise ConfigurationError(f"unknown symbol kind {self.kind!r}")
        if self.s < 0 or self.nu_t < 0 or self.t < 0 or self.order < 0:
            raise ConfigurationError(f"negative symbol parameter in {self!r}")
        if self.kind == "abs_power_phi" and self.phi is None:
            raise ConfigurationError("abs_power_phi needs a weight")

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        axi = np.abs(xi)
        if self.kind == "abs_power":
            return _abs_power(axi, self.s)
        if self.kind == "abs_power_phi":
            return _abs_power(axi, self.s) * self.phi(axi)
        if self.kind == "heat":
            return np.exp(-self.nu_t * axi**2)
        if self.kind == "poisson":
            return np.exp(-self.t * axi)
        return (1j * xi) ** self.order

    @property
    def odd(self) -> bool:
        return self.kind == "derivative" and self.order % 2 == 1


def _abs_power(axi, s):
    if s == 0:
        return np.ones_like(axi)
    out = np.zeros_like(axi)
    nz = axi > 0
    out[nz] = axi[nz] ** s
    return out


def abs_power(s):
    return SymbolSpec("abs_power", s=s)


def abs_power_phi(s, phi):
    return SymbolSpec("abs_power_phi", s=s, phi=phi)


def _first_bad(a):
    bad = np.flatnonzero(~np.isfinite(a))
    return int(bad[0]) if bad.size else None


def apply_multiplier(f: Field, sym: SymbolSpec) -> Field:
    c = f.coeffs
    bad = _first_bad(c)
    if bad is not None:
        raise NumericError(f"non-finite spectrum at mode {bad}", index=bad)
    m = sym(f.grid.xi)
    out = c * m
    if np.iscomplexobj(m) or sym.odd:
        if sym.odd:
            out = out.copy()
            out[-1] = 0.0
    return Field.from_coeffs(f.grid, out)


def derivative(f: Field, order: int = 1) -> Field:
    return apply_multiplier(f, SymbolSpec("derivative", order=order))


def shift(f: Field, alpha: float) -> Field:
    """Return ``x -> f(x - alpha)`` by phase modulation."""
    if alpha == 0:
        return f
    if not np.isfinite(alpha):
        raise NumericError(f"non-finite shift {alpha!r}")
    phase = np.exp(-1j * f.grid.xi * alpha)
    return Field.from_coeffs(f.grid, f.coeffs * phase)


def apply_batched(coeffs: np.ndarray, symbols: np.ndarray, n: int) -> np.ndarray:
    """Inverse transform of ``coeffs * symbols`` for a stack of symbols, shape (m, N)."""
    return np.fft.irfft(coeffs[None, :] * symbols * n, n=n, axis=-1)


def hs_sq(f: Field, s: float, weight=None) -> float:
    """Squared Sobolev quantity ``L * sum |xi|^{2s} w(|xi|)^2 |c|^2`` (zero mode excluded for s > 0)."""
    g = f.grid
    p = np.abs(f.coeffs) ** 2 * g.mode_weights
    sym = _abs_power(g.xi, s) ** 2
    if weight is not None:
        sym = sym * np.asarray(weight(g.xi), dtype=float) ** 2
    if s > 0:
        sym[0] = 0.0
    return float(g.length * np.sum(sym * p))


def sobolev_phi_norm(f: Field, s: float, phi=None) -> float:
    """``|| |D|^s phi(|D|) f ||_{L^2}``; ``phi=None`` gives the homogeneous Sobolev norm."""
    if s < 0:
        raise ConfigurationError("s must be non-negative")
    return float(np.sqrt(hs_sq(f, s, phi)))


def l2_norm(f: Field) -> float:
    return float(np.sqrt(f.grid.length * np.sum(np.abs(f.coeffs) ** 2 * f.grid.mode_weights)))


def l2_norm_samples(f: Field) -> float:
    return float(np.sqrt(f.grid.dx * np.sum(f.samples**2)))


def inner(f: Field, g: Field) -> float:
    return float(f.grid.dx * np.dot(f.samples, g.samples))


def refine(f: Field, factor: int) -> np.ndarray:
    """Samples of the trigonometric interpolant on a grid ``factor`` times finer."""
    if factor == 1:
        return np.array(f.samples)
    n = f.grid.n
    c = np.zeros(factor * n // 2 + 1, dtype=complex)
    c[: n // 2 + 1] = f.coeffs
    c[n // 2] *= 0.5
    return np.fft.irfft(c * factor * n, n=factor * n)


def dealias(f: Field) -> Field:
    """2/3-rule truncation: keep modes with ``k <= N/3``."""
    c = np.array(f.coeffs)
    kmax = f.grid.n // 3
    c[kmax + 1:] = 0.0
    return Field.from_coeffs(f.grid, c)


def top_octave_fraction(f: Field) -> float:
    """Fraction of the L^2 spectral mass held by modes with ``k > N/4``."""
    p = np.abs(f.coeffs) ** 2 * f.grid.mode_weights
    total = float(np.sum(p))
    if total == 0:
        return 0.0
    return float(np.sum(p[f.grid.n // 4 + 1:]) / total)


def write_spectrum_csv(f: Field, path) -> None:
    spec = f.spectrum
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "xi", "re", "im"])
        for k, xi, c in zip(f.grid.kmodes, f.grid.wavenumbers, spec):
            w.writerow([int(k), repr(float(xi)), repr(float(c.real)), repr(float(c.imag))])


def read_spectrum_csv(path, length: float) -> Field:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n = len(rows)
    grid = Grid(length, n)
    c = np.zeros(n // 2 + 1, dtype=complex)
    for r in rows:
        k = int(r["k"])
        if k >= 0:
            c[k] = complex(float(r["re"]), float(r["im"]))
    return Field.from_coeffs(grid, c)
