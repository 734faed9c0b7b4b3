"""Norms and energy functionals evaluated on fields.

Sup-norms are taken on a 4x Fourier-refined grid. All sums run in a fixed
order, so every quantity is a deterministic function of the samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import ConstantSet
from .errors import ConfigurationError
from .phi import PhiWeight
from .quadrature import QuadratureSpec, gauss_panels, dyadic_breaks
from .rhs import log_remainder
from .spectral import Field, hs_sq, l2_norm, refine, derivative

HS_ORDERS = (0.5, 1.0, 1.5, 1.75, 19 / 12, 2.0, 2.5)
REFINE = 4

CSV_COLUMNS = ("t", "L2", "lip", "H32", "H2", "A_phi", "B_phi", "P_phi", "mu_phi", "Q",
               "besov", "holder", "logE", "dt", "status")


def hs_norm(f: Field, s: float, phi=None) -> float:
    return float(np.sqrt(hs_sq(f, s, phi)))


def h_inhom_norm(f: Field, s: float) -> float:
    """``(L sum (1 + xi^2)^s |c|^2)^{1/2}``."""
    g = f.grid
    return float(np.sqrt(g.length * np.sum((1 + g.xi**2) ** s * g.mode_weights * np.abs(f.coeffs) ** 2)))


def _polish(c, weights, xi, x0, h):
    """Newton steps on ``u' = 0`` for the trigonometric interpolant, kept within one cell of ``x0``."""
    x = x0
    for _ in range(8):
        e = np.exp(1j * xi * x) * weights * c
        d1 = float(np.real(np.sum(1j * xi * e)))
        d2 = float(np.real(np.sum(-(xi**2) * e)))
        if d2 == 0:
            break
        step = d1 / d2
        x_new = x - step
        if abs(x_new - x0) > h:
            return x0
        x = x_new
        if abs(step) < 1e-15 * max(1.0, abs(x)):
            break
    return x


def sup_norm(f: Field, factor: int = REFINE, candidates: int = 4) -> float:
    """``max |f|``: best of a ``factor``-refined sample and Newton-polished local peaks."""
    fine = np.abs(refine(f, factor))
    best = float(np.max(fine))
    if best == 0:
        return 0.0
    g = f.grid
    c = np.asarray(f.coeffs)
    w = g.mode_weights
    h = g.dx / factor
    peaks = np.flatnonzero((fine >= np.roll(fine, 1)) & (fine >= np.roll(fine, -1)))
    for i in peaks[np.argsort(fine[peaks])[::-1][:candidates]]:
        x = _polish(c, w, g.xi, i * h, h)
        val = abs(float(np.real(np.sum(w * c * np.exp(1j * g.xi * x)))))
        best = max(best, val)
    return best


def lipschitz_seminorm(f: Field, factor: int = REFINE) -> float:
    """``max |f_x|`` from a grid ``factor`` times finer, with the largest peaks polished."""
    return sup_norm(derivative(f), factor)


def mu_from(a: float, b: float, phi: PhiWeight) -> float:
    if a <= 0:
        return float(1.0 / phi(np.array([0.0]))[0])
    return float(1.0 / phi(np.array([b / a]))[0])


def energies(f: Field, phi: PhiWeight):
    """``(A, B, P, mu)``: squared phi-weighted norms of orders 3/2, 2, 5/2 and ``1/phi(B/A)``."""
    a = hs_sq(f, 1.5, phi)
    b = hs_sq(f, 2.0, phi)
    p = hs_sq(f, 2.5, phi)
    return a, b, p, mu_from(a, b, phi)


def q_functional(f: Field, phi: PhiWeight) -> float:
    h2 = hs_norm(f, 2.0)
    h74 = hs_norm(f, 1.75)
    term1 = (h2 + h74**2) * hs_norm(f, 1.5, phi)
    term2 = hs_norm(f, 1.75, phi) * h_inhom_norm(f, 1.75)
    term3 = (h_inhom_norm(f, 19 / 12) ** 1.5 + h74**0.5) * hs_norm(f, 1.75, phi.squared()) ** 0.5 * h74
    return float(term1 + term2 + term3)


def besov_half_sq(f: Field, quad: QuadratureSpec) -> float:
    """``int ||f_x - f_x(. - a)||_inf^2 da / a^2`` over the line.

    The difference is L-periodic in ``a``, so the line integral is the integral
    over one period against the periodized kernel ``(pi/L)^2 / sin^2(pi a/L)``.
    """
    quad.require_symmetric()
    L = quad.period
    a, w = gauss_panels(dyadic_breaks(quad.delta0, L / 2), quad.gauss_order, quad.max_panel_width)
    fx = derivative(f)
    n = f.grid.n * REFINE
    c = np.zeros(n // 2 + 1, dtype=complex)
    c[: f.grid.n // 2 + 1] = fx.coeffs
    xi = 2 * np.pi * np.arange(c.size) / L
    kernel = (np.pi / L) ** 2 / np.sin(np.pi * a / L) ** 2
    total = 0.0
    step = max(1, (1 << 21) // n)
    for s in range(0, a.size, step):
        ac = a[s:s + step]
        h = 0.5 * np.outer(ac, xi)
        d = np.fft.irfft(c[None, :] * 2j * np.sin(h) * np.exp(-1j * h) * n, n=n, axis=-1)
        sup2 = np.max(np.abs(d), axis=1) ** 2
        # the sup-norm of the difference is even in a, so each node counts twice
        total += float(np.dot(w[s:s + step] * kernel[s:s + step], 2 * sup2))
    return total


def holder_shifts(f: Field, ratio: float = 2 ** 0.125):
    return np.geomspace(f.grid.dx / 4, f.grid.length / 2,
                        int(np.ceil(np.log(2 * f.grid.n) / np.log(ratio))) + 1)


def holder_c2beta(f: Field, beta: float) -> float:
    """``sup_a ||f_xx - f_xx(. - a)||_inf / a^beta`` over a geometric shift grid in ``[dx/4, L/2]``.

    Shifts beyond ``L/2`` repeat smaller ones with a larger denominator, so the
    range is complete on the torus.
    """
    if not 0 < beta < 0.5:
        raise ConfigurationError(f"beta must lie in (0, 1/2), got {beta!r}")
    fxx = derivative(f, 2)
    n = f.grid.n * REFINE
    c = np.zeros(n // 2 + 1, dtype=complex)
    c[: f.grid.n // 2 + 1] = fxx.coeffs
    c[f.grid.n // 2] *= 0.5
    xi = 2 * np.pi * np.arange(c.size) / f.grid.length
    alphas = holder_shifts(f)
    h = 0.5 * np.outer(alphas, xi)
    d = np.fft.irfft(c[None, :] * 2j * np.sin(h) * np.exp(-1j * h) * n, n=n, axis=-1)
    return float(np.max(np.max(np.abs(d), axis=1) / alphas**beta))


def log_energy(f: Field, quad: QuadratureSpec) -> float:
    """``iint log sqrt(1 + (Delta_a f)^2) dx da``.

    The quadratic part equals ``pi ||f||_{H^{1/2}}^2`` exactly and is taken
    spectrally; only the quartic-and-higher remainder uses quadrature.
    """
    return float(np.pi * hs_sq(f, 0.5) + log_remainder(f, quad))


def smallness_margin(f0: Field, constants: ConstantSet) -> float:
    """``1 - 2 (K + c0/c1)^{1/2} (2 + lip)^2 ||f0||_{H^{3/2}}``; positive iff the small-data hypothesis holds."""
    lip = lipschitz_seminorm(f0)
    return float(1 - 2 * np.sqrt(constants.k + constants.c0 / constants.c1) * (2 + lip) ** 2
                 * hs_norm(f0, 1.5))


@dataclass(frozen=True)
class EnergyReport:
    t: float
    l2: float
    lip: float
    hs: dict
    a_phi: float
    b_phi: float
    p_phi: float
    mu_phi: float
    q_functional: float
    besov_half_sq: float
    holder_c2beta: float
    log_energy: float
    smallness_margin: float
    dt: float = 0.0
    status: str = "running"

    def row(self):
        vals = (self.t, self.l2, self.lip, self.hs[1.5], self.hs[2.0], self.a_phi, self.b_phi,
                self.p_phi, self.mu_phi, self.q_functional, self.besov_half_sq,
                self.holder_c2beta, self.log_energy, self.dt)
        return [repr(float(v)) for v in vals] + [self.status]

    def is_finite(self) -> bool:
        vals = [self.l2, self.lip, self.a_phi, self.b_phi, self.p_phi, self.mu_phi,
                self.q_functional, self.besov_half_sq, self.holder_c2beta, self.log_energy,
                *self.hs.values()]
        return bool(np.all(np.isfinite(vals)))


@dataclass(frozen=True)
class ReportSettings:
    """Which optional (quadrature-based) entries to compute; disabled ones are reported as NaN."""

    beta: float = 0.25
    besov: bool = True
    holder: bool = True
    log_energy: bool = True
    constants: ConstantSet = field(default_factory=ConstantSet)


def make_report(f: Field, phi: PhiWeight, quad: QuadratureSpec, t: float = 0.0, dt: float = 0.0,
                status: str = "running", settings: ReportSettings = ReportSettings()) -> EnergyReport:
    a, b, p, mu = energies(f, phi)
    nan = float("nan")
    return EnergyReport(
        t=float(t),
        l2=l2_norm(f),
        lip=lipschitz_seminorm(f),
        hs={s: hs_norm(f, s) for s in HS_ORDERS},
        a_phi=a, b_phi=b, p_phi=p, mu_phi=mu,
        q_functional=q_functional(f, phi),
        besov_half_sq=besov_half_sq(f, quad) if settings.besov else nan,
        holder_c2beta=holder_c2beta(f, settings.beta) if settings.holder else nan,
        log_energy=log_energy(f, quad) if settings.log_energy else nan,
        smallness_margin=smallness_margin(f, settings.constants),
        dt=float(dt),
        status=status,
    )
