"""Slopes, the cut-off bump and the nonlinear terms of the Muskat equation.

The right-hand side is always evaluated in the split form

    (1/pi) int dx Delta_a f / (1 + (Delta_a f)^2) da = -|D| f + T(f) f,

with ``-|D|`` applied spectrally and only the absolutely convergent
``T(f) g = -(1/pi) int dx Delta_a g * (Delta_a f)^2 / (1 + (Delta_a f)^2) da``
and the cut-off remainder ``R_eps`` computed by quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigurationError
from .quadrature import QuadratureSpec, dyadic_breaks, gauss_panels, image_tail
from .spectral import Field, abs_power, apply_multiplier, dealias as dealias_field, derivative

_CHUNK_ELEMS = 1 << 21

# C^k smoothstep polynomials s(t), s(0)=0, s(1)=1, s(t) + s(1-t) = 1
_SMOOTHSTEP = {
    1: np.polynomial.Polynomial([0, 0, 3, -2]),
    2: np.polynomial.Polynomial([0, 0, 0, 10, -15, 6]),
    3: np.polynomial.Polynomial([0, 0, 0, 0, 35, -84, 70, -20]),
}


@dataclass(frozen=True)
class BumpSpec:
    """Even bump: 1 on ``|y| <= plateau``, smoothstep descent to 0 at ``support``.

    Every smoothstep here is point-symmetric about its midpoint, so the descent
    contributes half its width to the mass and ``int chi = 1`` forces
    ``support = 1 - plateau``.
    """

    plateau: float = 0.25
    order: int = 2
    eta_max: float = 400.0
    eta_step: float = 0.05

    def __post_init__(self):
        if self.order not in _SMOOTHSTEP:
            raise ConfigurationError(f"smoothstep order must be one of {sorted(_SMOOTHSTEP)}")
        if not 0 < self.plateau < 0.5:
            raise ConfigurationError("plateau must lie in (0, 1/2)")

    @property
    def support(self) -> float:
        return 1.0 - self.plateau

    @property
    def normalization(self) -> float:
        return self.plateau + self.support

    def as_dict(self):
        return dict(asdict(self), support=self.support)


def bump_chi(y, spec: BumpSpec = BumpSpec()):
    ay = np.abs(np.asarray(y, dtype=float))
    t = np.clip((ay - spec.plateau) / (spec.support - spec.plateau), 0.0, 1.0)
    return 1.0 - _SMOOTHSTEP[spec.order](t)


@lru_cache(maxsize=8)
def _chi_hat_table(spec: BumpSpec):
    eta = np.arange(0.0, spec.eta_max + spec.eta_step / 2, spec.eta_step)
    width = spec.support - spec.plateau
    n_panels = max(16, int(np.ceil(spec.eta_max * width / np.pi)))
    y, w = gauss_panels(np.linspace(spec.plateau, spec.support, n_panels + 1), 16)
    vals = bump_chi(y, spec)
    out = np.empty_like(eta)
    for s in range(0, eta.size, 512):
        e = eta[s:s + 512]
        out[s:s + 512] = np.cos(np.outer(e, y)) @ (w * vals)
    plateau_part = np.where(eta > 0, np.sin(eta * spec.plateau) / np.where(eta > 0, eta, 1.0),
                            spec.plateau)
    table = 2 * (plateau_part + out)
    return eta, CubicSpline(eta, table)


def chi_hat(eta, spec: BumpSpec = BumpSpec()):
    """Fourier transform ``int chi(y) exp(-i y eta) dy`` (real, even).

    Tabulated once per bump; zero beyond ``eta_max`` where ``|chi_hat| < 1e-7``.
    Values are clipped to ``[-1, 1]`` so that mollification never amplifies a mode.
    """
    eta = np.abs(np.asarray(eta, dtype=float))
    grid, spline = _chi_hat_table(spec)
    out = np.where(eta <= grid[-1], spline(np.minimum(eta, grid[-1])), 0.0)
    return np.clip(out, -1.0, 1.0)


def mollify_initial(f0: Field, eps: float, bump: BumpSpec = BumpSpec()) -> Field:
    """``f0 * chi_eps`` computed as ``c_k * chi_hat(eps xi_k)``."""
    if not 0 < eps <= 1:
        raise ConfigurationError(f"eps must lie in (0, 1], got {eps!r}")
    return Field.from_coeffs(f0.grid, f0.coeffs * chi_hat(eps * f0.grid.xi, bump))


@dataclass(frozen=True)
class RegularizationParams:
    """``eps=None`` switches regularization off (the exact equation)."""

    eps: float | None = None
    beta: float = 0.25
    bump: BumpSpec = field(default_factory=BumpSpec)

    def __post_init__(self):
        if self.eps is not None and not 0 < self.eps < 1:
            raise ConfigurationError(f"eps must lie in (0, 1) (eps = 1 has infinite viscosity), got {self.eps!r}")
        if not 0 < self.beta < 0.5:
            raise ConfigurationError(f"beta must lie in (0, 1/2), got {self.beta!r}")

    @property
    def nu(self) -> float:
        return 0.0 if self.eps is None else 1.0 / abs(np.log(self.eps))

    @property
    def active(self) -> bool:
        return self.eps is not None

    def as_dict(self):
        return {"eps": self.eps, "nu": self.nu, "beta": self.beta, "bump": self.bump.as_dict()}


def _diff_symbol(xi, alpha):
    """Symbol of ``g -> g - g(. - alpha)``, in a form without cancellation at small alpha."""
    h = 0.5 * np.outer(alpha, xi)
    return 2j * np.sin(h) * np.exp(-1j * h)


class _Diffs:
    """Batched periodic differences of a field and its derivative."""

    def __init__(self, f: Field):
        self.grid = f.grid
        self.c = np.asarray(f.coeffs)
        xi = f.grid.xi
        self.cx = self.c * (1j * xi)
        self.cx[-1] = 0.0

    def of(self, c, alpha):
        sym = _diff_symbol(self.grid.xi, alpha)
        return np.fft.irfft(c[None, :] * sym * self.grid.n, n=self.grid.n, axis=-1)


def slope_field(f: Field, alpha: float) -> Field:
    """``Delta_a f = (f(x) - f(x - a)) / a``."""
    if alpha == 0:
        raise ConfigurationError("slope undefined at alpha = 0; use the derivative")
    d = _Diffs(f).of(np.asarray(f.coeffs), np.array([alpha]))[0]
    return Field(f.grid, d / alpha)


def _chunks(n_nodes, n):
    size = max(1, _CHUNK_ELEMS // max(n, 1))
    for s in range(0, n_nodes, size):
        yield slice(s, min(s + size, n_nodes))


def weight_fn(u):
    u2 = u * u
    return u2 / (1.0 + u2)


def _t_integrand(dg, df, s, quad: QuadratureSpec):
    """Image-summed ``(dg/s) w(df/s)`` for signed nodes ``s`` (column vector)."""
    L = quad.period
    acc = np.zeros_like(dg)
    for k in range(-quad.images, quad.images + 1):
        sk = s + k * L
        acc += (dg / sk) * weight_fn(df / sk)
    if quad.images:
        df2 = df * df
        acc += dg * df2 * image_tail(3, s, L, quad.images, -1)
        acc -= dg * df2 * df2 * image_tail(5, s, L, quad.images, -1)
    return acc


def apply_T(f: Field, g: Field, quad: QuadratureSpec) -> Field:
    """``T(f) g``, summed over ``+a/-a`` node pairs in order of increasing ``|a|``."""
    quad.require_symmetric()
    if f.grid != g.grid:
        raise ConfigurationError("fields live on different grids")
    a, w = quad.half_rule
    dfs, dgs = _Diffs(f), _Diffs(g)
    total = np.zeros(f.grid.n)
    for sl in _chunks(a.size, f.grid.n):
        ac, wc = a[sl], w[sl]
        pair = np.zeros((ac.size, f.grid.n))
        for sign in (1.0, -1.0):
            s = (sign * ac)[:, None]
            df = dfs.of(dfs.c, sign * ac)
            dg = dgs.of(dgs.cx, sign * ac)
            pair += _t_integrand(dg, df, s, quad)
        total += wc @ pair
    return Field(f.grid, -total / np.pi)


def r_eps_rule(eps: float, quad: QuadratureSpec, bump: BumpSpec):
    top = eps * bump.support
    if top >= quad.period / 2:
        raise ConfigurationError("cut-off support exceeds half the period")
    breaks = dyadic_breaks(quad.delta0, top, extra=(eps * bump.plateau,))
    return gauss_panels(breaks, quad.gauss_order, quad.max_panel_width)


def apply_R_eps(f: Field, eps: float, quad: QuadratureSpec, bump: BumpSpec = BumpSpec()) -> Field:
    """``R_eps(f) = -(1/pi) int dx Delta_a f / (1 + (Delta_a f)^2) chi(a/eps) da`` over ``|a| <= eps*support``."""
    if not 0 < eps <= 1:
        raise ConfigurationError(f"eps must lie in (0, 1], got {eps!r}")
    quad.require_symmetric()
    a, w = r_eps_rule(eps, quad, bump)
    w = w * bump_chi(a / eps, bump)
    d = _Diffs(f)
    total = np.zeros(f.grid.n)
    for sl in _chunks(a.size, f.grid.n):
        ac, wc = a[sl], w[sl]
        pair = np.zeros((ac.size, f.grid.n))
        for sign in (1.0, -1.0):
            s = (sign * ac)[:, None]
            u = d.of(d.c, sign * ac) / s
            pair += (d.of(d.cx, sign * ac) / s) / (1.0 + u * u)
        total += wc @ pair
    return Field(f.grid, -total / np.pi)


def principal_coefficient(f: Field) -> Field:
    """``f_x^2 / (1 + f_x^2)``, the coefficient of ``|D|`` in the paralinearized ``T(f)``."""
    fx = derivative(f).samples
    return Field(f.grid, fx**2 / (1 + fx**2))


def rhs_full(f: Field, quad: QuadratureSpec, dealias: bool = True) -> Field:
    """``-|D| f + T(f) f``; the linear part is never computed by quadrature."""
    t = apply_T(f, f, quad)
    if dealias:
        t = dealias_field(t)
    return t - apply_multiplier(f, abs_power(1))


def nonlinear_part(f: Field, params: RegularizationParams, quad: QuadratureSpec,
                   dealias: bool = True) -> Field:
    """``T(f) f + R_eps(f)``: everything not in the implicit linear symbol."""
    g = apply_T(f, f, quad)
    if params.active:
        g = g + apply_R_eps(f, params.eps, quad, params.bump)
    return dealias_field(g) if dealias else g


def rhs_regularized(f: Field, params: RegularizationParams, quad: QuadratureSpec,
                    dealias: bool = True) -> Field:
    """``nu f_xx - |D| f + T(f) f + R_eps(f)``."""
    out = nonlinear_part(f, params, quad, dealias) - apply_multiplier(f, abs_power(1))
    if params.active:
        out = out + params.nu * derivative(f, 2)
    return out


def linear_integral(f: Field, quad: QuadratureSpec) -> Field:
    """``(1/pi) int_{|a|<=A} dx Delta_a f da`` by node-wise quadrature (no images)."""
    quad.require_symmetric()
    a, w = quad.half_rule
    d = _Diffs(f)
    total = np.zeros(f.grid.n)
    for sl in _chunks(a.size, f.grid.n):
        ac, wc = a[sl], w[sl]
        pair = d.of(d.cx, ac) / ac[:, None] - d.of(d.cx, -ac) / ac[:, None]
        total += wc @ pair
    return Field(f.grid, total / np.pi)


def direct_full_integral(f: Field, quad: QuadratureSpec) -> Field:
    """``(1/pi) int_{|a|<=A} dx Delta_a f / (1 + (Delta_a f)^2) da``, truncated, no split."""
    quad.require_symmetric()
    a, w = quad.half_rule
    d = _Diffs(f)
    total = np.zeros(f.grid.n)
    for sl in _chunks(a.size, f.grid.n):
        ac, wc = a[sl], w[sl]
        pair = np.zeros((ac.size, f.grid.n))
        for sign in (1.0, -1.0):
            s = (sign * ac)[:, None]
            u = d.of(d.c, sign * ac) / s
            pair += (d.of(d.cx, sign * ac) / s) / (1 + u * u)
        total += wc @ pair
    return Field(f.grid, total / np.pi)


def log_remainder(f: Field, quad: QuadratureSpec) -> float:
    """``iint [log sqrt(1 + u^2) - u^2/2] dx da`` with ``u = Delta_a f`` (images included)."""
    quad.require_symmetric()
    a, w = quad.half_rule
    d = _Diffs(f)
    L = quad.period
    total = 0.0
    for sl in _chunks(a.size, f.grid.n):
        ac, wc = a[sl], w[sl]
        per_node = np.zeros(ac.size)
        for sign in (1.0, -1.0):
            s = (sign * ac)[:, None]
            df = d.of(d.c, sign * ac)
            acc = np.zeros_like(df)
            for k in range(-quad.images, quad.images + 1):
                u2 = (df / (s + k * L)) ** 2
                acc += 0.5 * np.log1p(u2) - 0.5 * u2
            if quad.images:
                d4 = df**4
                acc += -0.25 * d4 * image_tail(4, s, L, quad.images, 1)
                acc += d4 * df * df / 6.0 * image_tail(6, s, L, quad.images, 1)
            per_node += acc.sum(axis=1) * f.grid.dx
        total += float(wc @ per_node)
    return total
