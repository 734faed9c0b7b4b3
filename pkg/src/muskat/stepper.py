"""Second-order exponential time differencing with step-doubling control.

The stiff linear symbol ``sigma(xi) = nu xi^2 + |xi|`` is integrated exactly;
the nonlinearity ``T(f) f + R_eps(f)`` is treated explicitly with the
Cox-Matthews ETD2RK predictor/corrector pair.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import ConstantSet
from .errors import ConfigurationError
from .functionals import (CSV_COLUMNS, EnergyReport, ReportSettings, energies,
                          lipschitz_seminorm, make_report)
from .phi import PhiWeight, one_phi
from .quadrature import QuadratureSpec
from .rhs import RegularizationParams, mollify_initial, nonlinear_part
from .spectral import Field, top_octave_fraction

RUNNING, FINISHED, HALTED_BLOWUP, HALTED_RESOLUTION = (
    "running", "finished", "halted_blowup", "halted_resolution")


@dataclass(frozen=True)
class StepperConfig:
    dt0: float = 1e-3
    tol: float = 1e-8
    dt_min: float = 1e-12
    dt_max: float = 0.05
    grow: float = 1.2
    slope_max: float = 50.0
    tail_max: float = 1e-3
    dealias: bool = True

    def __post_init__(self):
        if not 0 < self.dt_min <= self.dt0 <= self.dt_max:
            raise ConfigurationError("need 0 < dt_min <= dt0 <= dt_max")
        if self.tol <= 0 or self.grow <= 1:
            raise ConfigurationError("tol must be positive and grow > 1")
        if self.slope_max <= 0 or not 0 < self.tail_max < 1:
            raise ConfigurationError("guard thresholds out of range")


@dataclass(frozen=True, eq=False)
class SolverState:
    t: float
    f: Field
    params: RegularizationParams
    dt: float
    step_count: int = 0
    status: str = RUNNING
    message: str = ""

    def halted(self, status: str, message: str) -> "SolverState":
        if self.status != RUNNING:
            return self
        return replace(self, status=status, message=message)


def _phi_functions(z):
    """``phi1 = (e^z - 1)/z`` and ``phi2 = (e^z - 1 - z)/z^2`` with series near 0."""
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    em1 = np.expm1(zs)
    p1 = np.where(small, 1 + z / 2 + z * z / 6 + z**3 / 24, em1 / zs)
    p2 = np.where(small, 0.5 + z / 6 + z * z / 24 + z**3 / 120, (em1 - zs) / zs**2)
    return p1, p2


class _Propagator:
    """Caches the exponential and phi-function multipliers per step size."""

    def __init__(self, grid, nu):
        self.sigma = nu * grid.xi**2 + grid.xi
        self._cache = {}

    def __call__(self, dt):
        m = self._cache.get(dt)
        if m is None:
            z = -self.sigma * dt
            p1, p2 = _phi_functions(z)
            m = (np.exp(z), dt * p1, dt * p2)
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[dt] = m
        return m


def _nl_coeffs(f: Field, params, quad, dealias):
    return np.asarray(nonlinear_part(f, params, quad, dealias).coeffs)


def _etd2rk(c, n_c, grid, dt, prop, params, quad, dealias):
    e, p1, p2 = prop(dt)
    a = e * c + p1 * n_c
    fa = Field.from_coeffs(grid, a)
    n_a = _nl_coeffs(fa, params, quad, dealias)
    return a + p2 * (n_a - n_c)


def step_etd(state: SolverState, quad: QuadratureSpec, dt: float | None = None,
             dealias: bool = True) -> SolverState:
    """One fixed ETD2RK step of size ``dt`` (default ``state.dt``); no error control."""
    if state.status != RUNNING:
        return state
    dt = state.dt if dt is None else dt
    if dt < 0:
        raise ConfigurationError("dt must be non-negative")
    if dt == 0:
        return state
    g = state.f.grid
    c = np.asarray(state.f.coeffs)
    prop = _Propagator(g, state.params.nu)
    n_c = _nl_coeffs(state.f, state.params, quad, dealias)
    new = _etd2rk(c, n_c, g, dt, prop, state.params, quad, dealias)
    if not np.all(np.isfinite(new)):
        return state.halted(HALTED_RESOLUTION, f"non-finite update at t={state.t!r}")
    return replace(state, t=state.t + dt, f=Field.from_coeffs(g, new), step_count=state.step_count + 1)


def blowup_guard(state: SolverState, config: StepperConfig = StepperConfig()) -> str:
    if state.status != RUNNING:
        return state.status
    if not state.f.is_finite():
        return HALTED_RESOLUTION
    if lipschitz_seminorm(state.f) > config.slope_max:
        return HALTED_BLOWUP
    if top_octave_fraction(state.f) > config.tail_max:
        return HALTED_RESOLUTION
    return RUNNING


@dataclass
class Trajectory:
    reports: list
    status: str
    message: str = ""
    snapshots: list = field(default_factory=list)
    params: RegularizationParams | None = None
    steps: int = 0
    final: Field | None = None

    @property
    def times(self):
        return np.array([r.t for r in self.reports])

    def column(self, name: str):
        return np.array([getattr(r, name) for r in self.reports])

    def hs(self, s: float):
        return np.array([r.hs[s] for r in self.reports])

    def field_at(self, t: float) -> Field:
        for ts, f in self.snapshots:
            if ts == t:
                return f
        raise KeyError(t)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in self.reports:
                w.writerow(r.row())


def report_times(t_end: float, cadence: float):
    if cadence <= 0:
        raise ConfigurationError("cadence must be positive")
    k = int(np.floor(t_end / cadence + 1e-9))
    ts = [i * cadence for i in range(k + 1)]
    if t_end - ts[-1] > 1e-12 * max(1.0, t_end):
        ts.append(t_end)
    else:
        ts[-1] = t_end
    return ts


def evolve(f0: Field, t_end: float, params: RegularizationParams, quad: QuadratureSpec,
           cadence: float, phi: PhiWeight | None = None, config: StepperConfig = StepperConfig(),
           settings: ReportSettings = ReportSettings(), snapshots: bool = False,
           mollify: bool = True) -> Trajectory:
    """Adaptive ETD2RK run from ``f0`` to ``t_end`` with reports at multiples of ``cadence``.

    With regularization active and ``mollify`` set, the data are first
    convolved with the scaled bump. Steps are accepted when the relative L2
    gap between one full step and two half steps is at most ``config.tol``;
    the two-half-step result is kept.
    """
    if t_end <= 0:
        raise ConfigurationError("t_end must be positive")
    phi = phi or one_phi()
    if params.active and mollify:
        f0 = mollify_initial(f0, params.eps, params.bump)
    g = f0.grid
    prop = _Propagator(g, params.nu)
    dl = config.dealias
    state = SolverState(0.0, f0, params, config.dt0)
    targets = report_times(t_end, cadence)
    traj = Trajectory([], RUNNING, params=params)

    def record(st, status):
        traj.reports.append(make_report(st.f, phi, quad, st.t, st.dt, status, settings))
        if snapshots:
            traj.snapshots.append((st.t, st.f))

    status = blowup_guard(state, config)
    if status != RUNNING:
        state = state.halted(status, "initial data rejected by guard")
    record(state, state.status)
    dt = config.dt0
    for target in targets[1:] if state.status == RUNNING else []:
        while state.status == RUNNING and state.t < target:
            h = min(dt, target - state.t)
            c = np.asarray(state.f.coeffs)
            n_c = _nl_coeffs(state.f, params, quad, dl)
            full = _etd2rk(c, n_c, g, h, prop, params, quad, dl)
            half = _etd2rk(c, n_c, g, h / 2, prop, params, quad, dl)
            fh = Field.from_coeffs(g, half)
            half = _etd2rk(half, _nl_coeffs(fh, params, quad, dl), g, h / 2, prop, params, quad, dl)
            if not (np.all(np.isfinite(full)) and np.all(np.isfinite(half))):
                err = np.inf
            else:
                scale = np.sqrt(np.sum(g.mode_weights * np.abs(half) ** 2))
                diff = np.sqrt(np.sum(g.mode_weights * np.abs(full - half) ** 2))
                err = 0.0 if diff == 0 else diff / max(scale, 1e-300)
            if err <= config.tol:
                t_new = target if h == target - state.t else state.t + h
                state = replace(state, t=t_new, f=Field.from_coeffs(g, half), dt=h,
                                step_count=state.step_count + 1)
                if h == dt:  # steps clipped to land on a report time do not grow dt
                    dt = min(dt * config.grow, config.dt_max)
                status = blowup_guard(state, config)
                if status != RUNNING:
                    state = state.halted(status, f"guard tripped at t={state.t!r}")
            else:
                dt = h / 2
                if dt < config.dt_min:
                    state = state.halted(HALTED_RESOLUTION, f"step size below {config.dt_min} at t={state.t!r}")
        if state.status != RUNNING:
            record(state, state.status)
            break
        record(state, FINISHED if target == targets[-1] else RUNNING)
    traj.status = FINISHED if state.status == RUNNING else state.status
    traj.message = state.message
    traj.steps = state.step_count
    traj.final = state.f
    return traj


def horizon_envelope(r: float, m: float, phi: PhiWeight, constants: ConstantSet, anchor: float,
                     per_decade: int = 64, decades: int = 12) -> float:
    """Grid supremum of ``c2 (sqrt r + r) rho / phi(rho/r) - (c1/2) rho/m``; ``inf`` if still rising at the top."""
    rho = anchor * np.logspace(0, decades, per_decade * decades + 1)
    vals = constants.c2 * (np.sqrt(r) + r) * rho / phi(rho / r) - 0.5 * constants.c1 * rho / m
    i = int(np.argmax(vals))
    if i == vals.size - 1 and vals[-1] > vals[-2]:
        return float("inf")
    return float(max(vals[i], 0.0))


def local_time_horizon(f0: Field, phi: PhiWeight, constants: ConstantSet) -> float:
    """``A(0) / (4 E(4 A(0), (2 + lip)^2))``; 0 when the envelope is unbounded, ``inf`` for zero data."""
    a0 = energies(f0, phi)[0]
    if a0 == 0:
        return float("inf")
    m = (2 + lipschitz_seminorm(f0)) ** 2
    env = horizon_envelope(4 * a0, m, phi, constants, anchor=a0)
    if not np.isfinite(env):
        return 0.0
    if env == 0:
        return float("inf")
    return float(a0 / (4 * env))
