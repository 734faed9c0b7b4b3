"""Named check suites driven by a run config.

Each suite mixes fixed reference problems (sized to finish in about a minute)
with the config's own grid and data where the check applies to arbitrary data.
Per-check tolerances can be overridden through ``verify.tolerances``.
"""

from __future__ import annotations

import numpy as np

from . import verify as V
from .config import RunConfig
from .data import gaussian_bump, power_law, random_bandlimited, scale_to_norm, single_mode
from .functionals import ReportSettings
from .phi import make_log_phi, one_phi
from .quadrature import make_quadrature
from .rhs import RegularizationParams
from .spectral import Field, Grid
from .stepper import evolve

SUITES = ("identities", "inequalities", "convergence", "all")


def _tol(cfg: RunConfig, name: str, default: float) -> float:
    return float(cfg.verify.tolerances.get(name, default))


def identities(cfg: RunConfig):
    out = []
    g = Grid(64 * np.pi, 4096)
    f = Field.from_function(g, lambda x: np.sin(3 * x))
    out.append(V.check_linear_identity(f, [g.length / 8, g.length / 4, g.length / 2],
                                       _tol(cfg, "linear_identity", 2e-2)))
    grid = cfg.make_grid()
    f0 = cfg.make_data()
    t_end = min(cfg.stepper.T_end, 0.1)
    cadence = min(cfg.stepper.cadence, t_end / 10)
    traj = evolve(f0, t_end, RegularizationParams(), make_quadrature(grid), cadence,
                  config=cfg.make_stepper(), settings=ReportSettings(besov=False, holder=False))
    out.append(V.check_l2_dissipation(traj, _tol(cfg, "l2_dissipation", 1e-4)))
    gs = Grid(grid.length, 64)
    bump = scale_to_norm(gaussian_bump(gs, 1.0, 0.6 * grid.length / (2 * np.pi)), 1.5, 0.05)
    out.append(V.check_scaling(bump, 2, 0.25, 0.05, tol=_tol(cfg, "scaling", 1e-3)))
    return out


def calibration_corpus(n_runs: int = 10, n: int = 128, eps: float = 1e-2, seed: int = 0):
    g = Grid(2 * np.pi, n)
    q = make_quadrature(g)
    rng = np.random.default_rng(seed)
    settings = ReportSettings(besov=False, log_energy=False)
    runs = []
    for _ in range(n_runs):
        f = scale_to_norm(random_bandlimited(g, 8, rng, 1.0, 1.0), 1.5, 0.05)
        runs.append(evolve(f, 0.5, RegularizationParams(eps), q, 0.05, settings=settings))
    return runs


def inequalities(cfg: RunConfig):
    out = []
    consts = V.calibrate_constants(calibration_corpus())
    grid = cfg.make_grid()
    q = make_quadrature(grid)
    f0 = cfg.make_data()
    params = cfg.make_params()
    settings = ReportSettings(cfg.regularization.beta, besov=False, log_energy=False)
    traj = evolve(f0, cfg.stepper.T_end, params, q, cfg.stepper.cadence, phi=cfg.make_phi(f0),
                  config=cfg.make_stepper(), settings=settings)
    out.append(V.check_lipschitz_budget(traj, cfg.regularization.beta, consts))
    out.append(V.check_energy_inequality(traj, consts))
    small = scale_to_norm(single_mode(grid, 1.0), 1.5, 0.05)
    t_small = evolve(small, 1.0, RegularizationParams(), q, 0.05, phi=one_phi(),
                     settings=ReportSettings(besov=False, holder=False, log_energy=False),
                     snapshots=True)
    out.append(V.check_small_data_decay(t_small, small, consts))
    rng = np.random.default_rng(cfg.data.seed)
    gi = Grid(2 * np.pi, 128)

    def corpus(m):
        return [random_bandlimited(gi, int(rng.integers(1, 40)), rng, 1.0, rng.uniform(0, 3))
                for _ in range(m)]

    out.append(V.check_interpolation(corpus(200), corpus(200), make_log_phi(1.0),
                                     _tol(cfg, "interpolation", 1.1)))
    pert = f0 + Field.from_function(grid, lambda x: 1e-4 * np.sin(4 * np.pi * x / grid.length))
    out.append(V.check_contraction(f0, pert, min(cfg.stepper.T_end, 0.5), cfg.stepper.cadence,
                                   _tol(cfg, "contraction_m_bound", 10.0), q))
    return out


def convergence(cfg: RunConfig):
    out = []
    grid = cfg.make_grid()
    out.append(V.eps_convergence(cfg.make_data(), [0.1, 0.05, 0.025, 0.0125], 1.0, 0.1,
                                 make_quadrature(grid), min_rate=_tol(cfg, "eps_convergence", 0.4)))
    gr = Grid(2 * np.pi, 2**15)
    rng = np.random.default_rng(cfg.data.seed)
    fields = [power_law(gr, 2.0, rng, 0.05) for _ in range(2)]
    out.append(V.check_r_eps_scaling(fields, [1e-1, 1e-2, 1e-3], _tol(cfg, "r_eps_scaling", 4.0)))
    return out


def run_suite(name: str, cfg: RunConfig):
    if name == "identities":
        return identities(cfg)
    if name == "inequalities":
        return inequalities(cfg)
    if name == "convergence":
        return convergence(cfg)
    if name == "all":
        return identities(cfg) + inequalities(cfg) + convergence(cfg)
    raise KeyError(name)
