"""Executable checks of identities, inequalities and convergence, plus constant fitting.

Inequality checks follow a two-phase pattern: constants are fitted on one
corpus and asserted on another. A check whose hypothesis fails at runtime is
marked ``vacuous`` and never counts as a pass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .constants import ConstantSet
from .errors import ConfigurationError
from .functionals import ReportSettings, energies, hs_norm, lipschitz_seminorm, h_inhom_norm
from .phi import PhiWeight, one_phi
from .quadrature import QuadratureSpec, make_quadrature
from .rhs import RegularizationParams, apply_T, linear_integral
from .spectral import Field, Grid, abs_power, apply_multiplier, derivative, hs_sq, l2_norm
from .stepper import FINISHED, Trajectory, evolve

PASS, FAIL, VACUOUS = "pass", "fail", "vacuous"


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class CheckResult:
    name: str
    status: str
    measured: dict
    tolerance: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def as_dict(self):
        return _jsonable({"name": self.name, "status": self.status, "measured": self.measured,
                          "tolerance": self.tolerance, "constants": self.constants,
                          "artifacts": self.artifacts, "note": self.note})

    def line(self) -> str:
        return f"[{self.status.upper():7s}] {self.name}: {self.note}"


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def write_report(results, json_path, text_path=None) -> None:
    with open(json_path, "w") as fh:
        json.dump([r.as_dict() for r in results], fh, indent=2, sort_keys=True)
        fh.write("\n")
    if text_path:
        with open(text_path, "w") as fh:
            for r in results:
                fh.write(r.line() + "\n")


def overall_exit(results) -> int:
    return 0 if all(r.status != FAIL for r in results) else 1


# ---------------------------------------------------------------- identities

def check_linear_identity(f: Field, a_values, tol: float = 2e-2, gauss_order: int = 8,
                          panel_cells: float = 16.0) -> CheckResult:
    """Truncated quadrature of the linear integrand against spectral ``-|D| f``."""
    a_values = sorted(a_values)
    d = apply_multiplier(f, abs_power(1))
    ref = l2_norm(d)
    res = []
    for a in a_values:
        q = make_quadrature(f.grid, gauss_order, panel_cells, images=0, cutoff=a)
        li = linear_integral(f, q)
        res.append(0.0 if ref == 0 else l2_norm(li + d) / ref)
    decreasing = ref == 0 or all(x > y for x, y in zip(res, res[1:]))
    ok = res[-1] <= tol and decreasing
    return CheckResult("linear_identity", _status(ok), {"A": a_values, "residual": res},
                       {"residual_at_max_A": tol},
                       note=f"residual {res[-1]:.3e} at A={a_values[-1]:.4g}, decreasing={decreasing}")


def dissipation_residuals(traj: Trajectory) -> np.ndarray:
    """Relative gap between centered ``d/dt (1/2)||f||^2`` and ``-(1/pi) log_energy`` at interior reports."""
    if len(traj.reports) < 3:
        raise ConfigurationError("need at least three reports for centered differences")
    t = traj.times
    e = 0.5 * traj.column("l2") ** 2
    le = traj.column("log_energy") / np.pi
    if not np.all(np.isfinite(le)):
        raise ConfigurationError("trajectory lacks log-energy entries")
    d = (e[2:] - e[:-2]) / (t[2:] - t[:-2])
    scale = le[1:-1]
    gap = np.abs(d + scale)
    return np.where(scale > 0, gap / np.where(scale > 0, scale, 1.0), gap)


def check_l2_dissipation(traj: Trajectory, tol: float = 1e-4) -> CheckResult:
    if traj.params is not None and traj.params.active:
        raise ConfigurationError("the dissipation identity holds for the unregularized equation only")
    r = dissipation_residuals(traj)
    worst = float(r.max())
    return CheckResult("l2_dissipation", _status(worst <= tol), {"max_residual": worst,
                       "residuals": r.tolist()}, {"max_residual": tol},
                       note=f"max relative residual {worst:.3e}")


def l2_dissipation_refinement(f0: Field, t_end: float, cadences, quad: QuadratureSpec,
                              **kw) -> CheckResult:
    """Residual at each cadence; the identity check plus the centered-difference convergence ratio."""
    settings = ReportSettings(besov=False, holder=False)
    worst = []
    for c in cadences:
        traj = evolve(f0, t_end, RegularizationParams(), quad, c, settings=settings, **kw)
        worst.append(float(dissipation_residuals(traj).max()) if traj.status == FINISHED else np.inf)
    ratios = [a / b if b > 0 else np.inf for a, b in zip(worst, worst[1:])]
    return CheckResult("l2_dissipation_refinement", PASS, {"cadence": list(cadences),
                       "max_residual": worst, "ratio": ratios},
                       note=f"residuals {worst}, ratios {ratios}")


def scaled_data(f0: Field, lam: int) -> Field:
    """``f0(lam x) / lam`` on the same grid (exact when f0 is band-limited to N/(2 lam))."""
    idx = (lam * np.arange(f0.grid.n)) % f0.grid.n
    return Field(f0.grid, f0.samples[idx] / lam)


def fundamental_period(f: Field, lam: int) -> Field:
    """Restriction of an ``L/lam``-periodic field to one period."""
    n = f.grid.n // lam
    return Field(Grid(f.grid.length / lam, n), f.samples[:n])


def check_scaling(f0: Field, lam: int, t_end: float, cadence: float, quad: QuadratureSpec | None = None,
                  tol: float = 1e-3, band_tol: float = 1e-6, **kw) -> CheckResult:
    """Run ``f`` to ``lam T`` and ``f_lam`` to ``T``; compare ``f_lam(t)`` with ``f(lam t, lam x)/lam``.

    Modes above ``N/(2 lam)`` alias when the data are compressed onto the same
    grid; their relative size must stay below ``band_tol``.
    """
    if lam not in (1, 2, 4):
        raise ConfigurationError("scaling factor must be 1, 2 or 4")
    if f0.grid.n % lam:
        raise ConfigurationError("grid size must be divisible by the scaling factor")
    c = np.asarray(f0.coeffs)
    if np.any(np.abs(c[f0.grid.n // (2 * lam):]) > band_tol * max(np.abs(c).max(), 1e-300)):
        raise ConfigurationError("data not band-limited enough to be rescaled on this grid")
    quad = quad or make_quadrature(f0.grid)
    fl0 = scaled_data(f0, lam)
    crit = {
        "lip": (lipschitz_seminorm(f0), lipschitz_seminorm(fundamental_period(fl0, lam))),
        "h32": (hs_norm(f0, 1.5), hs_norm(fundamental_period(fl0, lam), 1.5)),
    }
    crit_gap = max(abs(a - b) / a if a else abs(b) for a, b in crit.values())
    settings = ReportSettings(besov=False, holder=False, log_energy=False)
    params = RegularizationParams()
    big = evolve(f0, lam * t_end, params, quad, lam * cadence, settings=settings, snapshots=True, **kw)
    small = evolve(fl0, t_end, params, quad, cadence, settings=settings, snapshots=True, **kw)
    if big.status != FINISHED or small.status != FINISHED:
        return CheckResult("scaling", VACUOUS, {"status": [big.status, small.status]},
                           note="a run halted")
    gaps = []
    for (_, fa), (_, fb) in zip(big.snapshots, small.snapshots):
        d = fb - scaled_data(fa, lam)
        ref = hs_sq(fb, 0.5)
        gaps.append(0.0 if ref == 0 else float(np.sqrt(hs_sq(d, 0.5) / ref)))
    worst = max(gaps)
    ok = worst <= tol and crit_gap <= 5e-3
    return CheckResult("scaling", _status(ok), {"discrepancy": worst, "per_report": gaps,
                       "critical_norm_gap": crit_gap, "critical_norms": crit},
                       {"discrepancy": tol, "critical_norm_gap": 5e-3},
                       note=f"sup relative H^1/2 discrepancy {worst:.3e}, N={f0.grid.n}")


# -------------------------------------------------------------- inequalities

def _mid(v):
    return 0.5 * (v[1:] + v[:-1])


def lipschitz_budget_ratio(traj: Trajectory, eps: float | None, beta: float) -> float:
    """Largest interval ratio of ``d lip/dt`` to ``||f||_{H^2}^2 + eps^beta holder`` (signed)."""
    t = traj.times
    lip = traj.column("lip")
    h2 = traj.hs(2.0) ** 2
    hold = traj.column("holder_c2beta")
    if eps is not None and not np.all(np.isfinite(hold)):
        raise ConfigurationError("trajectory lacks Hoelder entries")
    budget = _mid(h2) + (eps**beta * _mid(hold) if eps is not None else 0.0)
    rate = np.diff(lip) / np.diff(t)
    mask = budget > 0
    if not np.any(mask):
        return float("-inf")
    return float(np.max(rate[mask] / budget[mask]))


def check_lipschitz_budget(traj: Trajectory, beta: float, constants: ConstantSet | None = None,
                           slack: float = 1e-12) -> CheckResult:
    """Fit the smallest ``c0 >= 1`` making every report interval satisfy the Lipschitz budget."""
    eps = traj.params.eps if traj.params is not None else None
    raw = lipschitz_budget_ratio(traj, eps, beta)
    c0 = max(1.0, raw)
    measured = {"raw_ratio": raw, "c0_fit": c0}
    if constants is None:
        return CheckResult("lipschitz_budget", PASS, measured, constants={"c0": c0},
                           note=f"fitted c0 {c0:.4g} (raw ratio {raw:.4g})")
    ok = raw <= constants.c0 * (1 + slack)
    return CheckResult("lipschitz_budget", _status(ok), measured, {"c0": constants.c0},
                       {"c0": c0}, note=f"raw ratio {raw:.4g} vs c0 {constants.c0:.4g}")


def energy_ratio(traj: Trajectory, c1: float = 1.0) -> float:
    """Largest interval value of ``(dA/dt + c1 B/(1+lip^2) + nu P) / ((sqrt A + A) mu B)`` (signed)."""
    t = traj.times
    a, b, p = traj.column("a_phi"), traj.column("b_phi"), traj.column("p_phi")
    mu, lip = traj.column("mu_phi"), traj.column("lip")
    nu = traj.params.nu if traj.params is not None else 0.0
    lhs = np.diff(a) / np.diff(t) + c1 * _mid(b / (1 + lip**2)) + nu * _mid(p)
    unit = _mid((np.sqrt(a) + a) * mu * b)
    mask = unit > 0
    if not np.any(mask):
        return float("-inf")
    return float(np.max(lhs[mask] / unit[mask]))


def check_energy_inequality(traj: Trajectory, constants: ConstantSet | None = None) -> CheckResult:
    c1 = constants.c1 if constants else 1.0
    raw = energy_ratio(traj, c1)
    measured = {"c2_fit": raw, "c2_over_c1": raw / c1}
    if constants is None:
        return CheckResult("energy_inequality", PASS, measured, note=f"fitted c2 {raw:.4g}")
    ok = raw <= constants.c2
    return CheckResult("energy_inequality", _status(ok), measured, {"c2": constants.c2},
                       note=f"fitted c2 {raw:.4g} vs c2 {constants.c2:.4g}")


def check_small_data_decay(traj: Trajectory, f0: Field, constants: ConstantSet,
                           slack: float = 1e-10) -> CheckResult:
    """Small-data global bounds: A nonincreasing, sup H^{3/2} and int B against their thresholds."""
    from .functionals import smallness_margin
    margin = smallness_margin(f0, constants)
    a = traj.column("a_phi")
    b = traj.column("b_phi")
    t = traj.times
    increases = np.diff(a)
    monotone = bool(np.all(increases <= slack))
    int_b = float(np.trapezoid(b, t)) if hasattr(np, "trapezoid") else float(np.trapz(b, t))
    lip0 = lipschitz_seminorm(f0)
    sup_h = float(max(h_inhom_norm(f, 1.5) for _, f in traj.snapshots)) if traj.snapshots else float("nan")
    h_bound = 1 / (np.sqrt(constants.k) * (2 + lip0) ** 2)
    measured = {"margin": margin, "max_increase": float(increases.max(initial=-np.inf)),
                "int_B": int_b, "int_B_bound": 1 / constants.c0, "sup_H32": sup_h, "H32_bound": h_bound}
    if traj.status != FINISHED:
        return CheckResult("small_data_decay", VACUOUS, measured, note=f"run {traj.status}")
    if margin <= 0:
        return CheckResult("small_data_decay", VACUOUS, measured, note="smallness hypothesis fails")
    ok = monotone and int_b <= 1 / constants.c0 and (not traj.snapshots or sup_h <= h_bound)
    return CheckResult("small_data_decay", _status(ok), measured, {"A_increase": slack},
                       constants.as_dict(),
                       note=f"A monotone={monotone}, int B={int_b:.3e} <= {1 / constants.c0:.3e}")


def norm_bound_m(traj: Trajectory) -> float:
    h32 = traj.hs(1.5) ** 2
    lip = traj.column("lip") ** 2
    int_b = float(np.sum(np.diff(traj.times) * _mid(traj.hs(2.0) ** 2)))
    return float(np.max(h32 + lip) + int_b)


def _h_half_series(ta: Trajectory, tb: Trajectory):
    out = []
    for (_, fa), (_, fb) in zip(ta.snapshots, tb.snapshots):
        out.append(float(np.sqrt(hs_sq(fa - fb, 0.5))))
    return np.array(out)


def contraction_fit(f1_0: Field, f2_0: Field, t_end: float, cadence: float, quad: QuadratureSpec,
                    params: RegularizationParams = RegularizationParams(), **kw):
    settings = ReportSettings(besov=False, holder=False, log_energy=False)
    t1 = evolve(f1_0, t_end, params, quad, cadence, settings=settings, snapshots=True, **kw)
    t2 = evolve(f2_0, t_end, params, quad, cadence, settings=settings, snapshots=True, **kw)
    g = _h_half_series(t1, t2)
    m = max(norm_bound_m(t1), norm_bound_m(t2))
    h2 = t1.hs(2.0) ** 2 + t2.hs(2.0) ** 2
    cum = np.concatenate([[0.0], np.cumsum(np.diff(t1.times) * _mid(h2))])
    return t1, t2, g, m, cum


def check_contraction(f1_0: Field, f2_0: Field, t_end: float, cadence: float, m_bound: float,
                      quad: QuadratureSpec | None = None, identical_tol: float = 1e-10,
                      **kw) -> CheckResult:
    """Gronwall-type fit ``log(g(t)/g(0)) <= C (M+1)^5 int (|f1|_{H^2}^2 + |f2|_{H^2}^2)``."""
    quad = quad or make_quadrature(f1_0.grid)
    t1, t2, g, m, cum = contraction_fit(f1_0, f2_0, t_end, cadence, quad, **kw)
    if t1.status != FINISHED or t2.status != FINISHED:
        return CheckResult("contraction", VACUOUS, {"status": [t1.status, t2.status]}, note="a run halted")
    ref = np.array([float(np.sqrt(hs_sq(f, 0.5))) for _, f in t1.snapshots])
    measured = {"M": m, "g": g.tolist()}
    if m > m_bound:
        return CheckResult("contraction", VACUOUS, measured, note=f"norm bound {m:.3g} exceeds {m_bound:.3g}")
    if g[0] == 0:
        rel = float(np.max(g / np.where(ref > 0, ref, 1.0)))
        measured["max_relative_gap"] = rel
        if rel > identical_tol:
            return CheckResult("contraction", FAIL, measured, {"identical": identical_tol},
                               note=f"identical data diverged to {rel:.3e}")
        return CheckResult("contraction", PASS, measured, {"identical": identical_tol},
                           note=f"identical data stay within {rel:.3e}")
    growth = np.log(g[1:] / g[0])
    denom = (m + 1) ** 5 * cum[1:]
    c_fit = float(np.max(growth / denom))
    measured["c_fit"] = c_fit
    ok = bool(np.isfinite(c_fit))
    return CheckResult("contraction", _status(ok), measured, constants={"c_fit": c_fit},
                       note=f"fitted Gronwall constant {c_fit:.4g}, M={m:.3g}")


def fits_stable(values, factor: float) -> bool:
    """Finite, one sign, and max/min magnitude within ``factor``."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)) or not (np.all(v > 0) or np.all(v < 0)):
        return False
    a = np.abs(v)
    return bool(a.max() <= factor * a.min())


# ---------------------------------------------------------------- convergence

def eps_convergence(f0: Field, eps_list, t_end: float, cadence: float, quad: QuadratureSpec | None = None,
                    min_rate: float = 0.4, **kw) -> CheckResult:
    """Successive sup-in-time H^{1/2} gaps between runs at consecutive eps values."""
    eps_list = list(eps_list)
    if len(eps_list) < 3:
        raise ConfigurationError("need at least three eps values")
    quad = quad or make_quadrature(f0.grid)
    settings = ReportSettings(besov=False, holder=False, log_energy=False)
    runs = [evolve(f0, t_end, RegularizationParams(e), quad, cadence, settings=settings,
                   snapshots=True, **kw) for e in eps_list]
    statuses = [r.status for r in runs]
    dists, rates = [], []
    for ra, rb in zip(runs, runs[1:]):
        if ra.status != FINISHED or rb.status != FINISHED:
            dists.append(float("nan"))
            continue
        dists.append(float(np.max(_h_half_series(ra, rb))))
    for i in range(len(dists) - 1):
        ratio = eps_list[i] / eps_list[i + 1]
        rates.append(float(np.log(dists[i] / dists[i + 1]) / np.log(ratio)) if dists[i + 1] > 0 else float("inf"))
    measured = {"eps": eps_list, "nu": [RegularizationParams(e).nu for e in eps_list],
                "distances": dists, "rates": rates, "status": statuses}
    if any(s != FINISHED for s in statuses):
        return CheckResult("eps_convergence", VACUOUS, measured, note="a run halted")
    if all(d == 0 for d in dists):
        return CheckResult("eps_convergence", PASS, measured, note="all distances vanish")
    decreasing = all(a > b for a, b in zip(dists, dists[1:]))
    ok = decreasing and min(rates) >= min_rate
    return CheckResult("eps_convergence", _status(ok), measured, {"min_rate": min_rate},
                       note=f"distances {['%.3e' % d for d in dists]}, rates {['%.3f' % r for r in rates]}")


def r_eps_fit(fields, eps_list, quad_for):
    """Per-eps ratio ``||R_eps f|| / (eps^{1/2} ||f||_{H^{3/2}})``, maximized over the corpus."""
    from .rhs import apply_R_eps
    out = []
    for e in eps_list:
        vals = []
        for f in fields:
            n = hs_norm(f, 1.5)
            vals.append(l2_norm(apply_R_eps(f, e, quad_for(f))) / (np.sqrt(e) * n))
        out.append(max(vals))
    return np.array(out)


def check_r_eps_scaling(fields, eps_list, spread: float = 4.0, quad_for=None) -> CheckResult:
    quad_for = quad_for or (lambda f: make_quadrature(f.grid, images=0))
    c = r_eps_fit(fields, eps_list, quad_for)
    s = float(c.max() / c.min())
    return CheckResult("r_eps_scaling", _status(s <= spread), {"eps": list(eps_list), "c_fit": c.tolist(),
                       "spread": s}, {"spread": spread}, note=f"fitted constants spread x{s:.3f}")


# -------------------------------------------------------------- interpolation

def interpolation_ratios(f: Field, phi: PhiWeight):
    """Ratios of the three interpolation inequalities' left sides to their right sides (constant 1)."""
    a, b, _, mu = energies(f, phi)
    out = {}
    for s in (1.75, 2.0):
        out[f"s={s}"] = hs_norm(f, s) / (mu * a ** (2 - s) * b ** (s - 1.5))
    out["phi2"] = hs_norm(f, 1.75, phi.squared()) / (mu * a**0.25 * b**0.25)
    return out


def log_bound_ratio(f: Field, quad: QuadratureSpec) -> float:
    t = apply_T(f, f, quad)
    h2 = hs_norm(f, 2.0)
    return hs_norm(t, 1.0) / ((1 + h_inhom_norm(f, 1.5)) ** 2 * np.sqrt(np.log(2 + h2**2)) * h2)


def check_interpolation(calibration, test, phi: PhiWeight, factor: float = 1.1) -> CheckResult:
    """Envelope = max ratio on the calibration corpus; no test sample may exceed ``factor`` times it."""
    if not calibration or not test:
        raise ConfigurationError("both corpora must be non-empty")
    cal = [interpolation_ratios(f, phi) for f in calibration]
    tst = [interpolation_ratios(f, phi) for f in test]
    keys = list(cal[0])
    env = {k: max(r[k] for r in cal) for k in keys}
    worst = {k: max(r[k] for r in tst) / env[k] for k in keys}
    ok = all(v <= factor for v in worst.values())
    return CheckResult("interpolation", _status(ok), {"worst_over_envelope": worst},
                       {"factor": factor}, env,
                       note=", ".join(f"{k}: {v:.3f}" for k, v in worst.items()))


# -------------------------------------------------------------- calibration

def calibrate_constants(corpus, beta: float = 0.25, safety: float = 2.0,
                        c2_floor: float = 1e-3) -> ConstantSet:
    """Constants from a corpus of finished trajectories (max fit times ``safety``).

    ``c1`` is fixed to 1 since only ``c2/c1`` enters the estimates. Fits that
    are negative (pure decay needs no forcing) fall back to the floors
    ``c0 = 1`` and ``c2 = c2_floor``.
    """
    corpus = list(corpus)
    if len(corpus) == 0:
        raise ConfigurationError("calibration corpus is empty")
    for tr in corpus:
        if tr.status != FINISHED:
            raise ConfigurationError(f"calibration run halted with status {tr.status}")
    c0 = max(1.0, safety * max(lipschitz_budget_ratio(tr, tr.params.eps if tr.params else None, beta)
                               for tr in corpus))
    c2 = max(c2_floor, safety * max(energy_ratio(tr, 1.0) for tr in corpus))
    return ConstantSet(c0=float(c0), c1=1.0, c2=float(c2), provenance="calibrated")
