"""Fourier weights phi: [0, inf) -> [1, inf) and their sampled certificates.

A certified weight is increasing and unbounded, doubles boundedly
(``phi(2r) <= c phi(r)``), and is log-capped (``phi(r) / log(4 + r)`` nonincreasing).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, WeightError
from .spectral import Field, hs_sq

LOG4 = np.log(4.0)
UNBOUNDED_GROWTH = 1.5


@dataclass(frozen=True)
class PhiCertificate:
    unbounded: bool
    doubling_constant: float
    log_capped: bool
    monotone: bool
    lower_bound_ok: bool
    r_min: float
    r_max: float
    n_samples: int

    @property
    def passed(self) -> bool:
        return self.unbounded and self.log_capped and self.monotone and self.lower_bound_ok

    def as_dict(self):
        return dict(self.__dict__, passed=self.passed)


@dataclass(frozen=True, eq=False)
class PhiWeight:
    """A weight ``phi`` with a kind tag and the parameters needed to rebuild it."""

    kind: str
    params: dict = field(default_factory=dict)
    fn: Callable[[np.ndarray], np.ndarray] | None = None
    r_max: float = 1e9
    certificate: PhiCertificate | None = None

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "one":
            return np.ones_like(r)
        if self.kind == "log":
            return (np.log(4.0 + r) / LOG4) ** self.params["a"]
        if self.kind == "adapted":
            return _eval_adapted(r, self.params)
        return np.asarray(self.fn(r), dtype=float)

    def squared(self) -> "PhiWeight":
        """The weight ``phi^2`` (used by the ``|D|^{7/4, phi^2}`` norm)."""
        return PhiWeight("custom", {"of": self.kind}, fn=lambda r: self(r) ** 2, r_max=self.r_max)

    def header(self) -> dict:
        p = {k: (list(map(float, v)) if isinstance(v, (list, np.ndarray)) else v)
             for k, v in self.params.items()}
        return {"kind": self.kind, "params": p, "r_max": self.r_max}


def one_phi() -> PhiWeight:
    return PhiWeight("one", {})


def custom_phi(fn, name="custom") -> PhiWeight:
    return PhiWeight("custom", {"name": name}, fn=fn)


def make_log_phi(a: float = 1.0, r_max: float = 1e9) -> PhiWeight:
    """``phi_a(r) = (log(4 + r) / log 4)^a``, so ``phi_a(0) = 1``."""
    if not 0 < a <= 1:
        raise ConfigurationError(f"log weight exponent must lie in (0, 1], got {a!r}")
    w = PhiWeight("log", {"a": float(a)}, r_max=r_max)
    return _certified(w, r_max)


def _certified(w: PhiWeight, r_max: float) -> PhiWeight:
    cert = validate_phi(w, r_max)
    return PhiWeight(w.kind, w.params, fn=w.fn, r_max=r_max, certificate=cert)


def sample_grid(r_max: float, n_samples: int) -> np.ndarray:
    return np.geomspace(1e-3, r_max, n_samples)


def validate_phi(phi: PhiWeight, r_max: float, n_samples: int = 512) -> PhiCertificate:
    if r_max <= 1:
        raise ConfigurationError("r_max must exceed 1")
    if n_samples < 64:
        raise ConfigurationError("need at least 64 samples")
    r = sample_grid(r_max, n_samples)
    v = phi(r)
    v2 = phi(2 * r)
    v0 = phi(np.array([0.0, 1.0]))
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(v2)) and np.all(np.isfinite(v0))):
        raise WeightError(f"weight {phi.kind!r} is not finite on [1e-3, {r_max}]")
    tol = 1e-12
    monotone = bool(np.all(np.diff(v) >= -tol * v[1:]))
    ratio = v / np.log(4 + r)
    log_capped = bool(np.all(np.diff(ratio) <= tol * ratio[1:]))
    # sampled stand-in for unboundedness: substantial growth between r = 1 and r_max
    unbounded = monotone and bool(v[-1] >= UNBOUNDED_GROWTH * v0[1])
    doubling = float(max(1.0, np.max(v2 / v)))
    lower = bool(np.all(v >= 1 - tol) and v0[0] >= 1 - tol)
    return PhiCertificate(unbounded, doubling, log_capped, monotone, lower, 1e-3, float(r_max), int(n_samples))


def shell_masses(f0: Field, s: float):
    """Dyadic shell masses ``m_j`` of ``|xi|^{2s} |f^(xi)|^2``; shell 0 is ``[0, 2)``, shell j is ``[2^j, 2^{j+1})``."""
    g = f0.grid
    p = g.length * g.mode_weights * np.abs(f0.coeffs) ** 2 * np.where(g.xi > 0, g.xi, 0.0) ** (2 * s)
    j = np.zeros(g.xi.size, dtype=int)
    big = g.xi >= 2
    j[big] = np.floor(np.log2(g.xi[big])).astype(int)
    m = np.bincount(j, weights=p)
    return m


def _adapted_params(masses: np.ndarray, exponent: float) -> dict:
    total = masses.sum()
    tail = np.cumsum(masses[::-1])[::-1] / total
    knots_r = [0.0]
    targets = [1.0]
    for jj, tau in enumerate(tail):
        if tau <= 0:
            break
        knots_r.append(2.0 ** (jj + 1))
        targets.append(max(1.0, tau ** (-exponent)))
    knots_r = np.array(knots_r)
    logs = np.log(4 + knots_r)
    q = np.minimum.accumulate(np.array(targets) / logs)
    return {"knots": knots_r.tolist(), "q": q.tolist(), "exponent": exponent}


def _eval_adapted(r, params):
    """Interpolate ``q = phi / log(4+r)`` as a power of ``log(4+r)`` between knots.

    With knot values nonincreasing in q and nondecreasing in phi, the exponent per
    segment lies in [0, 1], so phi is nondecreasing and q nonincreasing everywhere.
    """
    knots = np.asarray(params["knots"])
    q = np.asarray(params["q"])
    lg = np.log(4 + knots)
    r = np.asarray(r, dtype=float)
    L = np.log(4 + r)
    idx = np.clip(np.searchsorted(knots, r, side="right") - 1, 0, knots.size - 1)
    out = np.empty_like(L)
    last = idx == knots.size - 1
    out[last] = q[-1] * L[last]
    i = idx[~last]
    gamma = np.log(q[i] / q[i + 1]) / np.log(lg[i + 1] / lg[i])
    out[~last] = q[i] * (L[~last] / lg[i]) ** (-gamma) * L[~last]
    return np.maximum(out, 1.0)


def adapt_phi_to_data(f0: Field, s: float = 1.5, r_max: float | None = None) -> PhiWeight:
    """Build an unbounded weight keeping ``||f0||_{X^{s,phi}}`` controlled.

    Shell targets are ``tau_j^{-p}`` with ``tau_j`` the tail fraction of the
    ``|xi|^{2s}|f^|^2`` mass beyond shell j, capped by the log envelope. The
    exponent p is the largest value (bisection) with
    ``||f0||_{s,phi} <= 2 ||f0||_{s} + 1``.
    """
    if r_max is None:
        r_max = max(2 * f0.grid.xi_max, 4.0)
    base_sq = hs_sq(f0, s)
    if not np.isfinite(base_sq):
        raise ConfigurationError("data has infinite norm on its grid")
    if base_sq == 0:
        return make_log_phi(1.0, r_max=r_max)
    masses = shell_masses(f0, s)
    budget = (2 * np.sqrt(base_sq) + 1) ** 2

    def build(p):
        return PhiWeight("adapted", _adapted_params(masses, p), r_max=r_max)

    def ok(p):
        return hs_sq(f0, s, build(p)) <= 0.999 * budget

    lo, hi = 0.0, 4.0
    if ok(hi):
        lo = hi
    else:
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
    return _certified(build(lo), r_max)


def write_phi(phi: PhiWeight, path, r_max=None, n_samples=512) -> None:
    r_max = r_max or phi.r_max
    r = sample_grid(r_max, n_samples)
    header = phi.header()
    if phi.certificate is not None:
        header["certificate"] = phi.certificate.as_dict()
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write("r,phi\n")
        for ri, vi in zip(r, phi(r)):
            fh.write(f"{float(ri)!r},{float(vi)!r}\n")


def read_phi(path) -> PhiWeight:
    with open(path) as fh:
        first = fh.readline()
    header = json.loads(first[2:])
    kind = header["kind"]
    if kind == "one":
        return one_phi()
    if kind == "log":
        return make_log_phi(header["params"]["a"], r_max=header["r_max"])
    if kind == "adapted":
        return _certified(PhiWeight("adapted", header["params"], r_max=header["r_max"]), header["r_max"])
    raise ConfigurationError(f"cannot rebuild weight of kind {kind!r} from file")


def phi_from_config(spec: dict) -> PhiWeight:
    kind = spec.get("kind", "one")
    if kind == "one":
        return one_phi()
    if kind == "log":
        return make_log_phi(spec.get("a", 1.0))
    raise ConfigurationError(f"weight kind {kind!r} needs data; use adapt_phi_to_data")
