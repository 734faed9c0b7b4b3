"""Run configuration: nested dataclasses parsed strictly from JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, asdict

import numpy as np

from .constants import ConstantSet
from .errors import ConfigurationError
from .functionals import ReportSettings
from .phi import PhiWeight, adapt_phi_to_data, make_log_phi, one_phi
from .quadrature import QuadratureSpec, make_quadrature
from .rhs import RegularizationParams
from .spectral import Field, Grid, read_spectrum_csv
from .stepper import StepperConfig
from . import data as datamod

DATA_KINDS = ("single_mode", "random_bandlimited", "gaussian_bump", "power_law", "from_file")
PHI_KINDS = ("one", "log", "adapted")
SWEEP_AXES = ("amplitude", "eps", "N")


@dataclass
class GridCfg:
    L: float = 2 * np.pi
    N: int = 256


@dataclass
class DataCfg:
    kind: str = "single_mode"
    amplitude: float = 0.1
    wavenumber: int = 1
    band: int = 8
    decay: float = 1.0
    width: float = 0.6
    exponent: float = 2.0
    seed: int = 0
    path: str | None = None
    h32_norm: float | None = None


@dataclass
class RegularizationCfg:
    eps: float | str = "off"
    beta: float = 0.25


@dataclass
class PhiCfg:
    kind: str = "one"
    a: float = 1.0


@dataclass
class StepperCfg:
    T_end: float = 1.0
    dt0: float = 1e-3
    cadence: float = 0.1
    tol: float = 1e-8
    dt_min: float = 1e-12
    dt_max: float = 0.05
    slope_max: float = 50.0
    tail_max: float = 1e-3


@dataclass
class QuadratureCfg:
    delta0: float | None = None
    A: float | None = None
    gauss_order: int = 8
    panel_cells: float = 16.0
    images: int = 4


@dataclass
class ConstantsCfg:
    C0: float = 1.0
    C1: float = 1.0
    C2: float = 1.0
    provenance: str = "default"


@dataclass
class OutputCfg:
    directory: str = "runs/default"
    snapshots: bool = False
    besov: bool = True
    holder: bool = True
    log_energy: bool = True


@dataclass
class SweepCfg:
    axis: str = "amplitude"
    values: list = field(default_factory=list)
    workers: int = 1


@dataclass
class VerifyCfg:
    tolerances: dict = field(default_factory=dict)


SECTIONS = {
    "grid": GridCfg, "data": DataCfg, "regularization": RegularizationCfg, "phi": PhiCfg,
    "stepper": StepperCfg, "quadrature": QuadratureCfg, "constants": ConstantsCfg,
    "output": OutputCfg, "sweep": SweepCfg, "verify": VerifyCfg,
}


def _build(cls, raw, prefix):
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{prefix}: expected an object")
    names = {f.name for f in fields(cls)}
    for k in raw:
        if k not in names:
            raise ConfigurationError(f"{prefix}.{k}: unknown key")
    return cls(**raw)


@dataclass
class RunConfig:
    grid: GridCfg = field(default_factory=GridCfg)
    data: DataCfg = field(default_factory=DataCfg)
    regularization: RegularizationCfg = field(default_factory=RegularizationCfg)
    phi: PhiCfg = field(default_factory=PhiCfg)
    stepper: StepperCfg = field(default_factory=StepperCfg)
    quadrature: QuadratureCfg = field(default_factory=QuadratureCfg)
    constants: ConstantsCfg = field(default_factory=ConstantsCfg)
    output: OutputCfg = field(default_factory=OutputCfg)
    sweep: SweepCfg = field(default_factory=SweepCfg)
    verify: VerifyCfg = field(default_factory=VerifyCfg)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigurationError("config: expected a JSON object")
        for k in raw:
            if k not in SECTIONS:
                raise ConfigurationError(f"{k}: unknown section")
        cfg = cls(**{k: _build(SECTIONS[k], v, k) for k, v in raw.items()})
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"line {e.lineno}: invalid JSON ({e.msg})") from None
        return cls.from_dict(raw)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def replace(self, section: str, **kw) -> "RunConfig":
        d = self.as_dict()
        d[section].update(kw)
        return RunConfig.from_dict(d)

    # ---- validation and construction of runtime objects

    def validate(self) -> None:
        g = self.make_grid()
        d = self.data
        if d.kind not in DATA_KINDS:
            raise ConfigurationError(f"data.kind: must be one of {DATA_KINDS}")
        if d.kind == "from_file" and not d.path:
            raise ConfigurationError("data.path: required for kind 'from_file'")
        if d.kind != "from_file" and not np.isfinite(d.amplitude):
            raise ConfigurationError("data.amplitude: must be finite")
        if d.h32_norm is not None and not d.h32_norm > 0:
            raise ConfigurationError("data.h32_norm: must be positive")
        eps = self.regularization.eps
        if isinstance(eps, str) and eps != "off":
            raise ConfigurationError("regularization.eps: must be a number in (0, 1) or \"off\"")
        self._check("regularization", self.make_params)
        if self.phi.kind not in PHI_KINDS:
            raise ConfigurationError(f"phi.kind: must be one of {PHI_KINDS}")
        if self.phi.kind == "log" and not 0 < self.phi.a <= 1:
            raise ConfigurationError("phi.a: must lie in (0, 1]")
        s = self.stepper
        if not s.T_end > 0:
            raise ConfigurationError("stepper.T_end: must be positive")
        if not s.cadence > 0:
            raise ConfigurationError("stepper.cadence: must be positive")
        self._check("stepper", self.make_stepper)
        self._check("quadrature", lambda: self.make_quadrature(g))
        self._check("constants", self.make_constants)
        if self.sweep.axis not in SWEEP_AXES:
            raise ConfigurationError(f"sweep.axis: must be one of {SWEEP_AXES}")
        if not isinstance(self.sweep.values, list):
            raise ConfigurationError("sweep.values: must be a list")
        if int(self.sweep.workers) < 1:
            raise ConfigurationError("sweep.workers: must be at least 1")
        if not isinstance(self.verify.tolerances, dict):
            raise ConfigurationError("verify.tolerances: must be an object")

    @staticmethod
    def _check(section, make):
        try:
            make()
        except ConfigurationError as e:
            raise ConfigurationError(f"{section}: {e}") from None
        except TypeError as e:
            raise ConfigurationError(f"{section}: {e}") from None

    def make_grid(self) -> Grid:
        if not isinstance(self.grid.N, int) or isinstance(self.grid.N, bool):
            raise ConfigurationError("grid.N: must be an integer")
        try:
            return Grid(self.grid.L, self.grid.N)
        except ConfigurationError as e:
            key = "grid.N" if "size" in str(e) else "grid.L"
            raise ConfigurationError(f"{key}: {e}") from None

    def make_params(self) -> RegularizationParams:
        eps = None if self.regularization.eps == "off" else float(self.regularization.eps)
        return RegularizationParams(eps, self.regularization.beta)

    def make_stepper(self) -> StepperConfig:
        s = self.stepper
        return StepperConfig(s.dt0, s.tol, s.dt_min, s.dt_max, 1.2, s.slope_max, s.tail_max)

    def make_quadrature(self, grid: Grid) -> QuadratureSpec:
        q = self.quadrature
        base = make_quadrature(grid, q.gauss_order, q.panel_cells, q.images, q.A)
        if q.delta0 is not None:
            base = QuadratureSpec(q.delta0, base.cutoff, base.period, base.gauss_order,
                                  base.max_panel_width, base.images)
        return base

    def make_constants(self) -> ConstantSet:
        c = self.constants
        return ConstantSet(c.C0, c.C1, c.C2, c.provenance)

    def make_settings(self) -> ReportSettings:
        o = self.output
        return ReportSettings(self.regularization.beta, o.besov, o.holder, o.log_energy,
                              self.make_constants())

    def make_data(self) -> Field:
        g = self.make_grid()
        d = self.data
        rng = np.random.default_rng(d.seed)
        if d.kind == "single_mode":
            f = datamod.single_mode(g, d.amplitude, d.wavenumber)
        elif d.kind == "random_bandlimited":
            f = datamod.random_bandlimited(g, d.band, rng, d.amplitude, d.decay)
        elif d.kind == "gaussian_bump":
            f = datamod.gaussian_bump(g, d.amplitude, d.width)
        elif d.kind == "power_law":
            f = datamod.power_law(g, d.exponent, rng, d.amplitude)
        else:
            f = read_spectrum_csv(d.path, g.length)
            if f.grid != g:
                raise ConfigurationError("data.path: spectrum size does not match grid.N")
        if d.h32_norm is not None:
            f = datamod.scale_to_norm(f, 1.5, d.h32_norm)
        return f

    def make_phi(self, f0: Field | None = None) -> PhiWeight:
        if self.phi.kind == "one":
            return one_phi()
        if self.phi.kind == "log":
            return make_log_phi(self.phi.a)
        return adapt_phi_to_data(f0 if f0 is not None else self.make_data())
