"""The three estimate constants and where they came from."""

from __future__ import annotations

from dataclasses import dataclass, asdict

from .errors import ConfigurationError

PROVENANCES = ("default", "calibrated", "user")


@dataclass(frozen=True)
class ConstantSet:
    """``c0`` multiplies the Lipschitz budget, ``c1``/``c2`` the dissipation and forcing in the energy inequality."""

    c0: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    provenance: str = "default"

    def __post_init__(self):
        for name in ("c0", "c1", "c2"):
            v = getattr(self, name)
            if not (v > 0 and v < float("inf")):
                raise ConfigurationError(f"constant {name} must be positive and finite, got {v!r}")
        if self.provenance not in PROVENANCES:
            raise ConfigurationError(f"provenance must be one of {PROVENANCES}, got {self.provenance!r}")

    @property
    def k(self) -> float:
        return 1.0 + 16.0 * (self.c2 / self.c1) ** 2

    def as_dict(self):
        return asdict(self)
