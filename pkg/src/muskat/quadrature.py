"""Symmetric graded Gauss-Legendre rules for the alpha-integrals.

Positive nodes come from panels ``[0, d0], [d0, 2 d0], [2 d0, 4 d0], ...`` up to
the cutoff A, with wide panels split to at most ``max_panel_width``. Every node
``+a`` is paired with ``-a``.

On the torus the integrands are built from periodic differences
``f(x) - f(x - a)`` divided by powers of ``a``; integrals over the whole line
are recovered by summing the images ``a + nL`` for ``|n| <= images`` and a
Hurwitz-zeta tail for the remaining ones (``images = 0`` means plain truncation
at ``|a| <= A``).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from functools import cached_property

import numpy as np
from scipy.special import zeta

from .errors import ConfigurationError


def gauss_panels(breaks, order: int, max_width: float | None = None):
    """Composite Gauss-Legendre nodes and weights over consecutive breakpoints."""
    x0, w0 = np.polynomial.legendre.leggauss(order)
    edges = []
    breaks = np.asarray(breaks, dtype=float)
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        m = 1 if not max_width else max(1, int(np.ceil((b - a) / max_width - 1e-9)))
        sub = np.linspace(a, b, m + 1)
        edges.extend(zip(sub[:-1], sub[1:]))
    edges = np.array(edges)
    half = 0.5 * (edges[:, 1] - edges[:, 0])
    mid = 0.5 * (edges[:, 1] + edges[:, 0])
    nodes = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    weights = (half[:, None] * w0[None, :]).ravel()
    return nodes, weights


def dyadic_breaks(delta0: float, cutoff: float, extra=()):
    br = [0.0]
    a = delta0
    while a < cutoff:
        br.append(a)
        a *= 2
    br.append(cutoff)
    br.extend(e for e in extra if 0 < e < cutoff)
    return np.unique(br)


@dataclass(frozen=True)
class QuadratureSpec:
    delta0: float
    cutoff: float
    period: float
    gauss_order: int = 8
    max_panel_width: float | None = None
    images: int = 4
    paired: bool = True

    def __post_init__(self):
        if self.delta0 <= 0 or self.cutoff <= 0:
            raise ConfigurationError("quadrature lengths must be positive")
        if self.cutoff > self.period / 2 * (1 + 1e-12):
            raise ConfigurationError("cutoff A must not exceed L/2")
        if self.gauss_order < 1:
            raise ConfigurationError("gauss order must be positive")
        if self.images < 0:
            raise ConfigurationError("image count must be non-negative")

    @cached_property
    def half_rule(self):
        """Positive nodes (ascending) and weights."""
        return gauss_panels(dyadic_breaks(self.delta0, self.cutoff), self.gauss_order,
                            self.max_panel_width)

    @property
    def node_count(self) -> int:
        return 2 * self.half_rule[0].size

    def nodes(self):
        """All nodes ordered by |alpha|, + before -."""
        a, w = self.half_rule
        return np.ravel(np.column_stack([a, -a])), np.ravel(np.column_stack([w, w]))

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        return QuadratureSpec(self.delta0, self.cutoff, self.period, self.gauss_order * factor,
                              self.max_panel_width, self.images, self.paired)

    def require_symmetric(self):
        if not self.paired:
            raise ConfigurationError("quadrature must pair every +alpha node with -alpha")

    def as_dict(self):
        d = asdict(self)
        d["node_count"] = self.node_count
        return d


def make_quadrature(grid, gauss_order: int = 8, panel_cells: float = 16.0, images: int = 4,
                    cutoff: float | None = None, max_fraction: float = 1 / 32) -> QuadratureSpec:
    """Default rule for a grid: ``d0 = dx/4``, ``A = L/2``.

    Panels are no wider than ``panel_cells * dx`` nor ``max_fraction * L``; the
    second cap keeps coarse grids accurate for the low harmonics they carry.
    """
    return QuadratureSpec(
        delta0=grid.dx / 4,
        cutoff=grid.length / 2 if cutoff is None else cutoff,
        period=grid.length,
        gauss_order=gauss_order,
        max_panel_width=min(panel_cells * grid.dx, max_fraction * grid.length),
        images=images,
    )


def image_tail(p: int, alpha, period: float, images: int, sign: int):
    """``sum_{|n| > images} (alpha + n L)^{-p}`` for ``|alpha| < L/2``.

    ``sign`` is ``(-1)^p`` (the parity of the summand under ``n -> -n``).
    """
    a = np.asarray(alpha) / period
    m = images + 1
    return period ** (-p) * (zeta(p, m + a) + sign * zeta(p, m - a))
