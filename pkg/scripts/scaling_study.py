"""Scaling commutation discrepancy against grid size for a small Gaussian bump."""

import argparse

import numpy as np

from _common import out_dir, write_rows
from muskat import verify as V
from muskat.errors import ConfigurationError
from muskat.data import gaussian_bump, scale_to_norm
from muskat.spectral import Grid

p = argparse.ArgumentParser()
p.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
p.add_argument("--lam", type=int, default=2)
p.add_argument("--width", type=float, default=0.6)
a = p.parse_args()

rows = []
for n in a.sizes:
    g = Grid(2 * np.pi, n)
    try:
        r = V.check_scaling(scale_to_norm(gaussian_bump(g, 1.0, a.width), 1.5, 0.05), a.lam, 0.25, 0.05)
    except ConfigurationError as e:
        print(n, e)
        rows.append((n, float("nan"), "unresolved"))
        continue
    print(n, r.line())
    rows.append((n, r.measured.get("discrepancy", float("nan")), r.status))
write_rows(out_dir("scaling_study") / "discrepancy.csv", ["N", "discrepancy", "status"], rows)
