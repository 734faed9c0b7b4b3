"""Fitted constant of ||R_eps f|| <= C eps^(1/2) ||f||_{H^3/2} over eps for rough power-law fields."""

import argparse

import numpy as np

from _common import out_dir, write_rows
from muskat import verify as V
from muskat.data import power_law
from muskat.spectral import Grid

p = argparse.ArgumentParser()
p.add_argument("--log2N", type=int, default=15)
p.add_argument("--fields", type=int, default=3)
p.add_argument("--exponent", type=float, default=2.0)
p.add_argument("--eps", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3, 1e-4])
a = p.parse_args()

g = Grid(2 * np.pi, 2**a.log2N)
rng = np.random.default_rng(0)
fields = [power_law(g, a.exponent, rng, 0.05) for _ in range(a.fields)]
r = V.check_r_eps_scaling(fields, a.eps)
print(r.line())
write_rows(out_dir("r_eps_study") / "fit.csv", ["eps", "c_fit"], zip(a.eps, r.measured["c_fit"]))
