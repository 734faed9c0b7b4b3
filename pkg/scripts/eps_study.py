"""Distances between regularized solutions at successive eps and the observed rate."""

import argparse

import numpy as np

from _common import out_dir, write_rows
from muskat import verify as V
from muskat.data import single_mode
from muskat.quadrature import make_quadrature
from muskat.spectral import Grid

p = argparse.ArgumentParser()
p.add_argument("--N", type=int, default=256)
p.add_argument("--amplitude", type=float, default=0.1)
p.add_argument("--T", type=float, default=1.0)
p.add_argument("--eps", type=float, nargs="+", default=[0.1, 0.05, 0.025, 0.0125, 0.00625])
a = p.parse_args()

g = Grid(2 * np.pi, a.N)
r = V.eps_convergence(single_mode(g, a.amplitude), a.eps, a.T, a.T / 10, make_quadrature(g))
print(r.line())
m = r.measured
rates = [float("nan")] + m["rates"]
write_rows(out_dir("eps_study") / "distances.csv", ["eps_a", "eps_b", "nu_b", "distance", "rate"],
           zip(a.eps, a.eps[1:], m["nu"][1:], m["distances"], rates))
