"""Amplitude scan of single-mode data: final status, peak slope and the small-data margin."""

import argparse

import numpy as np

from _common import out_dir, write_rows
from muskat.constants import ConstantSet
from muskat.data import single_mode
from muskat.functionals import ReportSettings, smallness_margin
from muskat.quadrature import make_quadrature
from muskat.rhs import RegularizationParams
from muskat.spectral import Grid
from muskat.stepper import evolve

p = argparse.ArgumentParser()
p.add_argument("--N", type=int, default=128)
p.add_argument("--amplitudes", type=float, nargs="+", default=[0.05, 0.2, 0.8, 3.2, 12.8])
p.add_argument("--T", type=float, default=0.5)
a = p.parse_args()

g = Grid(2 * np.pi, a.N)
q = make_quadrature(g)
settings = ReportSettings(besov=False, holder=False, log_energy=False)
rows = []
for amp in a.amplitudes:
    f0 = single_mode(g, amp)
    traj = evolve(f0, a.T, RegularizationParams(), q, a.T / 10, settings=settings)
    rows.append((amp, traj.status, float(np.max(traj.column("lip"))), smallness_margin(f0, ConstantSet())))
    print(rows[-1])
write_rows(out_dir("blowup_scan") / "scan.csv", ["amplitude", "status", "max_lip", "margin"], rows)
