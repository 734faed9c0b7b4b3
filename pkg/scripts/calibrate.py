"""Fit the estimate constants on a corpus of small runs and save them as a constants config section."""

import argparse
import json

from _common import out_dir
from muskat import verify as V
from muskat.suites import calibration_corpus

p = argparse.ArgumentParser()
p.add_argument("--runs", type=int, default=10)
p.add_argument("--N", type=int, default=128)
p.add_argument("--eps", type=float, default=1e-2)
a = p.parse_args()

corpus = calibration_corpus(a.runs, a.N, a.eps)
c = V.calibrate_constants(corpus)
raw_lip = [V.lipschitz_budget_ratio(t, a.eps, 0.25) for t in corpus]
raw_energy = [V.energy_ratio(t) for t in corpus]
section = {"constants": {"C0": c.c0, "C1": c.c1, "C2": c.c2, "provenance": c.provenance},
           "raw": {"lipschitz_ratio_max": max(raw_lip), "energy_ratio_max": max(raw_energy)}}
path = out_dir("calibration") / "constants.json"
path.write_text(json.dumps(section, indent=2) + "\n")
print(json.dumps(section, indent=2))
print(f"wrote {path}")
