"""Command-line entry points.

Exit codes: 0 ok, 1 check failure, 2 configuration error, 3 guard halt, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import RunConfig
from .errors import ConfigurationError
from .functionals import smallness_margin
from .io import now, output_dir, write_manifest
from .phi import adapt_phi_to_data, write_phi
from .spectral import read_spectrum_csv, write_spectrum_csv
from .stepper import FINISHED, evolve
from . import suites
from . import verify as V

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_HALT, EXIT_IO = 0, 1, 2, 3, 4


def _load(path):
    text = Path(path).read_text()
    return text, RunConfig.from_json(text)


def solve(cfg: RunConfig, config_text: str, directory=None):
    """Run one configuration and write its artifacts; returns (trajectory, output dir)."""
    started = now()
    out = output_dir(directory or cfg.output.directory)
    grid = cfg.make_grid()
    f0 = cfg.make_data()
    phi = cfg.make_phi(f0)
    traj = evolve(f0, cfg.stepper.T_end, cfg.make_params(), cfg.make_quadrature(grid),
                  cfg.stepper.cadence, phi=phi, config=cfg.make_stepper(),
                  settings=cfg.make_settings(), snapshots=cfg.output.snapshots)
    artifacts = [out / "trajectory.csv"]
    traj.write_csv(artifacts[0])
    for i, (_, f) in enumerate(traj.snapshots):
        p = out / f"spectrum_{i:05d}.csv"
        write_spectrum_csv(f, p)
        artifacts.append(p)
    if cfg.phi.kind == "adapted":
        p = out / "phi.csv"
        write_phi(phi, p)
        artifacts.append(p)
    write_manifest(out, config_text, cfg.as_dict(), artifacts, traj.status, started,
                   {"message": traj.message, "steps": traj.steps,
                    "regularization": cfg.make_params().as_dict(),
                    "quadrature": cfg.make_quadrature(grid).as_dict()})
    return traj, out


def _sweep_point(args):
    cfg_dict, axis, value, directory = args
    d = json.loads(json.dumps(cfg_dict))
    if axis == "amplitude":
        d["data"]["amplitude"] = value
    elif axis == "eps":
        d["regularization"]["eps"] = value
    else:
        d["grid"]["N"] = value
    try:
        cfg = RunConfig.from_dict(d)
        text = json.dumps(d, sort_keys=True)
        traj, _ = solve(cfg, text, directory)
        f0 = cfg.make_data()
        t = traj.times
        b = traj.column("b_phi")
        int_b = float(np.sum(np.diff(t) * 0.5 * (b[1:] + b[:-1])))
        return [traj.status, float(np.max(traj.column("lip"))), float(np.max(traj.column("a_phi"))),
                int_b, smallness_margin(f0, cfg.make_constants())]
    except Exception as e:  # a failing point is recorded and the sweep continues
        return [f"error: {type(e).__name__}: {e}", "nan", "nan", "nan", "nan"]


def sweep(cfg: RunConfig):
    if not cfg.sweep.values:
        raise ConfigurationError("sweep.values: empty axis")
    out = output_dir(cfg.output.directory)
    jobs = [(cfg.as_dict(), cfg.sweep.axis, v, str(out / f"point_{i:03d}"))
            for i, v in enumerate(cfg.sweep.values)]
    if cfg.sweep.workers > 1:
        with ProcessPoolExecutor(cfg.sweep.workers) as ex:
            rows = list(ex.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    path = out / "summary.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["point", "value", "status", "sup_lip", "sup_A", "int_B", "smallness_margin"])
        for i, (v, r) in enumerate(zip(cfg.sweep.values, rows)):
            w.writerow([i, repr(v)] + [x if isinstance(x, str) else repr(float(x)) for x in r])
    return path, rows


def _cmd_solve(a):
    text, cfg = _load(a.config)
    traj, out = solve(cfg, text)
    print(f"{traj.status}: {len(traj.reports)} reports, {traj.steps} steps -> {out}")
    return EXIT_OK if traj.status == FINISHED else EXIT_HALT


def _cmd_verify(a):
    if a.suite not in suites.SUITES:
        raise ConfigurationError(f"unknown suite {a.suite!r}; choose from {suites.SUITES}")
    _, cfg = _load(a.config)
    results = suites.run_suite(a.suite, cfg)
    out = output_dir(cfg.output.directory)
    V.write_report(results, out / f"verify_{a.suite}.json", out / f"verify_{a.suite}.txt")
    for r in results:
        print(r.line())
    return V.overall_exit(results)


def _cmd_sweep(a):
    _, cfg = _load(a.config)
    path, rows = sweep(cfg)
    print(f"summary -> {path}")
    return EXIT_OK


def _cmd_phi_adapt(a):
    f = read_spectrum_csv(a.data_file, a.length)
    phi = adapt_phi_to_data(f)
    write_phi(phi, a.out)
    cert = phi.certificate
    print(json.dumps(cert.as_dict(), sort_keys=True))
    return EXIT_OK if cert.passed else EXIT_CHECK


def build_parser():
    p = argparse.ArgumentParser(prog="muskat", description="Periodic Muskat solver and estimate checks")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="run one configuration")
    s.add_argument("config")
    s.set_defaults(fn=_cmd_solve)
    v = sub.add_parser("verify", help="run a check suite")
    v.add_argument("suite")
    v.add_argument("config")
    v.set_defaults(fn=_cmd_verify)
    w = sub.add_parser("sweep", help="run a parameter sweep")
    w.add_argument("config")
    w.set_defaults(fn=_cmd_sweep)
    f = sub.add_parser("phi-adapt", help="build a data-adapted weight from a spectrum CSV")
    f.add_argument("data_file")
    f.add_argument("out")
    f.add_argument("--length", type=float, default=2 * np.pi, help="period of the data")
    f.set_defaults(fn=_cmd_phi_adapt)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        return args.fn(args)
    except ConfigurationError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
