import csv
import json

import numpy as np
import pytest

from muskat import cli
from muskat.config import RunConfig
from muskat.data import single_mode
from muskat.errors import ConfigurationError
from muskat.io import OUTPUT_ROOT_ENV, atomic_write_text, output_dir, sha256_file, verify_manifest
from muskat.spectral import Grid, read_spectrum_csv, write_spectrum_csv


def small_config(directory, **sections):
    d = {
        "grid": {"N": 32},
        "data": {"kind": "single_mode", "amplitude": 0.05},
        "stepper": {"T_end": 0.1, "cadence": 0.05},
        "output": {"directory": str(directory), "besov": False, "holder": False, "log_energy": False},
    }
    for k, v in sections.items():
        d.setdefault(k, {}).update(v)
    return d


def write_config(tmp_path, d, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return p


# ---- config parsing

def test_defaults_round_trip():
    cfg = RunConfig()
    again = RunConfig.from_json(cfg.to_json())
    assert again == cfg


def test_round_trip_preserves_values(tmp_path):
    d = small_config(tmp_path, regularization={"eps": 0.05}, phi={"kind": "log", "a": 0.5})
    cfg = RunConfig.from_dict(d)
    assert RunConfig.from_json(cfg.to_json()) == cfg
    assert cfg.make_params().eps == 0.05
    phi = cfg.make_phi()
    assert phi.kind == "log" and phi.params["a"] == 0.5


@pytest.mark.parametrize("patch,key", [
    ({"grid": {"N": 33}}, "grid.N"),
    ({"grid": {"L": -1.0}}, "grid.L"),
    ({"grid": {"bogus": 1}}, "grid.bogus"),
    ({"nonsense": {}}, "nonsense"),
    ({"data": {"kind": "sawtooth"}}, "data.kind"),
    ({"data": {"kind": "from_file"}}, "data.path"),
    ({"regularization": {"eps": 1.0}}, "regularization"),
    ({"regularization": {"eps": "tiny"}}, "regularization.eps"),
    ({"phi": {"kind": "log", "a": 2.0}}, "phi.a"),
    ({"stepper": {"T_end": 0.0}}, "stepper.T_end"),
    ({"stepper": {"dt0": 1.0}}, "stepper"),
    ({"sweep": {"axis": "beta"}}, "sweep.axis"),
    ({"sweep": {"workers": 0}}, "sweep.workers"),
])
def test_invalid_configs_name_the_key(tmp_path, patch, key):
    d = small_config(tmp_path)
    for k, v in patch.items():
        d.setdefault(k, {}).update(v)
    with pytest.raises(ConfigurationError, match=key.replace(".", r"\.")):
        RunConfig.from_dict(d)


def test_bad_json_reports_line():
    with pytest.raises(ConfigurationError, match="line 2"):
        RunConfig.from_json('{\n  "grid": ,\n}')


def test_replace_revalidates(tmp_path):
    cfg = RunConfig.from_dict(small_config(tmp_path))
    assert cfg.replace("grid", N=64).grid.N == 64
    with pytest.raises(ConfigurationError):
        cfg.replace("grid", N=63)


@pytest.mark.parametrize("kind", ["single_mode", "random_bandlimited", "gaussian_bump", "power_law"])
def test_data_kinds_build(tmp_path, kind):
    cfg = RunConfig.from_dict(small_config(tmp_path, data={"kind": kind, "h32_norm": 0.02}))
    f = cfg.make_data()
    assert f.grid.n == 32
    from muskat.functionals import hs_norm
    assert hs_norm(f, 1.5) == pytest.approx(0.02, rel=1e-12)


def test_data_from_file(tmp_path):
    g = Grid(2 * np.pi, 32)
    f = single_mode(g, 0.1, 2)
    write_spectrum_csv(f, tmp_path / "f.csv")
    cfg = RunConfig.from_dict(small_config(tmp_path, data={"kind": "from_file", "path": str(tmp_path / "f.csv")}))
    np.testing.assert_allclose(cfg.make_data().samples, f.samples, atol=1e-15)
    bad = RunConfig.from_dict(small_config(tmp_path, grid={"N": 64},
                                           data={"kind": "from_file", "path": str(tmp_path / "f.csv")}))
    with pytest.raises(ConfigurationError, match="data.path"):
        bad.make_data()


def test_spectrum_csv_round_trip(tmp_path, rng):
    g = Grid(3.0, 16)
    from muskat.spectral import Field
    f = Field(g, rng.standard_normal(16))
    write_spectrum_csv(f, tmp_path / "s.csv")
    np.testing.assert_allclose(read_spectrum_csv(tmp_path / "s.csv", 3.0).samples, f.samples, atol=1e-14)


# ---- io

def test_output_root_env(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path))
    assert output_dir("runs/x") == tmp_path / "runs" / "x"
    assert (tmp_path / "runs" / "x").is_dir()
    absolute = tmp_path / "abs"
    assert output_dir(str(absolute)) == absolute


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "a.txt"
    atomic_write_text(p, "one")
    atomic_write_text(p, "two")
    assert p.read_text() == "two"
    assert [x.name for x in tmp_path.iterdir()] == ["a.txt"]


# ---- commands

def test_solve_writes_manifest_and_artifacts(tmp_path):
    out = tmp_path / "run"
    p = write_config(tmp_path, small_config(out, output={"snapshots": True}))
    assert cli.main(["solve", str(p)]) == cli.EXIT_OK
    m = json.loads((out / "manifest.json").read_text())
    assert m["status"] == "finished"
    assert set(m["files"]) == {"trajectory.csv", "spectrum_00000.csv", "spectrum_00001.csv", "spectrum_00002.csv"}
    assert m["files"]["trajectory.csv"] == sha256_file(out / "trajectory.csv")
    assert verify_manifest(out / "manifest.json")
    rows = list(csv.reader(open(out / "trajectory.csv")))
    assert rows[0][0] == "t" and rows[0][-1] == "status" and len(rows) == 4
    assert rows[-1][-1] == "finished"


def test_manifest_detects_tampering(tmp_path):
    out = tmp_path / "run"
    p = write_config(tmp_path, small_config(out))
    cli.main(["solve", str(p)])
    with open(out / "trajectory.csv", "a") as fh:
        fh.write("junk\n")
    assert not verify_manifest(out / "manifest.json")


def test_solve_is_byte_reproducible(tmp_path):
    for name in ("a", "b"):
        p = write_config(tmp_path, small_config(tmp_path / name), name=f"{name}.json")
        cli.main(["solve", str(p)])
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_solve_guard_halt_exit_code(tmp_path):
    p = write_config(tmp_path, small_config(tmp_path / "r", data={"amplitude": 100.0}))
    assert cli.main(["solve", str(p)]) == cli.EXIT_HALT


def test_solve_adapted_phi_writes_weight(tmp_path):
    out = tmp_path / "r"
    p = write_config(tmp_path, small_config(out, phi={"kind": "adapted"}))
    assert cli.main(["solve", str(p)]) == cli.EXIT_OK
    assert (out / "phi.csv").exists()
    assert "phi.csv" in json.loads((out / "manifest.json").read_text())["files"]


@pytest.mark.parametrize("content", ['{"grid": {"N": 31}}', '{"grid": {"M": 32}}', "not json"])
def test_config_errors_exit_2(tmp_path, content, capsys):
    p = tmp_path / "bad.json"
    p.write_text(content)
    assert cli.main(["solve", str(p)]) == cli.EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_missing_config_exit_4(tmp_path):
    assert cli.main(["solve", str(tmp_path / "missing.json")]) == cli.EXIT_IO


def test_unknown_command_and_suite(tmp_path):
    assert cli.main(["frobnicate"]) == cli.EXIT_CONFIG
    p = write_config(tmp_path, small_config(tmp_path / "r"))
    assert cli.main(["verify", "nope", str(p)]) == cli.EXIT_CONFIG


def test_sweep_writes_summary(tmp_path):
    out = tmp_path / "sw"
    d = small_config(out, sweep={"axis": "amplitude", "values": [0.01, 0.02, 100.0]})
    p = write_config(tmp_path, d)
    assert cli.main(["sweep", str(p)]) == cli.EXIT_OK
    rows = list(csv.DictReader(open(out / "summary.csv")))
    assert [r["status"] for r in rows] == ["finished", "finished", "halted_blowup"]
    assert float(rows[0]["sup_lip"]) == pytest.approx(0.01, rel=1e-9)
    assert float(rows[1]["smallness_margin"]) < float(rows[0]["smallness_margin"])
    for i in range(3):
        assert verify_manifest(out / f"point_{i:03d}" / "manifest.json")


def test_sweep_over_grid_size(tmp_path):
    out = tmp_path / "sw"
    p = write_config(tmp_path, small_config(out, sweep={"axis": "N", "values": [16, 33]}))
    cli.main(["sweep", str(p)])
    rows = list(csv.DictReader(open(out / "summary.csv")))
    assert rows[0]["status"] == "finished"
    assert rows[1]["status"].startswith("error: ConfigurationError")


def test_empty_sweep_rejected(tmp_path):
    p = write_config(tmp_path, small_config(tmp_path / "sw"))
    assert cli.main(["sweep", str(p)]) == cli.EXIT_CONFIG


def test_phi_adapt_command(tmp_path, capsys):
    g = Grid(2 * np.pi, 64)
    write_spectrum_csv(single_mode(g, 0.1, 3), tmp_path / "f.csv")
    code = cli.main(["phi-adapt", str(tmp_path / "f.csv"), str(tmp_path / "phi.csv")])
    cert = json.loads(capsys.readouterr().out)
    assert cert["passed"] and code == cli.EXIT_OK
    from muskat.phi import read_phi
    phi = read_phi(tmp_path / "phi.csv")
    assert phi.kind == "adapted" and phi(np.array([0.0]))[0] >= 1.0
