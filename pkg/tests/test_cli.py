import os

import numpy as np
import pytest

from dxl.cli.config import RunConfig, SweepSpec, parse_config, parse_grid
from dxl.cli.main import main
from dxl.cli.runner import is_complete, read_manifest, run, run_sweep, sha256_of
from dxl.errors import ConfigError


def test_minimal_flags_fill_defaults():
    cfg = parse_config(flags={"solver": "exact", "n": "8", "lambda": "0.5", "seed": "7"})
    assert (cfg.solver, cfg.n, cfg.seed, cfg.m, cfg.n_t) == ("exact", 8, 7, 100, 2000)
    assert cfg.g.as_tuple() == pytest.approx((0.5, 0.5, 0.0))


@pytest.mark.parametrize("flags,field", [
    ({"solver": "exact", "lambda": "0.5", "theta": "0.1"}, "theta"),
    ({"solver": "exact", "lambda": "0.5", "n": "0"}, "n"),
    ({"solver": "exact", "lambda": "0.5", "bogus": "1"}, "bogus"),
    ({"solver": "teleport", "lambda": "0.5"}, "solver"),
    ({"solver": "exact"}, "anisotropy"),
])
def test_config_errors_name_field(flags, field):
    with pytest.raises(ConfigError) as info:
        parse_config(flags=flags)
    assert info.value.field == field


def test_config_file_and_flag_precedence(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nsolver = dtwa\nn = 6\nlambda = 0.2  # trailing\nseed = 3\n")
    cfg = parse_config(p, {"n": "9", "theta": "0.4"})
    assert cfg.solver == "dtwa" and cfg.n == 9 and cfg.seed == 3
    assert cfg.anisotropy == ("theta", 0.4)
    p.write_text("solver = exact\nlambda = 0\ncolour = blue\n")
    with pytest.raises(ConfigError):
        parse_config(p)


def test_echo_round_trip(tmp_path):
    cfg = parse_config(flags={"solver": "cdmft", "n": "18", "g": "0.1,0.2,0.3", "r_min": "0.2"})
    p = tmp_path / "echo.cfg"
    p.write_text(cfg.echo())
    assert parse_config(p) == cfg


def test_grid_parser():
    assert parse_grid("-pi/4, 0, pi/4, 3*pi/4") == pytest.approx([-np.pi / 4, 0, np.pi / 4, 3 * np.pi / 4])
    with pytest.raises(ConfigError):
        parse_grid("pi/four")


def test_sweep_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec("lambda", [])
    with pytest.raises(ConfigError):
        SweepSpec("lambda", [0.1, 0.1])
    with pytest.raises(ConfigError):
        SweepSpec("mu", [0.1])


@pytest.fixture
def pair_file(tmp_path):
    p = tmp_path / "pair.csv"
    p.write_text("index,x,y,z\n0,0,0,0\n1,0,0,1\n")
    return str(p)


def test_exact_pair_run(tmp_path, pair_file):
    out = tmp_path / "run"
    cfg = parse_config(flags={"solver": "exact", "g": "0,0,1", "geometry": pair_file,
                              "box_length": "inf", "axes": "X", "output": str(out)})
    res = run(cfg)
    t = res.traces["X"].times
    np.testing.assert_allclose(res.traces["X"].values, np.cos(t), atol=1e-12)  # cos(2 kappa J t)
    header, files = read_manifest(out)
    assert header["status"] == "ok" and float(header["kappa"]) == 0.5
    assert set(files) == {os.path.join("traces", "X.csv"), "fits.csv"}
    assert files["fits.csv"] == sha256_of(out / "fits.csv")
    assert not any(f.name.startswith("X.csv.tmp") for f in (out / "traces").iterdir())


def test_rerun_is_byte_identical(tmp_path, monkeypatch):
    flags = {"solver": "dtwa", "n": "4", "m": "2", "n_t": "64", "lambda": "0.3", "t_max": "0.5",
             "n_points": "6", "axes": "X,Ramsey"}
    digests = []
    for k, threads in enumerate(("1", "3")):
        monkeypatch.setenv("DXL_THREADS", threads)
        res = run(parse_config(flags=dict(flags, output=str(tmp_path / f"r{k}"))))
        digests.append([sha256_of(os.path.join(res.directory, f)) for f in res.files])
    assert digests[0] == digests[1]


def test_manifest_echoes_defaults(tmp_path):
    res = run(parse_config(flags={"solver": "dtwa", "n": "2", "m": "1", "lambda": "-1",
                                  "t_max": "0.2", "n_points": "3", "output": str(tmp_path)}))
    text = (tmp_path / "manifest.txt").read_text()
    assert "n_t = 2000" in text and "m = 1" in text and "version = " in text


def test_sweep_resume_and_labels(tmp_path, monkeypatch):
    base = parse_config(flags={"solver": "oracle-ising", "n": "20", "m": "3", "t_max": "1",
                               "n_points": "21", "output": str(tmp_path)})
    spec = SweepSpec("theta", [-np.pi / 4, 0.0, np.pi / 4, np.pi / 2], ("X",))
    # the oracle ignores g; it only needs a well-formed grid to label
    out = run_sweep(spec, base)
    assert [o[2] for o in out] == ["ok"] * 4
    labels = (tmp_path / "points.csv").read_text().splitlines()[1:]
    assert [row.split(",")[3] for row in labels] == ["Ising", "Heisenberg", "XY", "dipolar"]
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[0] == "lambda_or_theta,axis,tau,nu,tau_err,nu_err" and len(summary) == 5
    assert all(is_complete(tmp_path / f"point_{k:03d}") for k in range(4))
    again = run_sweep(spec, base)
    assert [o[2] for o in again] == ["skipped"] * 4
    # a tampered file makes the point incomplete again
    (tmp_path / "point_002" / "fits.csv").write_text("junk\n")
    assert [o[2] for o in run_sweep(spec, base)] == ["skipped", "skipped", "ok", "skipped"]


def test_sweep_records_failures(tmp_path):
    base = parse_config(flags={"solver": "dmft", "n": "3", "m": "1", "t_max": "0.5",
                               "n_points": "6", "n_noise": "8", "tol": "1e-12", "max_iter": "1",
                               "lambda": "0", "output": str(tmp_path)})
    with pytest.raises(Exception):
        run_sweep(SweepSpec("lambda", [-1.0, 0.5]), base)
    rows = (tmp_path / "points.csv").read_text().splitlines()[1:]
    assert all(",failed," in r for r in rows)


def test_exit_codes(tmp_path, capsys):
    assert main(["run", "--solver", "exact", "--lambda", "0", "--theta", "1"]) == 2
    assert main(["run", "--solver", "dmft", "--n", "3", "--m", "1", "--g", "0,0,1",
                 "--max-iter", "1", "--tol", "1e-12", "--n-noise", "4",
                 "--output", str(tmp_path / "e")]) == 3
    assert "ConvergenceError" in (tmp_path / "e" / "error.txt").read_text()
    assert main(["run", "--solver", "cdmft", "--n", "12", "--m", "1", "--lambda", "0",
                 "--j0", "0.01", "--output", str(tmp_path / "r")]) == 4
    assert main(["calibrate-kappa"]) == 0
    assert "kappa = 0.5" in capsys.readouterr().out


def test_fit_and_oracle_commands(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["oracle", "ising", "--n", "30", "--m", "4", "--t-max", "1.5",
                 "--output", str(out)]) == 0
    assert main(["fit", str(out / "traces" / "X.csv"), "--axis", "X"]) == 0
    text = capsys.readouterr().out
    assert "tau_inv_J = " in text and "window_sensitive = False" in text


def test_do_protocol_command(tmp_path):
    assert main(["do-protocol", "--n", "4", "--m", "1", "--lambda", "0.5", "--t-max", "0.5",
                 "--n-points", "3", "--n-disorder", "20", "--output", str(tmp_path)]) == 0
    assert (tmp_path / "traces" / "XY.csv").exists()


def test_sweep_command_negative_grid(tmp_path):
    out = tmp_path / "sw"
    assert main(["sweep", "--solver", "exact", "--n", "4", "--m", "1", "--parameter", "theta",
                 "--values", "-pi/4,0", "--t-max", "0.5", "--n-points", "6",
                 "--output", str(out)]) == 0
    rows = (out / "points.csv").read_text().splitlines()
    assert len(rows) == 3 and all(",ok," in r for r in rows[1:])
