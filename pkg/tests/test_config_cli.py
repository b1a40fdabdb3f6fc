"""Configuration parsing, overrides, the CLI, and run reproducibility."""

import csv
import json
import math

import numpy as np
import pytest

from fluidpend import cli
from fluidpend.config import RunConfig, apply_overrides, load_config
from fluidpend.driver import (
    CSV_HEADER,
    EXPERIMENT1_NUMERICS,
    damping_metric,
    run_simulation,
)
from fluidpend.errors import ConfigError, SolverError


# ----------------------------------------------------------------------
# configuration


def test_defaults_are_the_damping_study_values():
    cfg = RunConfig()
    assert (cfg.L, cfg.R0, cfg.R1, cfg.rho_B) == (0.4, 0.1, 0.2, 1.0)
    assert (cfg.a, cfg.gamma, cfg.mu, cfg.lam) == (10.0, 5.0 / 3.0, 100.0, 0.0)
    assert cfg.theta0 == math.pi / 45.0
    assert (cfg.rho0, cfg.omega0) == (1.0, 0.0)
    assert (cfg.target_h, cfg.dt, cfg.t_end) == (0.01, 1e-3, 10.0)
    assert cfg.solver == "compressible"
    cfg.validate()


@pytest.mark.parametrize(
    "bad",
    [
        {"dt": -1.0},
        {"t_end": 0.0},
        {"stride": 0},
        {"target_h": 0.2},        # >= R0
        {"rho0": -1.0},
        {"solver": "magic"},
        {"R0": 0.3},              # R0 >= R1
        {"gamma": 1.0},
        {"solver": "incompressible", "rho_C": 0.0},
    ],
)
def test_validate_rejects_bad_values(bad):
    cfg = apply_overrides(RunConfig(), bad)
    with pytest.raises(ConfigError):
        cfg.validate()


def test_load_config_round_trip(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(
        "[geometry]\nL = 0.3\nrho_B = 2.0\n"
        "[gas]\na = 1.5\n"
        "[discretization]\ndt = 0.002\nstride = 4\n"
        "[solver]\nsolver = incompressible\n"
        "[output]\noutput = out.csv\n"
    )
    cfg = load_config(path)
    assert cfg.L == 0.3 and cfg.rho_B == 2.0 and cfg.a == 1.5
    assert cfg.dt == 0.002 and cfg.stride == 4
    assert cfg.solver == "incompressible"
    assert cfg.output == "out.csv"
    assert cfg.R0 == 0.1  # untouched default


def test_load_config_unknown_section(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[geometry]\nL = 0.3\n[turbo]\nboost = 1\n")
    with pytest.raises(ConfigError, match="turbo"):
        load_config(path)


def test_load_config_unknown_key(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[geometry]\nlength = 0.3\n")
    with pytest.raises(ConfigError, match="length"):
        load_config(path)


def test_load_config_bad_number(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[gas]\na = plenty\n")
    with pytest.raises(ConfigError, match="plenty"):
        load_config(path)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.ini")


def test_apply_overrides_skips_none_and_rejects_unknown():
    cfg = apply_overrides(RunConfig(), {"L": 0.6, "dt": None})
    assert cfg.L == 0.6 and cfg.dt == 1e-3
    with pytest.raises(ConfigError, match="warp"):
        apply_overrides(RunConfig(), {"warp": 9.0})


# ----------------------------------------------------------------------
# damping metric


def test_damping_metric_uses_trailing_window():
    times = np.linspace(0.0, 10.0, 101)
    thetas = np.where(times < 8.0, 5.0, 0.25 * np.sin(times))
    m = damping_metric(times, thetas, 10.0)
    assert abs(m - np.abs(thetas[times >= 8.0]).max()) < 1e-15
    assert m < 0.26


def test_damping_metric_empty_window_rejected():
    with pytest.raises(ValueError):
        damping_metric(np.array([0.0, 1.0]), np.array([1.0, 1.0]), 10.0)


# ----------------------------------------------------------------------
# run_simulation output contract


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs") / "tiny.csv"
    cfg = apply_overrides(
        RunConfig(), {"target_h": 0.03, "dt": 1e-3, "t_end": 0.02}
    )
    result = run_simulation(cfg, str(out))
    return cfg, result


def test_csv_header_and_rows(tiny_run):
    cfg, result = tiny_run
    with open(result.csv_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_HEADER
    assert len(rows) == cfg.n_steps + 2  # header + initial + each step
    first = rows[1]
    assert first[0] == "0" and float(first[2]) == cfg.theta0
    for row in rows[1:]:
        assert len(row) == len(CSV_HEADER)
        assert float(row[8]) > 0.0  # min_density stays positive


def test_sidecar_contents(tiny_run):
    cfg, result = tiny_run
    with open(result.sidecar_path) as fh:
        meta = json.load(fh)
    assert meta["config"] == cfg.as_dict() | {"output": meta["config"]["output"]}
    assert meta["csv_header"] == CSV_HEADER
    assert meta["steps_completed"] == cfg.n_steps
    assert meta["status"] == "ok"
    assert meta["mesh"]["n_triangles"] > 0


def test_rerun_is_byte_identical(tmp_path):
    cfg = apply_overrides(
        RunConfig(), {"target_h": 0.03, "dt": 1e-3, "t_end": 0.02}
    )
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_simulation(cfg, str(a))
    run_simulation(cfg, str(b))
    assert a.read_bytes() == b.read_bytes()


def test_incompressible_run_writes_same_schema(tmp_path):
    cfg = apply_overrides(
        RunConfig(),
        {"target_h": 0.03, "dt": 1e-3, "t_end": 0.01, "solver": "incompressible"},
    )
    result = run_simulation(cfg, str(tmp_path / "inc.csv"))
    with open(result.csv_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_HEADER
    assert float(rows[-1][6]) == pytest.approx(float(rows[1][6]))  # constant mass


# ----------------------------------------------------------------------
# CLI


def test_cli_run_roundtrip(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code = cli.main([
        "run", "--target-h", "0.03", "--dt", "1e-3", "--t-end", "0.01",
        "--out", str(out),
    ])
    assert code == 0
    assert out.exists() and (tmp_path / "traj.csv.meta.json").exists()
    assert "traj.csv" in capsys.readouterr().out


def test_cli_config_error_exit_code(tmp_path, capsys):
    code = cli.main(["run", "--dt", "-1", "--out", str(tmp_path / "x.csv")])
    assert code == 2
    assert "configuration error" in capsys.readouterr().err


def test_cli_solver_failure_exit_code(monkeypatch, tmp_path, capsys):
    def boom(cfg, csv_path=None):
        raise SolverError("density became non-positive")

    monkeypatch.setattr(cli, "run_simulation", boom)
    code = cli.main(["run", "--out", str(tmp_path / "x.csv")])
    assert code == 3
    assert "solver failure" in capsys.readouterr().err


def test_cli_mesh_subcommand(tmp_path, capsys):
    out = tmp_path / "disk.mesh"
    code = cli.main(["mesh", "--target-h", "0.03", "--out", str(out)])
    assert code == 0
    assert out.exists()
    assert "triangles" in capsys.readouterr().out


def test_cli_steady_subcommand(tmp_path):
    out = tmp_path / "steady.csv"
    code = cli.main(["steady", "--target-h", "0.02", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "alpha,c,d,energy,is_minimizer"
    assert len(lines) == 3  # two equilibria
    flags = [int(line.rsplit(",", 1)[1]) for line in lines[1:]]
    assert sum(flags) == 1


def test_cli_experiment_presets_apply_without_flags():
    args = cli.build_parser().parse_args(["experiment1", "--sweep", "length"])
    cfg = cli._build_config(args, preset=EXPERIMENT1_NUMERICS)
    assert cfg.t_end == 20.0 and cfg.dt == 2e-3 and cfg.target_h == 0.02
    args = cli.build_parser().parse_args(
        ["experiment1", "--sweep", "length", "--t-end", "5"]
    )
    cfg = cli._build_config(args, preset=EXPERIMENT1_NUMERICS)
    assert cfg.t_end == 5.0  # explicit flag still wins
