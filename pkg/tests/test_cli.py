import json
import math
import os
import subprocess
import sys

import pytest

from lmgsqueeze.cli import main, parse_config, run, validate_config
from lmgsqueeze.errors import ConfigError

MINIMAL = {"chi": 1.0, "gamma": 0.1, "n_spins": 100, "experiment": "compare-pulsed"}


def cli(args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "lmgsqueeze", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


def test_minimal_config_defaults():
    cfg = parse_config(json.dumps(MINIMAL))
    assert cfg["axis"] == "z"
    assert cfg["branch"] == "A"
    assert cfg["max_step"] == 0.05
    assert cfg["seed"] == 0
    assert cfg["initial"] == {"theta": math.pi / 2, "phi": math.pi / 2}


def test_initial_accepts_pair_form():
    cfg = validate_config(dict(MINIMAL, initial=[0.5, 1.0]))
    assert cfg["initial"] == {"theta": 0.5, "phi": 1.0}


def test_both_parameterizations_rejected():
    cfg = dict(MINIMAL, coupling=[1, 0, 0, 0, 0.25, 0, 0, 0, 0])
    with pytest.raises(ConfigError) as err:
        validate_config(cfg)
    assert "coupling" in str(err.value) and "chi" in str(err.value)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as err:
        validate_config(dict(MINIMAL, coupling_matrix=[1]))
    assert "coupling_matrix" in str(err.value)


def test_missing_model_rejected():
    with pytest.raises(ConfigError):
        validate_config({"n_spins": 10, "experiment": "evolve"})


def test_range_violations_name_field():
    with pytest.raises(ConfigError) as err:
        validate_config(dict(MINIMAL, gamma=1.5))
    assert "gamma" in str(err.value)
    with pytest.raises(ConfigError) as err:
        validate_config(dict(MINIMAL, initial={"theta": 4.0, "phi": 0.0}))
    assert "theta" in str(err.value)
    with pytest.raises(ConfigError) as err:
        validate_config(dict(MINIMAL, n_spins=0))
    assert "n_spins" in str(err.value)


def test_gamma_above_half_accepted_and_remapped(tmp_path):
    cfg = validate_config(
        {
            "chi": 1.0,
            "gamma": 0.7,
            "n_spins": 16,
            "experiment": "evolve",
            "grid_points": 300,
            "output_dir": str(tmp_path / "out"),
        }
    )
    assert run(cfg) == 0
    descriptor = json.loads((tmp_path / "out" / "descriptor.json").read_text())
    assert descriptor["model"]["gamma"] == pytest.approx(0.3, abs=1e-12)
    assert descriptor["model"]["sign_flipped"] is True
    assert descriptor["config"]["gamma"] == 0.7


def test_canonicalize_subcommand(tmp_path):
    out = cli(["canonicalize", "--coupling", "1,0,0,0,0.9,0,0,0,0"], tmp_path)
    assert out.returncode == 0
    assert "gamma=0.1" in out.stdout
    assert "sign_flipped=true" in out.stdout
    assert "chi=2" in out.stdout
    assert os.listdir(tmp_path) == []  # inspection commands write nothing


def test_design_subcommand(tmp_path):
    out = cli(["design", "--chi", "1", "--gamma", "0.1", "--axis", "y"], tmp_path)
    assert out.returncode == 0
    assert "ratio_t2_t1=0.578947368421" in out.stdout
    assert "chi_eff=0.266666666667" in out.stdout


def test_exit_codes(tmp_path):
    isotropic = cli(["canonicalize", "--coupling", "1,0,0,0,1,0,0,0,1"], tmp_path)
    assert isotropic.returncode == 3
    assert "IsotropicCoupling" in isotropic.stderr
    bad_key = tmp_path / "bad.json"
    bad_key.write_text(json.dumps(dict(MINIMAL, bogus=1)))
    out = cli(["compare-pulsed", "--config", str(bad_key)], tmp_path)
    assert out.returncode == 2
    assert "bogus" in out.stderr
    impossible = cli(
        ["design", "--chi", "1", "--gamma", "0.1", "--axis", "x"], tmp_path
    )
    assert impossible.returncode == 3
    assert "XAxisImpossible" in impossible.stderr


def test_noise_zero_sigma_identical_columns(tmp_path):
    config = {
        "chi": 1.0,
        "gamma": 0.1,
        "n_spins": 16,
        "experiment": "noise",
        "channel": "pulse_separation",
        "relative_sigma": 0.0,
        "n_runs": 3,
        "output_dir": "noise-out",
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    out = cli(["noise", "--config", str(path)], tmp_path)
    assert out.returncode == 0, out.stderr
    runs = (tmp_path / "noise-out" / "runs.csv").read_text().splitlines()
    assert len(runs) == 4
    minima = {line.split(",")[4] for line in runs[1:]}
    assert len(minima) == 1


def test_summary_matches_csv(tmp_path):
    config = {
        "chi": 1.0,
        "gamma": 0.2,
        "n_spins": 20,
        "experiment": "evolve",
        "grid_points": 300,
        "output_dir": "evolve-out",
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    out = cli(["evolve", "--config", str(path)], tmp_path)
    assert out.returncode == 0, out.stderr
    summary = out.stdout.strip()
    rows = (tmp_path / "evolve-out" / "minimum.csv").read_text().splitlines()
    t_min_csv, _, xi2_csv, _ = rows[1].split(",")
    assert f"xi2_min={xi2_csv}" in summary
    assert f"t_min={t_min_csv}" in summary


def test_descriptor_round_trip(tmp_path):
    config = {
        "chi": 1.0,
        "gamma": 0.15,
        "n_spins": 16,
        "experiment": "noise",
        "channel": "pulse_area",
        "relative_sigma": 2e-4,
        "n_runs": 4,
        "seed": 9,
        "output_dir": "first",
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    first = cli(["noise", "--config", str(path)], tmp_path)
    assert first.returncode == 0, first.stderr
    second = cli(
        [
            "noise",
            "--config",
            str(tmp_path / "first" / "descriptor.json"),
            "--out",
            "second",
        ],
        tmp_path,
    )
    assert second.returncode == 0, second.stderr
    for name in ("runs.csv", "trace_stats.csv", "summary.csv"):
        a = (tmp_path / "first" / name).read_bytes()
        b = (tmp_path / "second" / name).read_bytes()
        assert a == b


def test_flag_overrides_win():
    import argparse

    from lmgsqueeze.cli import _flag_overrides

    ns = argparse.Namespace(
        seed=7, workers=None, chi=None, gamma=0.3, n_spins=None, axis=None,
        branch=None, max_step=None, cycles=None, channel=None,
        relative_sigma=None, n_runs=None, coupling=None, out=None,
    )
    overrides = _flag_overrides(ns)
    assert overrides == {"seed": 7, "gamma": 0.3}


@pytest.mark.parametrize(
    "config,expect",
    [
        (
            {"experiment": "sweep-gamma", "gammas": [0.0, 0.5], "grid_points": 300},
            ("gamma_sweep.csv",),
        ),
        (
            {
                "experiment": "sweep-initial-state",
                "theta_points": 5,
                "phi_points": 4,
                "grid_points": 150,
            },
            ("grid.csv", "argmin.csv"),
        ),
        (
            {"experiment": "scaling", "n_grid": [10, 14], "grid_points": 400},
            ("scaling.csv", "slopes.csv"),
        ),
        ({"experiment": "compare-pulsed"}, ("traces.csv", "minima.csv")),
    ],
)
def test_experiment_dispatch_writes_tables(tmp_path, config, expect):
    full = dict(config, chi=1.0, gamma=0.1, n_spins=14, output_dir="out")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(full))
    result = cli([full["experiment"], "--config", str(path)], tmp_path)
    assert result.returncode == 0, result.stderr
    for name in expect:
        assert (tmp_path / "out" / name).exists()
    assert (tmp_path / "out" / "descriptor.json").exists()


def test_main_function_runs_in_process(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    rc = main(
        [
            "evolve",
            "--chi", "1", "--gamma", "0.1", "--n-spins", "12",
            "--out", "trace-out",
        ]
    )
    assert rc == 0
    assert "xi2_min=" in capsys.readouterr().out
    assert (tmp_path / "trace-out" / "trace.csv").exists()
