"""Command-line front end: config parsing, experiment dispatch, data emission.

Configs are JSON (a single self-describing file); command-line flags override
config values.  A previously written descriptor.json is itself a valid
config: re-running it reproduces the original outputs byte for byte.

Exit codes: 0 success, 2 configuration error, 3 domain error (for example an
isotropic coupling or an impossible pulse axis), 4 I/O error, 1 unexpected.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .canonical import CouplingMatrix, canonicalize, from_chi_gamma
from .errors import ConfigError, LmgError
from .experiments import (
    NoiseSpec,
    compare_pulsed,
    evolve_trace,
    noise_monte_carlo,
    scaling_study,
    sweep_gamma,
    sweep_initial_state,
    write_result,
)
from .pulses import design
from .states import BlochAngles

EXPERIMENTS = (
    "evolve",
    "sweep-initial-state",
    "sweep-gamma",
    "compare-pulsed",
    "scaling",
    "noise",
)
INSPECT_COMMANDS = ("canonicalize", "design")

_DEFAULTS = {
    "seed": 0,
    "workers": 1,
    "initial": {"theta": math.pi / 2.0, "phi": math.pi / 2.0},
    "axis": "z",
    "branch": "A",
    "max_step": 0.05,
    "horizon": None,
    "grid_points": None,
    "cycles": None,
    "total_time": None,
    "theta_points": 33,
    "phi_points": 33,
    "gammas": None,
    "n_grid": [50, 100, 200, 400],
    "variants": ["OAT", "TAT", "LMG", "pulsed"],
    "channel": None,
    "relative_sigma": None,
    "scope": None,
    "n_runs": 100,
    "output_dir": None,
}
_KNOWN_KEYS = {"experiment", "n_spins", "chi", "gamma", "coupling"} | set(_DEFAULTS)


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _require_number(cfg, key, lo=None, hi=None, allow_none=False, integer=False):
    value = cfg.get(key)
    if value is None:
        if allow_none:
            return None
        _fail(key, "missing required field")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(key, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        _fail(key, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        _fail(key, f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        _fail(key, f"must be <= {hi}, got {value}")
    return int(value) if integer else float(value)


def parse_config(text: str) -> dict:
    """Parse and validate a JSON config (or descriptor.json) into a resolved
    config dict with all defaults filled.  Unknown keys are rejected."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return validate_config(raw)


def validate_config(raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if "tool" in raw and "parameters" in raw:
        # descriptor.json round-trip: the embedded config is authoritative
        raw = raw.get("config", raw["parameters"])
        if not isinstance(raw, dict):
            raise ConfigError("descriptor does not embed a config object")

    for key in raw:
        if key not in _KNOWN_KEYS:
            _fail(key, "unknown key")

    cfg = dict(_DEFAULTS)
    cfg.update(raw)

    experiment = cfg.get("experiment")
    if experiment is None:
        _fail("experiment", "missing required field")
    if experiment not in EXPERIMENTS + INSPECT_COMMANDS:
        _fail(
            "experiment",
            f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS + INSPECT_COMMANDS}",
        )

    has_coupling = cfg.get("coupling") is not None
    has_direct = cfg.get("chi") is not None or cfg.get("gamma") is not None
    if has_coupling and has_direct:
        raise ConfigError(
            "coupling, chi/gamma: exactly one of a coupling matrix or direct "
            "(chi, gamma) may be given, got both"
        )
    if not has_coupling and not has_direct:
        raise ConfigError("coupling, chi/gamma: one of them is required")
    if has_coupling:
        coupling = cfg["coupling"]
        if not isinstance(coupling, (list, tuple)) or len(coupling) != 9:
            _fail("coupling", "expected a 9-element row-major array")
        cfg["coupling"] = [float(x) for x in coupling]
    else:
        _require_number(cfg, "chi", lo=0.0)
        if cfg["chi"] == 0.0:
            _fail("chi", "must be > 0")
        _require_number(cfg, "gamma", lo=0.0, hi=1.0)

    cfg["n_spins"] = _require_number(cfg, "n_spins", lo=1, integer=True)
    cfg["seed"] = _require_number(cfg, "seed", lo=0, integer=True)
    cfg["workers"] = _require_number(cfg, "workers", lo=1, integer=True)

    initial = cfg.get("initial")
    if isinstance(initial, (list, tuple)) and len(initial) == 2:
        initial = {"theta": initial[0], "phi": initial[1]}
    if not isinstance(initial, dict) or set(initial) != {"theta", "phi"}:
        _fail("initial", 'expected {"theta": ..., "phi": ...} or a [theta, phi] pair')
    theta = _require_number(initial, "theta", lo=0.0, hi=math.pi)
    phi = _require_number(initial, "phi", lo=0.0)
    if phi >= 2.0 * math.pi:
        _fail("initial.phi", f"must be < 2*pi, got {phi}")
    cfg["initial"] = {"theta": theta, "phi": phi}

    if cfg.get("horizon") is not None:
        cfg["horizon"] = _require_number(cfg, "horizon", lo=0.0)
    if cfg.get("grid_points") is not None:
        cfg["grid_points"] = _require_number(cfg, "grid_points", lo=100, integer=True)
    if cfg["axis"] not in ("x", "y", "z"):
        _fail("axis", f"must be one of x, y, z, got {cfg['axis']!r}")
    if cfg["branch"] not in ("A", "B"):
        _fail("branch", f"must be A or B, got {cfg['branch']!r}")
    cfg["max_step"] = _require_number(cfg, "max_step", lo=0.0)
    if cfg["max_step"] == 0.0:
        _fail("max_step", "must be > 0")
    if cfg.get("cycles") is not None:
        cfg["cycles"] = _require_number(cfg, "cycles", lo=1, integer=True)
    if cfg.get("total_time") is not None:
        cfg["total_time"] = _require_number(cfg, "total_time", lo=0.0)
    cfg["theta_points"] = _require_number(cfg, "theta_points", lo=2, integer=True)
    cfg["phi_points"] = _require_number(cfg, "phi_points", lo=2, integer=True)
    if cfg.get("gammas") is not None:
        if not isinstance(cfg["gammas"], (list, tuple)) or not cfg["gammas"]:
            _fail("gammas", "expected a non-empty array of gamma values")
        for i, g in enumerate(cfg["gammas"]):
            if not isinstance(g, (int, float)) or not 0.0 <= g <= 0.5:
                _fail(f"gammas[{i}]", f"must lie in [0, 0.5], got {g!r}")
        cfg["gammas"] = [float(g) for g in cfg["gammas"]]
    if not isinstance(cfg["n_grid"], (list, tuple)) or not cfg["n_grid"]:
        _fail("n_grid", "expected a non-empty array of spin counts")
    cfg["n_grid"] = [
        _require_number({"n_grid": n}, "n_grid", lo=1, integer=True) for n in cfg["n_grid"]
    ]
    if not isinstance(cfg["variants"], (list, tuple)) or not cfg["variants"]:
        _fail("variants", "expected a non-empty array")
    cfg["variants"] = list(cfg["variants"])
    cfg["n_runs"] = _require_number(cfg, "n_runs", lo=1, integer=True)

    if experiment == "noise":
        if cfg.get("channel") is None:
            _fail("channel", "missing required field for the noise experiment")
        if cfg.get("relative_sigma") is None:
            _fail("relative_sigma", "missing required field for the noise experiment")
        # the NoiseSpec constructor validates channel, scope, and sigma
        NoiseSpec(cfg["channel"], float(cfg["relative_sigma"]), cfg.get("scope"))
        cfg["relative_sigma"] = float(cfg["relative_sigma"])

    if cfg.get("output_dir") is not None and not isinstance(cfg["output_dir"], str):
        _fail("output_dir", "expected a path string")
    return cfg


def build_model(cfg: dict):
    if cfg.get("coupling") is not None:
        matrix = np.array(cfg["coupling"], dtype=float).reshape(3, 3)
        return canonicalize(CouplingMatrix(chi=matrix), cfg["n_spins"])
    return from_chi_gamma(cfg["chi"], cfg["gamma"], cfg["n_spins"])


def _config_for_descriptor(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if k in _KNOWN_KEYS}


def _summary(experiment: str, parts: dict, out_dir) -> str:
    from .experiments import _fmt

    body = " ".join(f"{k}={_fmt(v)}" for k, v in parts.items())
    return f"{experiment} {body} out={out_dir}"


def run(cfg: dict) -> int:
    """Dispatch a validated config, write outputs, print a one-line summary."""
    experiment = cfg["experiment"]
    model = build_model(cfg)
    initial = BlochAngles(theta=cfg["initial"]["theta"], phi=cfg["initial"]["phi"])

    if experiment == "canonicalize":
        print(
            f"chi={model.chi:.12g} gamma={model.gamma:.12g} "
            f"sign_flipped={str(model.sign_flipped).lower()} "
            f"dropped_constant={model.dropped_constant:.12g}"
        )
        for row in model.frame:
            print("frame: " + " ".join(f"{v: .12g}" for v in row))
        return 0

    if experiment == "design":
        design_ = design(model, cfg["axis"], cfg["branch"])
        ratio = "none" if design_.ratio_t2_t1 is None else f"{design_.ratio_t2_t1:.12g}"
        print(
            f"axis={design_.axis} branch={design_.branch} ratio_t2_t1={ratio} "
            f"chi_eff={design_.chi_eff:.12g} form={design_.effective_form} "
            f"no_pulse={str(design_.no_pulse).lower()}"
        )
        return 0

    out_dir = cfg.get("output_dir") or f"{experiment}-out"
    grid_points = cfg.get("grid_points")

    if experiment == "evolve":
        result = evolve_trace(
            model,
            initial,
            horizon=cfg.get("horizon"),
            grid_points=grid_points if grid_points else 2000,
        )
        row = result.tables["minimum"].rows[0]
        parts = {"xi2_min": row[2], "t_min": row[0]}
    elif experiment == "sweep-initial-state":
        result = sweep_initial_state(
            model,
            theta_points=cfg["theta_points"],
            phi_points=cfg["phi_points"],
            horizon=cfg.get("horizon"),
            grid_points=grid_points if grid_points else 300,
            workers=cfg["workers"],
        )
        theta0, phi0, xi2_min = result.tables["argmin"].rows[0]
        parts = {"theta0": theta0, "phi0": phi0, "xi2_min": xi2_min}
    elif experiment == "sweep-gamma":
        gammas = cfg.get("gammas") or [round(0.05 * i, 10) for i in range(11)]
        result = sweep_gamma(
            cfg["n_spins"],
            gammas,
            chi=model.chi,
            horizon=cfg.get("horizon"),
            grid_points=grid_points if grid_points else 2000,
        )
        best = min(result.tables["gamma_sweep"].rows, key=lambda r: r[1])
        parts = {"gamma_best": best[0], "xi2_min": best[1], "t_min": best[2]}
    elif experiment == "compare-pulsed":
        result = compare_pulsed(
            model, branch=cfg["branch"], max_step=cfg["max_step"], lmg_initial=initial
        )
        minima = {row[0]: row for row in result.tables["minima"].rows}
        parts = {
            "xi2_min": minima["pulsed_z"][3],
            "t_min": minima["pulsed_z"][1],
        }
    elif experiment == "scaling":
        result = scaling_study(
            model.gamma,
            cfg["n_grid"],
            variants=cfg["variants"],
            chi=model.chi,
            axis=cfg["axis"],
            branch=cfg["branch"],
            # config max_step is the per-cycle bound at N = 100; the study
            # tightens it as 1/N to keep the stroboscopic error flat
            pulsed_step_product=cfg["max_step"] * 100.0,
            grid_points=grid_points if grid_points else 2000,
        )
        parts = {
            f"slope_{row[0]}": row[1] for row in result.tables["slopes"].rows
        }
    else:  # noise
        design_ = design(model, cfg["axis"], cfg["branch"])
        noise = NoiseSpec(cfg["channel"], cfg["relative_sigma"], cfg.get("scope"))
        result = noise_monte_carlo(
            model,
            design_,
            noise,
            n_runs=cfg["n_runs"],
            seed=cfg["seed"],
            max_step=cfg["max_step"],
            total_time=cfg.get("total_time"),
            cycles=cfg.get("cycles"),
            workers=cfg["workers"],
        )
        summary = result.tables["summary"].rows[0]
        parts = {"median_xi2_min": summary[1], "noiseless_xi2_min": summary[0]}

    result.descriptor["config"] = _config_for_descriptor(cfg)
    result.descriptor["model"] = {
        "chi": model.chi,
        "gamma": model.gamma,
        "sign_flipped": model.sign_flipped,
        "n_spins": model.n_spins,
        "dropped_constant": model.dropped_constant,
    }
    result.descriptor.setdefault("rng", {})["seed"] = cfg["seed"]
    write_result(result, out_dir)
    print(_summary(experiment, parts, out_dir))
    return 0


def _add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="path to a JSON config (or descriptor.json)")
    parser.add_argument("--seed", type=int, help="root RNG seed")
    parser.add_argument("--workers", type=int, help="parallel worker cap")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--chi", type=float, help="canonical interaction strength")
    parser.add_argument("--gamma", type=float, help="anisotropy in [0, 1]")
    parser.add_argument("--n-spins", type=int, dest="n_spins", help="atom count")
    parser.add_argument(
        "--coupling",
        help="9 comma-separated row-major entries of the pairwise coupling",
    )
    parser.add_argument("--axis", choices=("x", "y", "z"), help="pulse axis")
    parser.add_argument("--branch", choices=("A", "B"), help="timing branch")
    parser.add_argument("--max-step", type=float, dest="max_step", help="N*chi*t_c bound")
    parser.add_argument("--cycles", type=int, help="explicit cycle count")
    parser.add_argument("--channel", help="noise channel name")
    parser.add_argument(
        "--relative-sigma", type=float, dest="relative_sigma", help="noise level"
    )
    parser.add_argument("--n-runs", type=int, dest="n_runs", help="Monte Carlo runs")


def _flag_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    for key in (
        "seed",
        "workers",
        "chi",
        "gamma",
        "n_spins",
        "axis",
        "branch",
        "max_step",
        "cycles",
        "channel",
        "relative_sigma",
        "n_runs",
    ):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "coupling", None) is not None:
        try:
            overrides["coupling"] = [float(x) for x in args.coupling.split(",")]
        except ValueError as exc:
            raise ConfigError(f"coupling: {exc}") from exc
    if getattr(args, "out", None) is not None:
        overrides["output_dir"] = args.out
    return overrides


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lmgsqueeze",
        description="Spin-squeezing simulator for quadratic collective-spin models",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS + INSPECT_COMMANDS:
        _add_common_flags(sub.add_parser(name))
    args = parser.parse_args(argv)

    try:
        raw = {}
        if args.config:
            with open(args.config) as fh:
                loaded = json.load(fh)
            if "tool" in loaded and "parameters" in loaded:
                loaded = loaded.get("config", loaded["parameters"])
            raw.update(loaded)
        raw.update(_flag_overrides(args))
        raw["experiment"] = args.command
        if args.command in INSPECT_COMMANDS:
            raw.setdefault("n_spins", 100)
            if "coupling" not in raw:
                raw.setdefault("chi", 1.0)
                raw.setdefault("gamma", 0.0)
        cfg = validate_config(raw)
        return run(cfg)
    except ConfigError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2
    except LmgError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # pragma: no cover
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
