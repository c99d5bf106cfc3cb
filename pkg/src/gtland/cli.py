"""Command-line front end.

Subcommands:

* ``run`` - fly one scenario (preset name or TOML file) closed loop and
  write the trajectory CSV.
* ``montecarlo`` - dispersed batch; writes the summary statistics file.
* ``sweep`` - fuel-usage sweep over initial downrange position; writes
  the sweep table CSV.
* ``verify`` - run the acceptance checks and report pass/fail lines.

Exit codes: 0 success; 2 configuration/usage error; 3 a commanded run
ended in impact/fuel-exhaustion/timeout (or, for batches, not every run
landed); 4 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import re
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, GtlandError
from .harness import (
    PRESET_NAMES,
    DispersionSpec,
    Scenario,
    downrange_sweep,
    load_dispersion,
    load_scenario,
    preset,
    run_monte_carlo,
    write_sweep_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUN_FAILED = 3
EXIT_VERIFY_FAILED = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gtland",
        description="Gravity-turn pinpoint landing guidance toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser(
        "run", help="fly one scenario closed loop")
    p_run.add_argument(
        "scenario",
        help="scenario TOML file, or a preset name "
             f"({', '.join(PRESET_NAMES)})")
    p_run.add_argument(
        "--law", choices=("gt", "zemzev"), default="gt",
        help="guidance law (default: gt)")
    p_run.add_argument(
        "--dt", type=float, default=None, metavar="S",
        help="integration step override in seconds")
    p_run.add_argument(
        "--out", type=Path, default=None, metavar="DIR",
        help="directory for the trajectory CSV")

    p_mc = sub.add_parser(
        "montecarlo", help="dispersed Monte Carlo batch")
    p_mc.add_argument(
        "--n", type=int, default=1000, metavar="N",
        help="number of dispersed runs (default: 1000)")
    p_mc.add_argument(
        "--seed", type=int, default=0, metavar="S",
        help="master RNG seed (default: 0)")
    p_mc.add_argument(
        "--spec", type=Path, default=None, metavar="FILE",
        help="dispersion TOML file (default: built-in dispersions)")
    p_mc.add_argument(
        "--out", type=Path, default=None, metavar="DIR",
        help="directory for the summary file")

    p_sweep = sub.add_parser(
        "sweep", help="fuel usage over initial downrange position")
    p_sweep.add_argument(
        "--x0", default="-3000:500:250", metavar="A:B:STEP",
        help="inclusive downrange grid in meters (default: -3000:500:250; "
             "use --x0=-3000:0:250 form when A is negative)")
    p_sweep.add_argument(
        "--cbeta", default="0.85,0.95", metavar="LIST",
        help="comma-separated thrust-ratio scale factors "
             "(default: 0.85,0.95)")
    p_sweep.add_argument(
        "--out", type=Path, default=None, metavar="DIR",
        help="directory for the sweep CSV")

    p_verify = sub.add_parser(
        "verify", help="run the acceptance checks")
    p_verify.add_argument(
        "--only", default=None, metavar="LIST",
        help="comma-separated subset of check ids")
    p_verify.add_argument(
        "--mc-runs", type=int, default=None, metavar="N",
        help="Monte Carlo run count override for the montecarlo check")
    return parser


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--x0 expects A:B:STEP, got {text!r}")
    try:
        a, b, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"--x0 expects numeric A:B:STEP, got {text!r}")
    if step <= 0.0:
        raise ConfigError(f"--x0 step must be positive, got {step}")
    if b < a:
        raise ConfigError(f"--x0 grid is empty: {a} > {b}")
    return np.arange(a, b + 0.5 * step, step)


def _parse_floats(text: str, option: str) -> tuple[float, ...]:
    try:
        values = tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"{option} expects comma-separated numbers, "
                          f"got {text!r}")
    if not values:
        raise ConfigError(f"{option} got an empty list")
    return values


def _load_run_scenario(arg: str) -> Scenario:
    path = Path(arg)
    if path.is_file():
        return load_scenario(path)
    if arg in PRESET_NAMES:
        return preset(arg)
    raise ConfigError(
        f"{arg!r} is neither a scenario file nor a preset "
        f"({', '.join(PRESET_NAMES)})")


def _safe_name(name: str) -> str:
    return re.sub(r"[^-._A-Za-z0-9]+", "_", name) or "scenario"


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = _load_run_scenario(args.scenario)
    if args.dt is not None:
        scenario = dataclasses.replace(scenario, dt=args.dt)
    log, report = scenario.run(law=args.law)
    print(f"scenario        = {scenario.name}")
    print(f"law             = {args.law}")
    print(f"status          = {report.status}")
    print(f"t_f             = {report.t_f:.3f} s")
    print(f"fuel_used       = {report.fuel_used:.3f} kg")
    print(f"m_f             = {report.m_f:.3f} kg")
    print(f"final_r         = {report.final_r:.4g} m")
    print(f"final_v         = {report.final_v:.4g} m/s")
    print(f"gamma_f         = {math.degrees(report.gamma_f):.2f} deg")
    print(f"theta_u_f       = {math.degrees(report.theta_u_f):.2f} deg")
    print(f"min_elevation   = {math.degrees(report.min_elevation):.2f} deg")
    print(f"glide_violated  = {'yes' if report.constraint_violated else 'no'}")
    print(f"n_steps         = {report.n_steps}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        csv_path = args.out / f"{_safe_name(scenario.name)}_trajectory.csv"
        log.write_csv(csv_path)
        print(f"trajectory_csv  = {csv_path}")
    return EXIT_OK if report.landed else EXIT_RUN_FAILED


def _cmd_montecarlo(args: argparse.Namespace) -> int:
    spec = load_dispersion(args.spec) if args.spec else DispersionSpec()
    summary, _ = run_monte_carlo(spec, args.n, args.seed)
    for line in summary.lines():
        print(line)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        out_path = args.out / "mc_summary.txt"
        summary.write(out_path)
        print(f"summary_file = {out_path}")
    return EXIT_OK if summary.n_success == summary.n_runs \
        else EXIT_RUN_FAILED


def _cmd_sweep(args: argparse.Namespace) -> int:
    x0_values = _parse_grid(args.x0)
    c_betas = _parse_floats(args.cbeta, "--cbeta")
    rows = downrange_sweep(x0_values, c_betas=c_betas)
    print("x0_m,cbeta,dm_kg,violated")
    for row in rows:
        print(f"{row.x0:.9g},{row.c_beta:.9g},{row.fuel_used:.9g},"
              f"{int(row.violated)}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        csv_path = args.out / "sweep.csv"
        write_sweep_csv(rows, csv_path)
        print(f"sweep_csv = {csv_path}")
    all_landed = all(row.status == "landed" for row in rows)
    return EXIT_OK if all_landed else EXIT_RUN_FAILED


def _cmd_verify(args: argparse.Namespace) -> int:
    from . import verification

    only = None
    if args.only is not None:
        only = [p.strip() for p in args.only.split(",") if p.strip()]
        if not only:
            raise ConfigError("--only got an empty list")
    try:
        results = verification.run_checks(only=only, mc_runs=args.mc_runs)
    except ValueError as exc:  # unknown check id
        raise ConfigError(str(exc))
    for result in results:
        print(result.line())
    n_failed = sum(not r.passed for r in results)
    print(f"{len(results) - n_failed}/{len(results)} checks passed")
    return EXIT_OK if n_failed == 0 else EXIT_VERIFY_FAILED


_COMMANDS = {
    "run": _cmd_run,
    "montecarlo": _cmd_montecarlo,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"gtland: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GtlandError as exc:
        print(f"gtland: error: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILED


if __name__ == "__main__":
    sys.exit(main())
