"""Scenario configuration, Monte Carlo dispersion engine, and the
downrange fuel-usage sweep.

Scenario and dispersion files are TOML: SI units throughout, angles in
degrees (converted to radians at load).  Three representative scenarios
are built in as presets.  Monte Carlo runs are sequential but use
per-run RNG streams derived from (master seed, run index), so results
are reproducible and independent of execution order.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, GtlandError
from .guidance import GuidanceConfig
from .sim import (
    DisturbanceModel,
    LanderParams,
    TerminationReport,
    TrajectoryLog,
    run_closed_loop,
)


def elevation_angle(r: np.ndarray) -> float:
    """Elevation of a position above the horizontal plane of the site (rad)."""
    r = np.asarray(r, dtype=float)
    return math.atan2(r[2], math.hypot(r[0], r[1]))


@dataclass(frozen=True)
class Scenario:
    """One fully-specified closed-loop run.

    The glide-slope angle lives in ``config.phi``; a scenario with a
    positive angle must start above the cone (runs that would begin in
    violation are rejected).
    """

    name: str
    r0: np.ndarray
    v0: np.ndarray
    params: LanderParams = LanderParams()
    config: GuidanceConfig = None  # type: ignore[assignment]
    m0: float | None = None
    dt: float = 0.01
    t_max_guard: float = 400.0
    disturbance: DisturbanceModel | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "r0", np.asarray(self.r0, dtype=float))
        object.__setattr__(self, "v0", np.asarray(self.v0, dtype=float))
        if self.config is None:
            object.__setattr__(self, "config", self.params.guidance_config())
        if self.r0.shape != (3,) or self.v0.shape != (3,):
            raise ConfigError("r0 and v0 must be 3-vectors")
        if not self.r0[2] > 0.0:
            raise ConfigError("initial altitude must be positive")
        if self.config.phi > 0.0 and elevation_angle(self.r0) <= self.config.phi:
            raise ConfigError(
                f"initial position elevation {math.degrees(elevation_angle(self.r0)):.2f} deg "
                f"does not clear the glide-slope angle "
                f"{math.degrees(self.config.phi):.2f} deg")

    def run(self, law: str = "gt", *, log: bool = True,
            rng: np.random.Generator | None = None,
            ) -> tuple[TrajectoryLog, TerminationReport]:
        """Run this scenario closed loop under the given law."""
        if rng is None and self.seed is not None:
            rng = np.random.default_rng(self.seed)
        return run_closed_loop(
            self.r0, self.v0, params=self.params, config=self.config,
            law=law, disturbance=self.disturbance, dt=self.dt, m0=self.m0,
            t_max_guard=self.t_max_guard, rng=rng, log=log)


def preset(name: str) -> Scenario:
    """Built-in representative scenarios.

    scenario1: moderate downrange approach with crossrange velocity.
    scenario2: long downrange, fast lateral approach.
    scenario3: site behind the lander, 4-degree glide slope.
    """
    params = LanderParams()
    if name == "scenario1":
        return Scenario(name=name, r0=[-2500.0, 0.0, 1500.0],
                        v0=[100.0, 50.0, -75.0], params=params,
                        config=params.guidance_config())
    if name == "scenario2":
        return Scenario(name=name, r0=[-3000.0, 0.0, 1500.0],
                        v0=[0.0, 150.0, -30.0], params=params,
                        config=params.guidance_config())
    if name == "scenario3":
        return Scenario(name=name, r0=[2000.0, 0.0, 1500.0],
                        v0=[100.0, 0.0, -75.0], params=params,
                        config=params.guidance_config(phi=math.radians(4.0)))
    raise ConfigError(
        f"unknown preset {name!r}; expected scenario1, scenario2, or scenario3")


PRESET_NAMES = ("scenario1", "scenario2", "scenario3")


# ----------------------------------------------------------------------
# file loading
# ----------------------------------------------------------------------

_SCENARIO_KEYS = {"name", "r0", "v0", "phi_deg", "m0", "dt", "t_max_guard", "seed"}
_LANDER_KEYS = {"m_wet", "m_dry", "t_max", "t_min", "c", "g"}
_GUIDANCE_KEYS = {"k", "c_beta", "c_e", "delta", "c_col_lo", "c_col_hi",
                  "assume_constant_mass", "tgo_floor", "eps_x"}
_DISTURBANCE_KEYS = {"eta", "xi_sigma", "mu_deg", "lambda", "rho", "c_d", "s_ref"}


def _check_keys(table: dict, allowed: set[str], where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} in [{where}]; "
            f"allowed: {sorted(allowed)}")


def _vec3(value, where: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where} must be a 3-vector of numbers") from exc
    if arr.shape != (3,):
        raise ConfigError(f"{where} must have exactly 3 components")
    return arr


def _load_toml(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"file not found: {path}")
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def load_scenario(path) -> Scenario:
    """Load a scenario file (TOML; angles in degrees, SI otherwise).

    Unset fields default to the built-in vehicle and guidance constants.
    Unknown keys are rejected with their table path.
    """
    doc = _load_toml(path)
    _check_keys(doc, {"scenario", "lander", "guidance", "disturbance"}, "root")
    sc = doc.get("scenario")
    if sc is None:
        raise ConfigError("missing [scenario] table")
    _check_keys(sc, _SCENARIO_KEYS, "scenario")
    for req in ("r0", "v0"):
        if req not in sc:
            raise ConfigError(f"missing scenario.{req}")

    lander_tbl = doc.get("lander", {})
    _check_keys(lander_tbl, _LANDER_KEYS, "lander")
    try:
        params = LanderParams(**lander_tbl)
    except TypeError as exc:
        raise ConfigError(f"bad [lander] table: {exc}") from exc

    guidance_tbl = dict(doc.get("guidance", {}))
    _check_keys(guidance_tbl, _GUIDANCE_KEYS, "guidance")
    phi = math.radians(float(sc.get("phi_deg", 0.0)))
    config = params.guidance_config(phi=phi, **guidance_tbl)

    disturbance = None
    if "disturbance" in doc:
        dt_tbl = dict(doc["disturbance"])
        _check_keys(dt_tbl, _DISTURBANCE_KEYS, "disturbance")
        mu_deg = dt_tbl.pop("mu_deg", [0.0, 0.0, 0.0])
        lam = dt_tbl.pop("lambda", [0.0, 0.0, 0.0])
        disturbance = DisturbanceModel(
            mu=tuple(math.radians(float(a)) for a in _vec3(mu_deg, "disturbance.mu_deg")),
            lam=tuple(float(a) for a in _vec3(lam, "disturbance.lambda")),
            **dt_tbl)

    return Scenario(
        name=str(sc.get("name", Path(path).stem)),
        r0=_vec3(sc["r0"], "scenario.r0"),
        v0=_vec3(sc["v0"], "scenario.v0"),
        params=params,
        config=config,
        m0=float(sc["m0"]) if "m0" in sc else None,
        dt=float(sc.get("dt", 0.01)),
        t_max_guard=float(sc.get("t_max_guard", 400.0)),
        disturbance=disturbance,
        seed=int(sc["seed"]) if "seed" in sc else None,
    )


# ----------------------------------------------------------------------
# Monte Carlo
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DispersionSpec:
    """Distributions for dispersed runs.

    Positions and velocities are normal per axis; the thrust scale error
    eta is uniform on +/- eta_bound; per-step thrust noise is normal with
    xi_sigma; misalignment angles are uniform on +/- mu_bound_deg; gravity
    bias fractions are uniform on +/- lambda_bound.  Dispersed runs use a
    glide-slope angle phi_deg, the reference profile fraction c_beta, and
    the given drag constants.  Initial states that start at or below the
    glide-slope cone are redrawn.
    """

    r0_mean: tuple[float, float, float] = (500.0, 500.0, 1500.0)
    r0_sigma: tuple[float, float, float] = (100.0, 100.0, 100.0)
    v0_mean: tuple[float, float, float] = (100.0, 10.0, -75.0)
    v0_sigma: tuple[float, float, float] = (10.0, 5.0, 5.0)
    eta_bound: float = 0.04
    xi_sigma: float = 0.003
    mu_bound_deg: float = 0.3
    lambda_bound: float = 0.02
    phi_deg: float = 4.0
    c_beta: float = 0.85
    rho: float = 0.0274
    c_d: float = 1.0
    s_ref: float = 5.0

    def __post_init__(self) -> None:
        for name in ("r0_sigma", "v0_sigma"):
            if any(s < 0.0 for s in getattr(self, name)):
                raise ConfigError(f"{name} components must be non-negative")
        for name in ("eta_bound", "xi_sigma", "mu_bound_deg", "lambda_bound",
                     "rho", "s_ref"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"{name} must be non-negative")

    def sample(self, rng: np.random.Generator,
               max_attempts: int = 1000,
               ) -> tuple[np.ndarray, np.ndarray, DisturbanceModel]:
        """Draw one run's initial state and disturbance set, redrawing
        initial positions that start at or below the glide-slope cone.
        """
        phi = math.radians(self.phi_deg)
        mu_bound = math.radians(self.mu_bound_deg)
        for _ in range(max_attempts):
            r0 = rng.normal(self.r0_mean, self.r0_sigma)
            v0 = rng.normal(self.v0_mean, self.v0_sigma)
            eta = rng.uniform(-self.eta_bound, self.eta_bound)
            mu = tuple(rng.uniform(-mu_bound, mu_bound, 3))
            lam = tuple(rng.uniform(-self.lambda_bound, self.lambda_bound, 3))
            if r0[2] > 0.0 and elevation_angle(r0) > phi:
                return r0, v0, DisturbanceModel(
                    eta=eta, xi_sigma=self.xi_sigma, mu=mu, lam=lam,
                    rho=self.rho, c_d=self.c_d, s_ref=self.s_ref)
        raise ConfigError(
            f"could not draw a feasible initial state in {max_attempts} tries")


_DISPERSION_KEYS = {f.name for f in DispersionSpec.__dataclass_fields__.values()}


def load_dispersion(path) -> DispersionSpec:
    """Load a dispersion file (TOML, [dispersion] table, same field names
    as DispersionSpec; 3-vectors as arrays, angles in degrees)."""
    doc = _load_toml(path)
    _check_keys(doc, {"dispersion"}, "root")
    tbl = dict(doc.get("dispersion", {}))
    _check_keys(tbl, _DISPERSION_KEYS, "dispersion")
    for name in ("r0_mean", "r0_sigma", "v0_mean", "v0_sigma"):
        if name in tbl:
            tbl[name] = tuple(_vec3(tbl[name], f"dispersion.{name}"))
    try:
        return DispersionSpec(**tbl)
    except TypeError as exc:
        raise ConfigError(f"bad [dispersion] table: {exc}") from exc


@dataclass(frozen=True)
class MonteCarloSummary:
    """Aggregate of a dispersed batch."""

    n_runs: int
    n_success: int
    fuel_mean: float
    fuel_std: float
    fuel_min: float
    fuel_max: float
    worst_final_r: float
    worst_final_v: float
    min_elevation_margin_deg: float
    gamma_f_mean_deg: float
    gamma_f_min_deg: float
    gamma_f_max_deg: float
    min_theta_u_f_deg: float
    n_glide_violations: int

    def lines(self) -> list[str]:
        return [f"{name} = {getattr(self, name)}"
                for name in self.__dataclass_fields__]

    def write(self, path) -> None:
        Path(path).write_text("\n".join(self.lines()) + "\n")


def summarize(reports: list[TerminationReport], phi: float,
              n_runs: int | None = None) -> MonteCarloSummary:
    """Aggregate per-run reports (phi in rad, for the elevation margin)."""
    if not reports:
        raise GtlandError("no reports to summarize")
    n = n_runs if n_runs is not None else len(reports)
    fuel = np.array([rep.fuel_used for rep in reports])
    gamma_f = np.degrees([rep.gamma_f for rep in reports])
    return MonteCarloSummary(
        n_runs=n,
        n_success=sum(rep.landed for rep in reports),
        fuel_mean=float(fuel.mean()),
        fuel_std=float(fuel.std()),
        fuel_min=float(fuel.min()),
        fuel_max=float(fuel.max()),
        worst_final_r=max(rep.final_r for rep in reports),
        worst_final_v=max(rep.final_v for rep in reports),
        min_elevation_margin_deg=math.degrees(
            min(rep.min_elevation for rep in reports) - phi),
        gamma_f_mean_deg=float(gamma_f.mean()),
        gamma_f_min_deg=float(gamma_f.min()),
        gamma_f_max_deg=float(gamma_f.max()),
        min_theta_u_f_deg=math.degrees(min(rep.theta_u_f for rep in reports)),
        n_glide_violations=sum(rep.constraint_violated for rep in reports),
    )


def run_monte_carlo(
    spec: DispersionSpec,
    n: int,
    seed: int,
    *,
    params: LanderParams = LanderParams(),
    dt: float = 0.01,
    t_max_guard: float = 400.0,
    config_overrides: dict | None = None,
) -> tuple[MonteCarloSummary, list[TerminationReport]]:
    """Run ``n`` dispersed closed-loop descents.

    Each run draws its initial state, disturbance set, and per-step
    thrust noise from an independent stream seeded by (seed, run index),
    so the batch is reproducible and any subset can be re-run in
    isolation.  Individual failures are recorded in their reports and
    never abort the batch.
    """
    if n < 1:
        raise ConfigError("n must be at least 1")
    overrides = dict(config_overrides or {})
    overrides.setdefault("c_beta", spec.c_beta)
    overrides.setdefault("phi", math.radians(spec.phi_deg))
    config = params.guidance_config(**overrides)
    reports: list[TerminationReport] = []
    for idx in range(n):
        rng = np.random.default_rng(np.random.SeedSequence((seed, idx)))
        r0, v0, disturbance = spec.sample(rng)
        _, report = run_closed_loop(
            r0, v0, params=params, config=config, law="gt",
            disturbance=disturbance, dt=dt, t_max_guard=t_max_guard,
            rng=rng, log=False)
        reports.append(report)
    return summarize(reports, math.radians(spec.phi_deg), n), reports


# ----------------------------------------------------------------------
# downrange sweep
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    """One sweep sample: initial downrange, profile fraction, fuel."""

    x0: float
    c_beta: float
    fuel_used: float
    violated: bool
    status: str


def downrange_sweep(
    x0_values,
    c_betas=(0.85, 0.95),
    *,
    params: LanderParams = LanderParams(),
    v0: np.ndarray = (100.0, 0.0, -75.0),
    z0: float = 1500.0,
    phi_deg: float = 4.0,
    dt: float = 0.01,
    t_max_guard: float = 400.0,
) -> list[SweepRow]:
    """Fuel usage over a grid of initial downrange positions, one
    closed-loop run per (x0, c_beta) pair.

    The lander starts at [x0, 0, z0] with velocity ``v0``; positive x0
    puts the site behind the lander's initial motion.  Per-run failures
    are recorded in the row status, never raised.
    """
    x0_values = [float(x) for x in x0_values]
    if not x0_values:
        raise ConfigError("x0_values must be nonempty")
    rows: list[SweepRow] = []
    for c_beta in c_betas:
        config = params.guidance_config(
            c_beta=float(c_beta), phi=math.radians(phi_deg))
        for x0 in x0_values:
            _, report = run_closed_loop(
                np.array([x0, 0.0, z0]), np.asarray(v0, dtype=float),
                params=params, config=config, law="gt", dt=dt,
                t_max_guard=t_max_guard, log=False)
            rows.append(SweepRow(
                x0=x0, c_beta=float(c_beta), fuel_used=report.fuel_used,
                violated=report.constraint_violated, status=report.status))
    return rows


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    """Sweep table CSV: x0_m, cbeta, dm_kg, violated."""
    with open(path, "w") as fh:
        fh.write("x0_m,cbeta,dm_kg,violated\n")
        for row in rows:
            fh.write(f"{row.x0:.9g},{row.c_beta:.9g},"
                     f"{row.fuel_used:.9g},{int(row.violated)}\n")
