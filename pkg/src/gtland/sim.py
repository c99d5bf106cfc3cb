"""Closed-loop three-degree-of-freedom descent simulator.

Point-mass translational dynamics with mass depletion, a realistic
delivered-thrust model (scale error, per-step instability noise,
mounting misalignment), optional gravity bias and aerodynamic drag, and
two guidance laws: the velocity-field tracking law of
:mod:`gtland.guidance` and an energy-optimal miss/velocity-nulling
baseline.  Integration is fixed-step RK4 with the commanded thrust held
constant across each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, DomainError
from .guidance import GuidanceConfig, LanderState

_STATUS_NAMES = {
    _kernels.STATUS_LANDED: "landed",
    _kernels.STATUS_IMPACT: "impact",
    _kernels.STATUS_FUEL: "fuel_exhausted",
    _kernels.STATUS_TIMEOUT: "timeout",
}

LAW_CODES = {"gt": 0, "zemzev": 1}


@dataclass(frozen=True)
class LanderParams:
    """Vehicle constants.

    Defaults describe a Mars-lander-class vehicle: 1905 kg wet, 1405 kg
    dry, 13258 N maximum thrust with a 4971.8 N floor, 1965 m/s
    effective exhaust velocity, 3.7114 m/s^2 gravity.
    """

    m_wet: float = 1905.0
    m_dry: float = 1405.0
    t_max: float = 13258.0
    t_min: float = 4971.8
    c: float = 1965.0
    g: float = 3.7114

    def __post_init__(self) -> None:
        if not 0.0 < self.m_dry < self.m_wet:
            raise ConfigError("need 0 < m_dry < m_wet")
        if not 0.0 < self.t_min < self.t_max:
            raise ConfigError("need 0 < t_min < t_max")
        if not self.c > 0.0 or not self.g > 0.0:
            raise ConfigError("c and g must be positive")

    def guidance_config(self, **overrides) -> GuidanceConfig:
        """GuidanceConfig sharing this vehicle's constants."""
        base = dict(t_min=self.t_min, t_max=self.t_max, c=self.c,
                    g=self.g, m_dry=self.m_dry, m0=self.m_wet)
        base.update(overrides)
        return GuidanceConfig(**base)


@dataclass(frozen=True)
class DisturbanceModel:
    """Realized disturbance set for one run.

    Delivered thrust is m (1 + eta + xi_k) M u with ``eta`` a constant
    scale error, ``xi_k`` zero-mean per-step noise of standard deviation
    ``xi_sigma``, and ``M`` the mounting misalignment rotation built from
    the 1-2-3 Euler angles ``mu`` (rad).  ``lam`` is a gravity bias as a
    fraction of g per axis.  Drag is quadratic with constants rho (kg/m^3),
    c_d, s_ref (m^2), opposing velocity, divided by current mass.
    """

    eta: float = 0.0
    xi_sigma: float = 0.0
    mu: tuple[float, float, float] = (0.0, 0.0, 0.0)
    lam: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rho: float = 0.0
    c_d: float = 0.0
    s_ref: float = 0.0

    def __post_init__(self) -> None:
        if self.xi_sigma < 0.0:
            raise ConfigError("xi_sigma must be non-negative")
        if self.rho < 0.0 or self.s_ref < 0.0:
            raise ConfigError("rho and s_ref must be non-negative")

    def rotation(self) -> np.ndarray:
        """Misalignment rotation M = R1(mu1) R2(mu2) R3(mu3)."""
        a1, a2, a3 = self.mu
        c1, s1 = math.cos(a1), math.sin(a1)
        c2, s2 = math.cos(a2), math.sin(a2)
        c3, s3 = math.cos(a3), math.sin(a3)
        r1 = np.array([[1.0, 0.0, 0.0], [0.0, c1, -s1], [0.0, s1, c1]])
        r2 = np.array([[c2, 0.0, s2], [0.0, 1.0, 0.0], [-s2, 0.0, c2]])
        r3 = np.array([[c3, -s3, 0.0], [s3, c3, 0.0], [0.0, 0.0, 1.0]])
        return r1 @ r2 @ r3

    def gravity_accel(self, g: float) -> np.ndarray:
        """Total constant acceleration: nominal gravity plus bias."""
        lx, ly, lz = self.lam
        return np.array([g * lx, g * ly, g * lz - g])

    @property
    def drag_constant(self) -> float:
        """rho c_d s_ref / 2, multiplying |v| v / m in the dynamics."""
        return 0.5 * self.rho * self.c_d * self.s_ref


@dataclass(frozen=True)
class TerminationReport:
    """How a closed-loop run ended.

    ``status`` is one of "landed", "impact", "fuel_exhausted",
    "timeout".  ``constraint_violated`` flags an excursion below the
    glide-slope angle (positions closer than 0.1 m to the site are
    exempt, where the elevation angle loses meaning).
    """

    status: str
    landed: bool
    t_f: float
    fuel_used: float
    final_r: float
    final_v: float
    gamma_f: float
    theta_u_f: float
    min_elevation: float
    constraint_violated: bool
    n_steps: int
    m_f: float


@dataclass(frozen=True)
class TrajectoryLog:
    """Per-step record of a closed-loop run; rows follow COLUMNS."""

    data: np.ndarray

    COLUMNS = _kernels.REC_COLUMNS

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.COLUMNS.index(name)]

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def r(self) -> np.ndarray:
        return self.data[:, 1:4]

    @property
    def v(self) -> np.ndarray:
        return self.data[:, 4:7]

    @property
    def m(self) -> np.ndarray:
        return self.data[:, 7]

    @property
    def u(self) -> np.ndarray:
        return self.data[:, 8:11]

    def write_csv(self, path) -> None:
        """CSV with a header row, SI units, 9 significant digits."""
        np.savetxt(path, self.data, fmt="%.9g", delimiter=",",
                   header=",".join(self.COLUMNS), comments="")


def step_dynamics(
    state: LanderState,
    u: np.ndarray,
    params: LanderParams,
    dt: float,
    disturbance: DisturbanceModel | None = None,
    xi: float = 0.0,
) -> LanderState:
    """One RK4 step under the commanded thrust acceleration ``u``.

    The delivered thrust force m (1 + eta + xi) M u is held constant
    across the step; mass flows at its magnitude over the exhaust
    velocity.  Fuel accounting (clamping at dry mass, cutting thrust) is
    the closed-loop driver's job; this step requires m > m_dry.
    """
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    if not state.m > params.m_dry:
        raise DomainError(
            f"mass {state.m!r} must exceed dry mass {params.m_dry!r}")
    u = np.asarray(u, dtype=float)
    d = disturbance if disturbance is not None else DisturbanceModel()
    tvec = state.m * (1.0 + d.eta + xi) * (d.rotation() @ u)
    gvec = d.gravity_accel(params.g)
    rx, ry, rz, vx, vy, vz, m = _kernels.dyn_step(
        state.r[0], state.r[1], state.r[2],
        state.v[0], state.v[1], state.v[2], state.m,
        tvec[0], tvec[1], tvec[2], gvec[0], gvec[1], gvec[2],
        d.drag_constant, params.c, dt)
    return LanderState(r=np.array([rx, ry, rz]), v=np.array([vx, vy, vz]),
                       m=m, t=state.t + dt)


def zemzev_time_to_go(
    state: LanderState, g: float = 3.7114, hint: float = -1.0,
) -> float | None:
    """Largest positive real root of the baseline time-to-go quartic,
    None when no positive root exists.
    """
    tgo = _kernels.zz_quartic_tgo(
        state.r[0], state.r[1], state.r[2],
        state.v[0], state.v[1], state.v[2], g, hint)
    return tgo if tgo > 0.0 else None


def zemzev_command(
    state: LanderState, params: LanderParams, hint: float = -1.0,
) -> np.ndarray:
    """Baseline guidance command: null the predicted miss and final
    velocity over the quartic time-to-go, saturated to the thrust
    envelope; vertical brake-to-rest inside the last 0.1 s or when no
    positive root exists.
    """
    u0, u1, u2, _ = _kernels.zemzev_kernel(
        state.r, state.v, state.m, params.g,
        params.t_min, params.t_max, hint)
    return np.array([u0, u1, u2])


def run_closed_loop(
    r0: np.ndarray,
    v0: np.ndarray,
    *,
    params: LanderParams,
    config: GuidanceConfig,
    law: str = "gt",
    disturbance: DisturbanceModel | None = None,
    dt: float = 0.01,
    m0: float | None = None,
    t_max_guard: float = 400.0,
    rng: np.random.Generator | None = None,
    log: bool = True,
    x_hat0: np.ndarray | None = None,
) -> tuple[TrajectoryLog, TerminationReport]:
    """Run the descent to touchdown or failure.

    Guidance is re-evaluated every step and the commanded thrust held
    across the step (zero-order hold).  The run ends when position and
    speed enter the termination ball (|r| < 0.01 m, |v| < 0.05 m/s),
    on ground impact (r_z < 0), on fuel exhaustion (mass hitting dry
    mass cuts thrust; the run keeps propagating ballistically and is
    flagged failed), or at ``t_max_guard``.

    Args:
        r0, v0: initial position and velocity, frame L.
        params: vehicle constants.
        config: guidance configuration; its vehicle fields must agree
            with ``params``.
        law: "gt" (field tracking) or "zemzev" (baseline).
        disturbance: realized disturbance set; None runs clean.
        dt: integration and guidance step (s).
        m0: initial mass (kg), defaults to the wet mass.
        t_max_guard: hard time limit (s).
        rng: source for the per-step thrust noise when the disturbance
            has xi_sigma > 0.
        log: record the full trajectory (off saves memory in sweeps).
        x_hat0: initial frozen-frame horizontal axis override.

    Returns:
        (TrajectoryLog, TerminationReport); the log is empty when
        ``log`` is False.
    """
    if law not in LAW_CODES:
        raise ConfigError(f"unknown law {law!r}, expected one of {sorted(LAW_CODES)}")
    for name in ("t_min", "t_max", "c", "g"):
        if getattr(params, name) != getattr(config, name):
            raise ConfigError(
                f"guidance config {name}={getattr(config, name)!r} disagrees "
                f"with lander params {name}={getattr(params, name)!r}")
    if not dt > 0.0:
        raise ConfigError(f"dt must be positive, got {dt!r}")
    if not t_max_guard > 0.0:
        raise ConfigError("t_max_guard must be positive")
    r0 = np.asarray(r0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if r0.shape != (3,) or v0.shape != (3,):
        raise ConfigError("r0 and v0 must be 3-vectors")
    if not r0[2] > 0.0:
        raise ConfigError(f"initial altitude must be positive, got {r0[2]!r}")
    m_start = params.m_wet if m0 is None else float(m0)
    if not params.m_dry < m_start <= params.m_wet:
        raise ConfigError(
            f"initial mass {m_start!r} must lie in (m_dry, m_wet]")

    d = disturbance if disturbance is not None else DisturbanceModel()
    max_steps = int(round(t_max_guard / dt))
    if d.xi_sigma > 0.0:
        if rng is None:
            raise ConfigError(
                "per-step thrust noise (xi_sigma > 0) needs an rng")
        xi = rng.normal(0.0, d.xi_sigma, max_steps)
    else:
        xi = np.zeros(1)
    if x_hat0 is None:
        x_hat0 = np.array([1.0, 0.0, 0.0])
    else:
        x_hat0 = np.asarray(x_hat0, dtype=float)

    rec, n, report = _kernels.run_loop(
        LAW_CODES[law], r0, v0, m_start, params.m_dry, config.pack(),
        d.rotation(), d.eta, d.gravity_accel(params.g), d.drag_constant,
        xi, dt, max_steps, 1 if log else 0, x_hat0)

    status = int(report[_kernels.R_STATUS])
    min_elev = report[_kernels.R_MINELEV]
    violated = config.phi > 0.0 and min_elev < config.phi
    return (
        TrajectoryLog(data=rec[:n].copy()),
        TerminationReport(
            status=_STATUS_NAMES[status],
            landed=status == _kernels.STATUS_LANDED,
            t_f=report[_kernels.R_TF],
            fuel_used=report[_kernels.R_FUEL],
            final_r=report[_kernels.R_RNORM],
            final_v=report[_kernels.R_VNORM],
            gamma_f=report[_kernels.R_GAMMAF],
            theta_u_f=report[_kernels.R_THETAUF],
            min_elevation=min_elev,
            constraint_violated=violated,
            n_steps=int(report[_kernels.R_NREC]),
            m_f=report[_kernels.R_MF],
        ),
    )
