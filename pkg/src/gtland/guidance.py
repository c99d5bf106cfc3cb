"""Velocity-field tracking guidance.

Each step builds a site-pointing guidance frame, evaluates the desired
velocity field at the current range-to-go geometry, and commands a
feedback-linearizing acceleration that drives the velocity error to zero
on a time-to-go schedule.  An avoidance acceleration toward the
glide-slope surface is blended in when tracking degrades, and the sum is
saturated to the thrust envelope.

Two algebraically identical forms of the tracking acceleration are
provided: :func:`tracking_acceleration` (the rearranged form the flight
code uses, grouped into feedforward, feedback, and frame-motion terms)
and :func:`tracking_acceleration_chain` (direct differentiation of the
desired velocity along the flow).  Their agreement is a key invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import ConfigError, DomainError
from .velocity_field import VelocitySolution, solve_field, time_to_go

_METHOD_NAMES = {0: "newton", 1: "bisection", 2: "vertical"}

#: Desired speed below which the tracking law switches to its terminal
#: form (gravity-relief plus pure error feedback).
TERMINAL_SPEED = 1e-9


@dataclass
class LanderState:
    """Point-mass lander state in the landing frame L (origin at the
    site, z up).

    Attributes:
        r: position (m).
        v: velocity (m/s).
        m: mass (kg).
        t: time (s).
    """

    r: np.ndarray
    v: np.ndarray
    m: float
    t: float = 0.0

    def __post_init__(self) -> None:
        self.r = np.asarray(self.r, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.r.shape != (3,) or self.v.shape != (3,):
            raise DomainError("r and v must be 3-vectors")
        if not self.m > 0.0:
            raise DomainError(f"mass must be positive, got {self.m!r}")


@dataclass(frozen=True)
class GuidanceConfig:
    """Gains, thresholds, and vehicle constants of the guidance law.

    Attributes:
        k: tracking gain on the velocity error, > 1.
        c_beta: fraction of maximum thrust assumed by the reference
            profile, in (0, 1).
        c_e: velocity-error norm (m/s) above which avoidance activates.
        delta: standoff distance from the constraint surface (m).
        c_col_lo: avoidance ramp start, fraction of T_max/m.
        c_col_hi: avoidance ramp end, fraction of T_max/m.
        phi: glide-slope half-angle above horizontal (rad); 0 = flat.
        t_min: minimum thrust (N).
        t_max: maximum thrust (N).
        c: effective exhaust velocity (m/s).
        g: gravity magnitude (m/s^2).
        m_dry: structural mass (kg).
        eps_x: horizontal range (m) below which the frame is frozen and
            the field goes straight down.
        tgo_floor: lower clamp on the time-to-go estimate (s).
        tol: residual tolerance of the field angle solve.
        max_iter: Newton iterations before bisection fallback.
        assume_constant_mass: evaluate the reference profile at the
            initial mass ``m0`` instead of the measured mass (for
            vehicles without a mass estimate); the profile rate is then
            zero.
        m0: initial mass (kg) used when ``assume_constant_mass``.
        avoid_floor: floor on the remaining braking distance (m).
    """

    k: float = 2.4
    c_beta: float = 0.95
    c_e: float = 20.0
    delta: float = 5.0
    c_col_lo: float = 0.75
    c_col_hi: float = 0.95
    phi: float = 0.0
    t_min: float = 4971.8
    t_max: float = 13258.0
    c: float = 1965.0
    g: float = 3.7114
    m_dry: float = 1405.0
    eps_x: float = 1e-2
    tgo_floor: float = 1e-3
    tol: float = 1e-12
    max_iter: int = 25
    assume_constant_mass: bool = False
    m0: float = 1905.0
    avoid_floor: float = 0.1

    def __post_init__(self) -> None:
        if not self.k > 1.0:
            raise ConfigError(f"k must exceed 1, got {self.k!r}")
        if not 0.0 < self.c_beta < 1.0:
            raise ConfigError(f"c_beta must lie in (0, 1), got {self.c_beta!r}")
        if not 0.0 <= self.c_col_lo < self.c_col_hi <= 1.0:
            raise ConfigError(
                "need 0 <= c_col_lo < c_col_hi <= 1, got "
                f"{self.c_col_lo!r}, {self.c_col_hi!r}")
        if not 0.0 < self.t_min < self.t_max:
            raise ConfigError("need 0 < t_min < t_max")
        if not 0.0 <= self.phi < 0.5 * math.pi:
            raise ConfigError(f"phi must lie in [0, pi/2), got {self.phi!r}")
        if not self.c > 0.0 or not self.g > 0.0:
            raise ConfigError("c and g must be positive")
        if self.c_e <= 0.0 or self.delta < 0.0:
            raise ConfigError("need c_e > 0 and delta >= 0")

    def pack(self) -> np.ndarray:
        """Flat float64 config consumed by the compiled kernels."""
        cfg = np.empty(_kernels.N_CFG)
        cfg[_kernels.C_K] = self.k
        cfg[_kernels.C_CBETA] = self.c_beta
        cfg[_kernels.C_CE] = self.c_e
        cfg[_kernels.C_DELTA] = self.delta
        cfg[_kernels.C_CLO] = self.c_col_lo
        cfg[_kernels.C_CHI] = self.c_col_hi
        cfg[_kernels.C_PHI] = self.phi
        cfg[_kernels.C_TMIN] = self.t_min
        cfg[_kernels.C_TMAX] = self.t_max
        cfg[_kernels.C_EXH] = self.c
        cfg[_kernels.C_G] = self.g
        cfg[_kernels.C_EPSX] = self.eps_x
        cfg[_kernels.C_TGOFLOOR] = self.tgo_floor
        cfg[_kernels.C_TOL] = self.tol
        cfg[_kernels.C_MAXIT] = float(self.max_iter)
        cfg[_kernels.C_MASSMODE] = 1.0 if self.assume_constant_mass else 0.0
        cfg[_kernels.C_M0] = self.m0
        cfg[_kernels.C_AEPS] = self.avoid_floor
        return cfg


@dataclass(frozen=True)
class GuidanceFrame:
    """Site-pointing guidance frame G at one lander position.

    Attributes:
        t_gl: rotation matrix from frame L to frame G; rows are the G
            basis vectors expressed in L.
        x_go: horizontal range to the site (m), >= 0.
        z_go: site altitude minus lander altitude (m).
    """

    t_gl: np.ndarray
    x_go: float
    z_go: float

    @property
    def x_hat(self) -> np.ndarray:
        """Horizontal unit vector from lander toward the site, frame L."""
        return self.t_gl[0]

    def to_frame_g(self, vec_l: np.ndarray) -> np.ndarray:
        return self.t_gl @ np.asarray(vec_l, dtype=float)

    def to_frame_l(self, vec_g: np.ndarray) -> np.ndarray:
        return self.t_gl.T @ np.asarray(vec_g, dtype=float)


@dataclass
class FrameContext:
    """Per-trajectory memory for the degenerate-frame fallback: the last
    valid horizontal frame axis, kept while directly above the site.
    """

    x_hat: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))


@dataclass(frozen=True)
class GuidanceOutput:
    """Everything one guidance evaluation produces.

    ``u`` is the commanded thrust acceleration in frame L, inside the
    thrust envelope.  ``saturated`` is 0 when unclamped, 1 when raised to
    minimum thrust, 2 when lowered to maximum.  Vectors ``v_d`` and ``e``
    are in frame G; ``a_trk`` and ``a_col`` in frame L.
    """

    u: np.ndarray
    v_d: np.ndarray
    e: np.ndarray
    t_go_hat: float
    beta: float
    beta_dot: float
    a_trk: np.ndarray
    a_col: np.ndarray
    avoidance_active: bool
    saturated: int
    solution: VelocitySolution
    frame: GuidanceFrame


def build_frame(
    state: LanderState,
    context: FrameContext | None = None,
    eps_x: float = 1e-2,
) -> GuidanceFrame:
    """Guidance frame at the current position: x horizontal toward the
    site, z up, y completing the right-handed triad.

    Directly above the site (horizontal range below ``eps_x``) the
    horizontal direction is undefined; the frame freezes on the context's
    last valid axis (any horizontal axis works there since the desired
    velocity is vertical).  The context is updated in place otherwise.
    """
    x_go = math.hypot(state.r[0], state.r[1])
    z_go = -float(state.r[2])
    if x_go < eps_x:
        xh = context.x_hat.copy() if context is not None \
            else np.array([1.0, 0.0, 0.0])
        n = math.hypot(xh[0], xh[1])
        if n > 0.0:
            xh = np.array([xh[0] / n, xh[1] / n, 0.0])
        else:
            xh = np.array([1.0, 0.0, 0.0])
    else:
        xh = np.array([-state.r[0] / x_go, -state.r[1] / x_go, 0.0])
        if context is not None:
            context.x_hat = xh.copy()
    t_gl = np.array([
        [xh[0], xh[1], 0.0],
        [-xh[1], xh[0], 0.0],
        [0.0, 0.0, 1.0],
    ])
    return GuidanceFrame(t_gl=t_gl, x_go=x_go, z_go=z_go)


def beta_profile(m: float, config: GuidanceConfig) -> tuple[float, float]:
    """Reference thrust-to-weight ratio and its rate at mass ``m``.

    The ratio is the commanded thrust fraction of maximum over the
    current weight; its rate follows from the propellant flow that
    thrust level implies.  With ``assume_constant_mass`` the ratio is
    evaluated at the initial mass and the rate is zero.

    Raises:
        DomainError: if the ratio does not exceed 1 (cannot decelerate
            against gravity).
    """
    if not m > 0.0:
        raise DomainError(f"mass must be positive, got {m!r}")
    m_ref = config.m0 if config.assume_constant_mass else m
    beta = config.c_beta * config.t_max / (m_ref * config.g)
    if beta <= 1.0:
        raise DomainError(
            f"thrust-to-weight ratio {beta:.4f} must exceed 1; "
            "raise c_beta or t_max, or lower mass")
    beta_dot = 0.0 if config.assume_constant_mass \
        else beta * beta * config.g / config.c
    return beta, beta_dot


def desired_velocity(
    frame: GuidanceFrame,
    beta: float,
    g: float = 3.7114,
    *,
    eps_x: float = 1e-2,
) -> tuple[np.ndarray, VelocitySolution]:
    """Desired velocity in frame G at the frame's geometry: horizontal
    component toward the site, zero crossrange, vertical component from
    the field flight-path angle.
    """
    sol = solve_field(frame.x_go, frame.z_go, beta, g, vertical_range=eps_x)
    return np.array([sol.vx, 0.0, sol.vz]), sol


def jacobians(
    v_d: np.ndarray,
    x_go: float,
    z_go: float,
    beta: float,
    g: float = 3.7114,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sensitivities of the field's defining residuals at a solution.

    The residual pair (horizontal, vertical) vanishes identically on the
    field, so its velocity Jacobian, geometry Jacobian, and profile-ratio
    gradient connect desired-velocity motion to lander motion.

    Args:
        v_d: desired velocity in frame G (y component 0).
        x_go, z_go: geometry the solution was computed at.
        beta: profile thrust-to-weight ratio.
        g: gravity magnitude.

    Returns:
        (f_vd_dagger, f_rgo, f_beta): the 3x3 inverse-velocity-Jacobian
        embedding (y row/col zero), the diagonal 3x3 geometry Jacobian,
        and the 3-vector ratio gradient.

    Raises:
        DomainError: if the desired speed is not positive.
    """
    vx, vz = float(v_d[0]), float(v_d[2])
    v = math.hypot(vx, vz)
    if not v > 0.0:
        raise DomainError("desired speed must be positive for jacobians")
    fxvx = (2.0 * beta * vx * vx + 2.0 * beta * v * v - v * vz) / v
    fxvz = (2.0 * beta * vx * vz - v * vx) / v
    fzvx = (2.0 * beta * vx * vz - 2.0 * v * vx) / v
    fzvz = (2.0 * beta * vz * vz + 2.0 * beta * v * v - 4.0 * v * vz) / v
    det = fxvx * fzvz - fxvz * fzvx
    f_vd_dagger = np.array([
        [fzvz, 0.0, -fxvz],
        [0.0, 0.0, 0.0],
        [-fzvx, 0.0, fxvx],
    ]) / det
    f_rgo = np.diag([
        -(4.0 * beta * beta - 1.0) * g,
        0.0,
        -(4.0 * beta * beta - 4.0) * g,
    ])
    f_beta = np.array([
        2.0 * v * vx - 8.0 * beta * g * x_go,
        0.0,
        2.0 * v * vz - 8.0 * beta * g * z_go,
    ])
    return f_vd_dagger, f_rgo, f_beta


def velocity_jacobian(v_d: np.ndarray, beta: float) -> np.ndarray:
    """Forward velocity Jacobian of the residual pair (3x3, y zero);
    :func:`jacobians` returns the inverse of its (x, z) block.
    """
    vx, vz = float(v_d[0]), float(v_d[2])
    v = math.hypot(vx, vz)
    if not v > 0.0:
        raise DomainError("desired speed must be positive")
    fxvx = (2.0 * beta * vx * vx + 2.0 * beta * v * v - v * vz) / v
    fxvz = (2.0 * beta * vx * vz - v * vx) / v
    fzvx = (2.0 * beta * vx * vz - 2.0 * v * vx) / v
    fzvz = (2.0 * beta * vz * vz + 2.0 * beta * v * v - 4.0 * v * vz) / v
    return np.array([
        [fxvx, 0.0, fxvz],
        [0.0, 0.0, 0.0],
        [fzvx, 0.0, fzvz],
    ])


@dataclass(frozen=True)
class TrackingResult:
    """Tracking acceleration with its intermediates."""

    a_trk_g: np.ndarray
    a_trk_l: np.ndarray
    v_d: np.ndarray
    e: np.ndarray
    t_go_hat: float
    beta: float
    beta_dot: float
    solution: VelocitySolution
    frame: GuidanceFrame


def _field_state(state, frame, config):
    beta, beta_dot = beta_profile(state.m, config)
    v_d, sol = desired_velocity(frame, beta, config.g, eps_x=config.eps_x)
    v_g = frame.to_frame_g(state.v)
    e = v_d - v_g
    t_go_hat = time_to_go(sol.v_star, sol.vz, float(np.linalg.norm(e)),
                          beta, config.g, floor=config.tgo_floor)
    return beta, beta_dot, v_d, sol, v_g, e, t_go_hat


def tracking_acceleration(
    state: LanderState,
    frame: GuidanceFrame,
    config: GuidanceConfig,
) -> TrackingResult:
    """Tracking acceleration in its rearranged flight form: a feedforward
    deceleration along the desired velocity, the error feedback k/t_go,
    and the error-coupling terms from field and frame motion.
    """
    beta, beta_dot, v_d, sol, v_g, e, t_go_hat = _field_state(
        state, frame, config)
    kfb = config.k / t_go_hat
    g = config.g
    if sol.v_star > TERMINAL_SPEED:
        f_vd_dagger, f_rgo, f_beta = jacobians(
            v_d, frame.x_go, frame.z_go, beta, g)
        omega_gain = 0.0 if frame.x_go < config.eps_x else sol.vx / frame.x_go
        big_omega = np.diag([0.0, omega_gain, 0.0])
        a_g = (
            -beta * g * v_d / sol.v_star
            - f_vd_dagger @ f_beta * beta_dot
            + kfb * e
            - f_vd_dagger @ (f_rgo @ e)
            + big_omega @ e
        )
    else:
        a_g = np.array([0.0, 0.0, beta * g]) + kfb * e
    a_l = frame.to_frame_l(a_g)
    return TrackingResult(a_trk_g=a_g, a_trk_l=a_l, v_d=v_d, e=e,
                          t_go_hat=t_go_hat, beta=beta, beta_dot=beta_dot,
                          solution=sol, frame=frame)


def tracking_acceleration_chain(
    state: LanderState,
    frame: GuidanceFrame,
    config: GuidanceConfig,
) -> TrackingResult:
    """Tracking acceleration by direct differentiation: rate of the
    desired velocity along the lander's motion (through the field
    geometry and the profile ratio), plus the frame-rotation transport
    term, minus gravity, plus the error feedback.  Algebraically
    identical to :func:`tracking_acceleration`.
    """
    beta, beta_dot, v_d, sol, v_g, e, t_go_hat = _field_state(
        state, frame, config)
    kfb = config.k / t_go_hat
    g = config.g
    g_vec_g = np.array([0.0, 0.0, -g])
    if sol.v_star > TERMINAL_SPEED:
        f_vd_dagger, f_rgo, f_beta = jacobians(
            v_d, frame.x_go, frame.z_go, beta, g)
        v_d_rate = f_vd_dagger @ (f_rgo @ v_g) - f_vd_dagger @ f_beta * beta_dot
        omega_gain = 0.0 if frame.x_go < config.eps_x else v_g[1] / frame.x_go
        omega = np.array([0.0, 0.0, -omega_gain])
        a_g = v_d_rate + np.cross(omega, v_d) - g_vec_g + kfb * e
    else:
        a_g = np.array([0.0, 0.0, beta * g]) + kfb * e
    a_l = frame.to_frame_l(a_g)
    return TrackingResult(a_trk_g=a_g, a_trk_l=a_l, v_d=v_d, e=e,
                          t_go_hat=t_go_hat, beta=beta, beta_dot=beta_dot,
                          solution=sol, frame=frame)


def guidance_step(
    state: LanderState,
    config: GuidanceConfig,
    context: FrameContext | None = None,
) -> GuidanceOutput:
    """Full guidance evaluation at one state: profile ratio, frame,
    field solve, tracking acceleration, gated avoidance acceleration,
    and the composed saturated command.

    The optional ``context`` carries the frozen frame axis across calls
    of one trajectory; it is updated in place.
    """
    cfg = config.pack()
    out = np.empty(_kernels.N_OUT)
    xhat_prev = context.x_hat if context is not None \
        else np.array([1.0, 0.0, 0.0])
    _kernels.guidance_kernel(state.r, state.v, state.m, xhat_prev, cfg, out)
    x_hat = np.array([out[_kernels.O_XHAT], out[_kernels.O_XHAT + 1], 0.0])
    if context is not None:
        context.x_hat = x_hat.copy()
    t_gl = np.array([
        [x_hat[0], x_hat[1], 0.0],
        [-x_hat[1], x_hat[0], 0.0],
        [0.0, 0.0, 1.0],
    ])
    frame = GuidanceFrame(t_gl=t_gl, x_go=out[_kernels.O_XGO],
                          z_go=out[_kernels.O_ZGO])
    gamma_s = out[_kernels.O_GAMMA]
    v_s = out[_kernels.O_VSTAR]
    solution = VelocitySolution(
        v_star=v_s, gamma_star=gamma_s,
        iterations=int(out[_kernels.O_ITERS]),
        residual=out[_kernels.O_RESID],
        method=_METHOD_NAMES[int(out[_kernels.O_METHOD])])
    return GuidanceOutput(
        u=out[_kernels.O_U:_kernels.O_U + 3].copy(),
        v_d=out[_kernels.O_VD:_kernels.O_VD + 3].copy(),
        e=out[_kernels.O_E:_kernels.O_E + 3].copy(),
        t_go_hat=out[_kernels.O_TGO],
        beta=out[_kernels.O_BETA],
        beta_dot=out[_kernels.O_BETADOT],
        a_trk=out[_kernels.O_ATRK:_kernels.O_ATRK + 3].copy(),
        a_col=out[_kernels.O_ACOL:_kernels.O_ACOL + 3].copy(),
        avoidance_active=bool(out[_kernels.O_AVOID] > 0.5),
        saturated=int(out[_kernels.O_SAT]),
        solution=solution,
        frame=frame,
    )


def with_overrides(config: GuidanceConfig, **kwargs) -> GuidanceConfig:
    """Copy of ``config`` with the given fields replaced (validated)."""
    return replace(config, **kwargs)


# ----------------------------------------------------------------------
# error-decay reference rig
# ----------------------------------------------------------------------

def error_decay_closed_form(
    e0: np.ndarray, k: float, t_f: float, t: float,
) -> np.ndarray:
    """Closed-form tracking error at time ``t`` under the ideal decay
    dynamics de/dt = -(k / (t_f - t)) e from e(0) = e0: each component
    scales by ((t_f - t) / t_f)^k.
    """
    if not 0.0 <= t < t_f:
        raise DomainError("need 0 <= t < t_f")
    tau = (t_f - t) / t_f
    return np.asarray(e0, dtype=float) * tau ** k


def error_decay_rig(
    e0: np.ndarray,
    k: float,
    t_f: float,
    dt: float,
    t_end: float,
    d: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Numerically integrate the error dynamics
    de/dt = -(k / (t_f - t)) e + d with fixed-step RK4.

    A test rig: with d = 0 the result must match the closed-form decay;
    with a constant disturbance of magnitude d_max and k > 1 the error
    norm must stay within (t_go/t_f)^k |e0| + t_go d_max / (k - 1).

    Returns:
        (times, errors): errors has one row per time, columns matching e0.
    """
    if not 0.0 < t_end < t_f:
        raise DomainError("need 0 < t_end < t_f")
    if not dt > 0.0:
        raise DomainError("dt must be positive")
    e = np.asarray(e0, dtype=float).copy()
    dvec = np.zeros_like(e) if d is None else np.asarray(d, dtype=float)

    def rate(t, ev):
        return -(k / (t_f - t)) * ev + dvec

    n = int(math.floor(t_end / dt))
    times = np.empty(n + 1)
    errors = np.empty((n + 1, e.shape[0]))
    times[0] = 0.0
    errors[0] = e
    t = 0.0
    for i in range(n):
        k1 = rate(t, e)
        k2 = rate(t + 0.5 * dt, e + 0.5 * dt * k1)
        k3 = rate(t + 0.5 * dt, e + 0.5 * dt * k2)
        k4 = rate(t + dt, e + dt * k3)
        e = e + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
        times[i + 1] = t
        errors[i + 1] = e
    return times, errors
