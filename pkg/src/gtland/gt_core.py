"""Closed-form planar descent under constant thrust-to-weight, thrust
anti-parallel to velocity.

With thrust opposing the velocity at a fixed multiple ``beta`` of weight,
the planar point-mass equations reduce to quadratures in the flight-path
angle, giving speed, time, downrange, and altitude in closed form.  For
``beta > 1`` the speed reaches zero in finite time while the flight-path
angle tends to -pi/2, so the rest point of the maneuver is also in
closed form.  A fixed-step RK4 propagator of the time-domain equations
is included as an independent cross-check oracle.

Angle convention: gamma is measured from the local horizontal, negative
while descending.  Closed forms are evaluated only strictly inside
(-pi/2, pi/2); the limit values at the endpoints are handled by the
dedicated terminal formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import DomainError

_GAMMA_GUARD = 0.5 * math.pi - 1e-9


class PlanarState(NamedTuple):
    """Planar descent state sample."""

    v: float
    gamma: float
    x: float
    z: float
    t: float


class GtTerminal(NamedTuple):
    """Closed-form rest point of the maneuver (v = 0, gamma -> -pi/2)."""

    x_f: float
    z_f: float
    t_f: float


def _check_gamma_open(gamma: float, name: str = "gamma") -> None:
    if not abs(gamma) <= _GAMMA_GUARD:
        raise DomainError(
            f"{name} must lie strictly inside (-pi/2, pi/2), got {gamma!r}")


def _check_beta(beta: float) -> None:
    if not beta > 1.0:
        raise DomainError(f"beta must exceed 1, got {beta!r}")


def integration_constant(v: float, gamma: float, beta: float) -> float:
    """Constant of the speed profile passing through (v, gamma).

    Continuous at v = 0 with value 0; negative speeds are rejected.

    Args:
        v: speed (m/s), >= 0.
        gamma: flight-path angle (rad), inside (-pi/2, pi/2).
        beta: thrust-to-weight ratio, > 1.
    """
    _check_gamma_open(gamma)
    _check_beta(beta)
    if v < 0.0:
        raise DomainError(f"speed must be non-negative, got {v!r}")
    if v == 0.0:
        return 0.0
    return _kernels.gt_const(v, gamma, beta)


def indefinite_integrals(gamma: float, beta: float) -> tuple[float, float, float]:
    """Antiderivatives (F_t, F_x, F_z) evaluated at ``gamma``.

    Differences of these between two angles give elapsed time, downrange,
    and altitude change along the descent; all three tend to zero as
    gamma -> -pi/2 when beta > 1.
    """
    _check_gamma_open(gamma)
    _check_beta(beta)
    return _kernels.gt_integrals(gamma, beta)


def analytic_state_at(
    initial: PlanarState,
    gamma_query: float,
    beta: float,
    g: float = 3.7114,
) -> PlanarState:
    """Closed-form state where the descent through ``initial`` reaches
    flight-path angle ``gamma_query``.

    The flight-path angle decreases monotonically along the descent, so
    the query must not exceed the initial angle.

    Raises:
        DomainError: if gamma_query > initial.gamma, either angle is
            outside (-pi/2, pi/2), beta <= 1, or initial speed <= 0.
    """
    _check_beta(beta)
    _check_gamma_open(initial.gamma, "initial gamma")
    _check_gamma_open(gamma_query, "gamma_query")
    if gamma_query > initial.gamma:
        raise DomainError(
            "gamma_query must not exceed the initial flight-path angle "
            f"({gamma_query!r} > {initial.gamma!r})")
    if not initial.v > 0.0:
        raise DomainError(f"initial speed must be positive, got {initial.v!r}")
    if not g > 0.0:
        raise DomainError(f"g must be positive, got {g!r}")
    const = _kernels.gt_const(initial.v, initial.gamma, beta)
    ft0, fx0, fz0 = _kernels.gt_integrals(initial.gamma, beta)
    ft1, fx1, fz1 = _kernels.gt_integrals(gamma_query, beta)
    c2g = const * const / g
    return PlanarState(
        v=_kernels.gt_speed(gamma_query, beta, const),
        gamma=gamma_query,
        x=initial.x - c2g * (fx1 - fx0),
        z=initial.z - c2g * (fz1 - fz0),
        t=initial.t - (const / g) * (ft1 - ft0),
    )


def terminal_values(
    initial: PlanarState,
    beta: float,
    g: float = 3.7114,
) -> GtTerminal:
    """Closed-form rest point: where and when the speed reaches zero.

    Valid for any |gamma| <= pi/2 including the exact vertical case, and
    for zero initial speed (already at rest).
    """
    _check_beta(beta)
    if not abs(initial.gamma) <= 0.5 * math.pi:
        raise DomainError(
            f"gamma must lie in [-pi/2, pi/2], got {initial.gamma!r}")
    if initial.v < 0.0:
        raise DomainError(f"speed must be non-negative, got {initial.v!r}")
    if not g > 0.0:
        raise DomainError(f"g must be positive, got {g!r}")
    b = beta
    s0 = math.sin(initial.gamma)
    c0 = math.cos(initial.gamma)
    v02 = initial.v * initial.v
    x_f = initial.x + v02 * (2.0 * b * c0 - s0 * c0) / ((4.0 * b * b - 1.0) * g)
    z_f = initial.z + v02 * (2.0 * b * s0 - s0 * s0 - 1.0) / ((4.0 * b * b - 4.0) * g)
    t_f = initial.t + initial.v * (b - s0) / ((b * b - 1.0) * g)
    return GtTerminal(x_f=x_f, z_f=z_f, t_f=t_f)


def planar_propagate(
    initial: PlanarState,
    beta: float,
    g: float = 3.7114,
    dt: float = 1e-3,
    *,
    stop_speed: float = 0.0,
    stop_gamma: float | None = None,
    max_steps: int = 2_000_000,
) -> np.ndarray:
    """Independent fixed-step RK4 integration of the planar time-domain
    equations of motion, for cross-checking the closed forms.

    Stops when gamma crosses ``stop_gamma`` if given, else when the speed
    crosses ``stop_speed`` (0.0 integrates to rest); the final step is
    bisected onto the crossing.

    Returns:
        Array with rows (t, v, gamma, x, z), initial state included.

    Raises:
        DomainError: if the stop condition is not reached in max_steps.
    """
    _check_beta(beta)
    _check_gamma_open(initial.gamma, "initial gamma")
    if not initial.v > 0.0:
        raise DomainError(f"initial speed must be positive, got {initial.v!r}")
    if not dt > 0.0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    if stop_gamma is not None:
        _check_gamma_open(stop_gamma, "stop_gamma")
        mode, value = 1, float(stop_gamma)
    else:
        if stop_speed < 0.0:
            raise DomainError("stop_speed must be non-negative")
        mode, value = 0, float(stop_speed)
    traj, n, status = _kernels.planar_run(
        initial.v, initial.gamma, initial.x, initial.z, initial.t,
        beta, g, dt, mode, value, max_steps)
    if status != 0:
        raise DomainError(
            "numeric propagation did not reach the stop condition "
            f"within {max_steps} steps")
    return traj[:n].copy()


@dataclass(frozen=True)
class PlanarDescent:
    """One planar constant-``beta`` descent, fixed by its initial state.

    Thin object wrapper over the module functions for callers that hold
    a descent and query it repeatedly.

    Attributes:
        v0: initial speed (m/s), > 0.
        gamma0: initial flight-path angle (rad), inside (-pi/2, pi/2).
        beta: thrust-to-weight ratio, > 1.
        x0: initial downrange position (m).
        z0: initial altitude (m).
        t0: initial time (s).
        g: gravity magnitude (m/s^2), > 0.
    """

    v0: float
    gamma0: float
    beta: float
    x0: float = 0.0
    z0: float = 0.0
    t0: float = 0.0
    g: float = 3.7114

    def __post_init__(self) -> None:
        _check_beta(self.beta)
        _check_gamma_open(self.gamma0, "gamma0")
        if not self.v0 > 0.0:
            raise DomainError(f"v0 must be positive, got {self.v0!r}")
        if not self.g > 0.0:
            raise DomainError(f"g must be positive, got {self.g!r}")

    @property
    def initial(self) -> PlanarState:
        return PlanarState(v=self.v0, gamma=self.gamma0,
                           x=self.x0, z=self.z0, t=self.t0)

    @property
    def constant(self) -> float:
        """Speed-profile constant through the initial state."""
        return _kernels.gt_const(self.v0, self.gamma0, self.beta)

    def speed(self, gamma: float) -> float:
        """Speed at flight-path angle ``gamma``."""
        _check_gamma_open(gamma)
        return _kernels.gt_speed(gamma, self.beta, self.constant)

    def state(self, gamma: float) -> PlanarState:
        """Full state at flight-path angle ``gamma`` (<= gamma0)."""
        return analytic_state_at(self.initial, gamma, self.beta, self.g)

    def terminal(self) -> GtTerminal:
        """Closed-form rest point of this descent."""
        return terminal_values(self.initial, self.beta, self.g)

    def sample(self, gammas) -> np.ndarray:
        """States at many query angles; rows are (t, v, gamma, x, z)."""
        out = np.empty((len(np.atleast_1d(gammas)), 5))
        for i, gm in enumerate(np.atleast_1d(gammas)):
            st = self.state(float(gm))
            out[i] = (st.t, st.v, st.gamma, st.x, st.z)
        return out

    def propagate_numeric(self, dt: float = 1e-3, **kwargs) -> np.ndarray:
        """RK4 cross-check propagation from the initial state."""
        return planar_propagate(self.initial, self.beta, self.g, dt, **kwargs)
