"""Desired-velocity field over range-to-go geometry.

Every point with horizontal range ``x_go`` to the site and signed
height-to-go ``z_go`` (negative while above the site) admits exactly one
planar descent of the closed-form family that ends at the site with zero
speed.  Its current speed and flight-path angle define the desired
velocity there.  The flight-path angle solves a scalar root problem with
a strictly increasing residual, so Newton from the line-of-sight angle
converges in a few iterations and bisection is a guaranteed fallback.
Directly above the site the solution degenerates to a straight-down
descent with a closed-form speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _kernels
from .errors import DomainError

_GAMMA_GUARD = 0.5 * math.pi - 1e-9

#: Horizontal range (m) below which the geometry counts as directly above
#: the site and the straight-down branch is used.
VERTICAL_RANGE = 1e-2


def _check_beta(beta: float) -> None:
    if not beta > 1.0:
        raise DomainError(f"beta must exceed 1, got {beta!r}")


@dataclass(frozen=True)
class VelocitySolution:
    """Desired velocity at one range-to-go geometry.

    Attributes:
        v_star: desired speed (m/s), >= 0.
        gamma_star: desired flight-path angle (rad), in [-pi/2, pi/2].
        iterations: Newton iterations spent (0 on the vertical branch).
        residual: root-function value at the returned angle.
        method: "newton", "bisection", or "vertical".
    """

    v_star: float
    gamma_star: float
    iterations: int
    residual: float
    method: str

    @property
    def vx(self) -> float:
        """Horizontal component toward the site (frame G x)."""
        return self.v_star * math.cos(self.gamma_star)

    @property
    def vz(self) -> float:
        """Vertical component (frame G z, negative descending)."""
        return self.v_star * math.sin(self.gamma_star)


_METHOD_NAMES = {0: "newton", 1: "bisection", 2: "vertical"}


def h_value(gamma: float, x_go: float, z_go: float, beta: float) -> float:
    """Root function of the field angle solve; strictly increasing in
    ``gamma`` with exactly one sign change on (-pi/2, pi/2) when x_go > 0.
    """
    _check_beta(beta)
    if not x_go > 0.0:
        raise DomainError(f"x_go must be positive, got {x_go!r}")
    if not abs(gamma) <= _GAMMA_GUARD:
        raise DomainError("gamma outside (-pi/2, pi/2)")
    fourb2 = 4.0 * beta * beta
    kappa = (fourb2 - 4.0) * z_go / ((fourb2 - 1.0) * x_go)
    return _kernels.field_h(gamma, kappa, beta)


def h_slope(gamma: float, beta: float) -> float:
    """Derivative of :func:`h_value` in ``gamma``; strictly positive."""
    _check_beta(beta)
    if not abs(gamma) <= _GAMMA_GUARD:
        raise DomainError("gamma outside (-pi/2, pi/2)")
    return _kernels.field_dh(gamma, beta)


def solve_gamma(
    x_go: float,
    z_go: float,
    beta: float,
    g: float = 3.7114,
    tol: float = 1e-12,
    max_iter: int = 25,
) -> VelocitySolution:
    """Desired velocity at geometry (x_go, z_go) with x_go > 0.

    Newton iteration warm-started from the line-of-sight angle
    atan2(z_go, x_go), iterates clamped inside the open interval; if the
    residual tolerance is not met within ``max_iter`` iterations, a
    bisection on the bracketing interval finishes (the residual is
    strictly increasing, so a bracket always exists).

    Args:
        x_go: horizontal range to the site (m), > 0.
        z_go: site altitude minus lander altitude (m); negative above.
        beta: thrust-to-weight ratio of the reference profile, > 1.
        g: gravity magnitude (m/s^2).
        tol: residual tolerance |h| of the angle solve.
        max_iter: Newton iterations before the bisection fallback.

    Raises:
        DomainError: on x_go <= 0, beta <= 1, or g <= 0.
    """
    _check_beta(beta)
    if not x_go > 0.0:
        raise DomainError(
            f"x_go must be positive (use solve_vertical above the site), "
            f"got {x_go!r}")
    if not g > 0.0:
        raise DomainError(f"g must be positive, got {g!r}")
    gamma, iters, resid, method = _kernels.solve_gamma_kernel(
        x_go, z_go, beta, tol, max_iter)
    v = _kernels.vstar_kernel(gamma, x_go, beta, g)
    return VelocitySolution(v_star=v, gamma_star=gamma,
                            iterations=int(iters), residual=resid,
                            method=_METHOD_NAMES[int(method)])


def solve_vertical(z_go: float, beta: float, g: float = 3.7114) -> VelocitySolution:
    """Desired velocity directly above the site: straight down at the
    speed a vertical descent needs to reach rest over the drop |z_go|.

    Raises:
        DomainError: if z_go > 0 (site above the lander) or beta <= 1.
    """
    _check_beta(beta)
    if z_go > 0.0:
        raise DomainError(
            f"vertical branch needs the site below the lander, got z_go={z_go!r}")
    if not g > 0.0:
        raise DomainError(f"g must be positive, got {g!r}")
    v = _kernels.vertical_vstar_kernel(z_go, beta, g)
    return VelocitySolution(v_star=v, gamma_star=-0.5 * math.pi,
                            iterations=0, residual=0.0, method="vertical")


def solve_field(
    x_go: float,
    z_go: float,
    beta: float,
    g: float = 3.7114,
    *,
    tol: float = 1e-12,
    max_iter: int = 25,
    vertical_range: float = VERTICAL_RANGE,
) -> VelocitySolution:
    """Dispatch between the general and straight-down branches on the
    horizontal range threshold ``vertical_range``.
    """
    if x_go < 0.0:
        raise DomainError(f"x_go must be non-negative, got {x_go!r}")
    if x_go < vertical_range:
        return solve_vertical(min(z_go, 0.0), beta, g)
    return solve_gamma(x_go, z_go, beta, g, tol, max_iter)


def time_to_go_on_field(
    solution: VelocitySolution,
    beta: float,
    g: float = 3.7114,
) -> float:
    """Nominal remaining flight time of the descent through the solution
    state: v* (beta - sin gamma*) / ((beta^2 - 1) g), >= 0.
    """
    _check_beta(beta)
    if not g > 0.0:
        raise DomainError(f"g must be positive, got {g!r}")
    return solution.v_star * (beta - math.sin(solution.gamma_star)) \
        / ((beta * beta - 1.0) * g)


def time_to_go(
    v_star: float,
    vz_star: float,
    e_norm: float,
    beta: float,
    g: float = 3.7114,
    *,
    floor: float = 1e-3,
) -> float:
    """Time-to-go estimate used by the tracking gain: the nominal field
    time plus a margin proportional to the velocity-error magnitude,
    clamped from below by ``floor``.
    """
    _check_beta(beta)
    if e_norm < 0.0:
        raise DomainError("e_norm must be non-negative")
    return _kernels.tgo_kernel(v_star, vz_star, e_norm, beta, g, floor)
