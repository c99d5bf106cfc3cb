"""Glide-slope / ground avoidance acceleration.

The constraint surface is a cone of half-angle ``phi`` above the
horizontal, apex at the landing site (the ground plane when phi = 0).
Avoidance looks ahead along the straight coasting line, finds where it
would pierce the surface, and commands a braking acceleration along the
surface normal sized to stop the normal closing rate within the remaining
standoff distance.  A linear ramp on the braking magnitude keeps the
correction inactive until it approaches the thrust budget, and the whole
term is gated off while tracking is healthy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError

#: Floor (m) on the remaining braking distance.
DISTANCE_FLOOR = 0.1


def time_to_surface(r: np.ndarray, v: np.ndarray, phi: float) -> float | None:
    """Time until the coasting straight line from (r, v) meets the cone.

    Returns None when the forward ray never meets the surface.
    """
    _check_phi(phi)
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    tp = _kernels.cone_tp(r[0], r[1], r[2], v[0], v[1], v[2], phi)
    return tp if tp > 0.0 else None


def surface_normal(p: np.ndarray, phi: float) -> np.ndarray:
    """Outward unit normal of the cone at surface point ``p``.

    Straight up for a flat surface (phi = 0) or a degenerate point.
    """
    _check_phi(phi)
    p = np.asarray(p, dtype=float)
    n0, n1, n2 = _kernels.cone_normal(p[0], p[1], p[2], phi)
    return np.array([n0, n1, n2])


def braking_accel(
    r: np.ndarray,
    v: np.ndarray,
    p: np.ndarray,
    n_hat: np.ndarray,
    g: float,
    *,
    standoff: float = 5.0,
    floor: float = DISTANCE_FLOOR,
) -> np.ndarray:
    """Acceleration along ``n_hat`` that cancels gravity's pull into the
    surface and stops the normal closing rate within the remaining
    distance (minus ``standoff``); zero if already receding.
    """
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    p = np.asarray(p, dtype=float)
    n_hat = np.asarray(n_hat, dtype=float)
    b0, b1, b2 = _kernels.brake_accel(
        r[0], r[1], r[2], v[0], v[1], v[2],
        p[0], p[1], p[2], n_hat[0], n_hat[1], n_hat[2],
        standoff, floor, g)
    return np.array([b0, b1, b2])


@dataclass(frozen=True)
class AvoidanceResult:
    """Avoidance acceleration and its intermediates for one state."""

    accel: np.ndarray
    raw_accel: np.ndarray
    ramp: float
    time_to_surface: float | None
    surface_point: np.ndarray | None


def avoidance_accel(
    r: np.ndarray,
    v: np.ndarray,
    m: float,
    phi: float,
    g: float,
    t_max: float,
    *,
    standoff: float = 5.0,
    ramp_lo: float = 0.75,
    ramp_hi: float = 0.95,
    floor: float = DISTANCE_FLOOR,
) -> AvoidanceResult:
    """Ungated avoidance acceleration at one state.

    The ramp fades the braking command in linearly between ``ramp_lo``
    and ``ramp_hi`` fractions of the available thrust acceleration
    t_max / m.  Gating on tracking health is the caller's job.
    """
    _check_phi(phi)
    if not m > 0.0:
        raise DomainError(f"mass must be positive, got {m!r}")
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    tp = time_to_surface(r, v, phi)
    if tp is None:
        zero = np.zeros(3)
        return AvoidanceResult(zero, zero.copy(), 0.0, None, None)
    p = r + v * tp
    n_hat = surface_normal(p, phi)
    raw = braking_accel(r, v, p, n_hat, g, standoff=standoff, floor=floor)
    a_max = t_max / m
    ramp = _kernels.sigmoid_kernel(
        float(np.linalg.norm(raw)), ramp_lo * a_max, ramp_hi * a_max)
    return AvoidanceResult(ramp * raw, raw, ramp, tp, p)


def _check_phi(phi: float) -> None:
    if not 0.0 <= phi < 0.5 * math.pi:
        raise DomainError(f"phi must lie in [0, pi/2), got {phi!r}")
