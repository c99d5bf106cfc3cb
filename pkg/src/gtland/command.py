"""Thrust-command composition under a two-sided magnitude envelope.

The avoidance acceleration is the safety-critical part of the command, so
it is passed through unreduced and the tracking acceleration only gets
the budget that remains: the largest piece of the tracking vector whose
sum with the avoidance vector stays inside the maximum-magnitude ball
without reducing the avoidance component.  The sum is then clamped into
[min, max] magnitude.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .errors import DomainError


def sat(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Clamp the magnitude of a 3-vector into [lo, hi], keeping direction.

    Raises:
        DomainError: if lo < 0, hi < lo, or x is the zero vector while
            lo > 0 (no direction to scale up along).
    """
    if lo < 0.0 or hi < lo:
        raise DomainError(f"need 0 <= lo <= hi, got lo={lo!r} hi={hi!r}")
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise DomainError(f"expected a 3-vector, got shape {x.shape}")
    if lo > 0.0 and not np.any(x):
        raise DomainError("cannot raise a zero vector to a positive magnitude")
    y0, y1, y2, _ = _kernels.sat3(x[0], x[1], x[2], lo, hi)
    return np.array([y0, y1, y2])


def sigmoid(x: float, a: float, b: float) -> float:
    """Piecewise-linear ramp: 0 at or below ``a``, 1 at or above ``b``."""
    if not b > a:
        raise DomainError(f"need a < b, got a={a!r} b={b!r}")
    return _kernels.sigmoid_kernel(x, a, b)


def fit(x: np.ndarray, y: np.ndarray, c: float) -> np.ndarray:
    """Largest piece of ``y`` addable to ``x`` within the radius-``c`` ball.

    Guarantees, for |x| <= c: |x + fit(x, y, c)| <= c, the result never
    reduces the component along ``x``, and fit(0, y, c) == sat(y, 0, c).
    When |x| > c the budget is spent and the zero vector returns.
    """
    if c < 0.0:
        raise DomainError(f"c must be non-negative, got {c!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (3,) or y.shape != (3,):
        raise DomainError("expected 3-vectors")
    z0, z1, z2 = _kernels.fit3(x[0], x[1], x[2], y[0], y[1], y[2], c)
    return np.array([z0, z1, z2])


def total_command(
    a_avoid: np.ndarray,
    a_track: np.ndarray,
    m: float,
    t_min: float,
    t_max: float,
) -> np.ndarray:
    """Compose avoidance and tracking accelerations into the commanded
    thrust acceleration, clamped to the [t_min, t_max] thrust envelope.

    When both inputs vanish the command is vertical at minimum thrust.
    """
    if not m > 0.0:
        raise DomainError(f"mass must be positive, got {m!r}")
    if t_min < 0.0 or t_max < t_min:
        raise DomainError("need 0 <= t_min <= t_max")
    a_avoid = np.asarray(a_avoid, dtype=float)
    a_track = np.asarray(a_track, dtype=float)
    f = fit(a_avoid, a_track, t_max / m)
    s = a_avoid + f
    y0, y1, y2, _ = _kernels.sat3(s[0], s[1], s[2], t_min / m, t_max / m)
    return np.array([y0, y1, y2])


def throttle(u: np.ndarray, m: float, t_max: float) -> float:
    """Commanded thrust magnitude as a fraction of maximum thrust."""
    u = np.asarray(u, dtype=float)
    return m * math.sqrt(float(u @ u)) / t_max
