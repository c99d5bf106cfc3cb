"""Numeric kernels shared by every module.

Everything here is scalar/3-vector float64 math written so the same source
runs either as plain Python/NumPy or compiled by numba in nopython mode
(see :mod:`gtland._accel`).  Public modules wrap these kernels with typed
dataclasses and validation; tests may also call them directly.

Conventions
-----------
* Landing frame L: origin at the landing site, z up, gravity -z.
* Guidance frame G: x toward the site horizontally, z up, y completing
  the right-handed triad; ``x_go`` is horizontal range-to-go, ``z_go``
  is (site altitude - lander altitude), negative while above the site.
* Planar descent state: speed v > 0 and flight-path angle gamma in
  (-pi/2, pi/2), measured from the local horizontal, negative descending.
"""

import math

import numpy as np

from ._accel import maybe_njit

HALF_PI = 0.5 * math.pi

# --- packed guidance-config layout (float64[18]) ---
C_K = 0          # error-feedback gain k (> 1)
C_CBETA = 1      # commanded thrust fraction of T_max used by the reference profile
C_CE = 2         # velocity-error threshold for the avoidance gate (m/s)
C_DELTA = 3      # standoff distance from the constraint surface (m)
C_CLO = 4        # lower sigmoid threshold, fraction of T_max/m
C_CHI = 5        # upper sigmoid threshold, fraction of T_max/m
C_PHI = 6        # glide-slope half-angle from horizontal (rad); 0 = flat ground
C_TMIN = 7       # minimum thrust (N)
C_TMAX = 8       # maximum thrust (N)
C_EXH = 9        # effective exhaust velocity (m/s)
C_G = 10         # gravity magnitude (m/s^2)
C_EPSX = 11      # horizontal range below which the frame/field go vertical (m)
C_TGOFLOOR = 12  # lower clamp on the time-to-go estimate (s)
C_TOL = 13       # residual tolerance of the root solve
C_MAXIT = 14     # max Newton iterations before bisection fallback
C_MASSMODE = 15  # 0: use measured mass, 1: use initial mass (constant profile)
C_M0 = 16        # initial (wet) mass used when C_MASSMODE == 1 (kg)
C_AEPS = 17      # floor on the braking distance (m)
N_CFG = 18

# --- guidance kernel output layout (float64[30]) ---
O_U = 0          # 0:3   commanded thrust acceleration, frame L (m/s^2)
O_VD = 3         # 3:6   desired velocity, frame G (m/s)
O_E = 6          # 6:9   velocity error desired-minus-actual, frame G (m/s)
O_TGO = 9        # time-to-go estimate (s)
O_BETA = 10      # thrust-to-weight ratio of the reference profile
O_BETADOT = 11   # its time derivative (1/s)
O_ATRK = 12      # 12:15 tracking acceleration, frame L (m/s^2)
O_ACOL = 15      # 15:18 avoidance acceleration, frame L (m/s^2)
O_AVOID = 18     # 1.0 when the avoidance gate was open this step
O_SAT = 19       # 0 unsaturated, 1 clamped to T_min, 2 clamped to T_max
O_GAMMA = 20     # field flight-path angle at the current geometry (rad)
O_VSTAR = 21     # field speed at the current geometry (m/s)
O_ITERS = 22     # Newton iterations spent in the root solve
O_RESID = 23     # residual at the returned root
O_METHOD = 24    # 0 Newton, 1 bisection fallback, 2 vertical branch
O_XGO = 25       # horizontal range to go (m)
O_ZGO = 26       # site altitude minus lander altitude (m)
O_XHAT = 27      # 27:30 horizontal unit vector of frame G's x axis, frame L
N_OUT = 30

# --- termination report layout (float64[10]) ---
R_STATUS = 0     # 0 landed, 1 ground impact, 2 fuel exhausted, 3 timeout
R_TF = 1         # final time (s)
R_FUEL = 2       # propellant used (kg)
R_RNORM = 3      # final position norm (m)
R_VNORM = 4      # final velocity norm (m/s)
R_GAMMAF = 5     # final flight-path angle (rad)
R_THETAUF = 6    # elevation of the last thrust command (rad)
R_MINELEV = 7    # smallest position elevation angle seen with ||r|| >= 0.1 m (rad)
R_NREC = 8       # number of guidance steps taken
R_MF = 9         # final mass (kg)
N_REPORT = 10

STATUS_LANDED = 0
STATUS_IMPACT = 1
STATUS_FUEL = 2
STATUS_TIMEOUT = 3

# trajectory record columns
REC_COLUMNS = (
    "t", "rx", "ry", "rz", "vx", "vy", "vz", "m",
    "ux", "uy", "uz", "throttle", "theta_u_deg", "gamma_deg",
    "e_norm", "avoid_flag",
)
N_REC = 16

_VEPS = 1e-12


# ----------------------------------------------------------------------
# closed-form planar gravity-turn descent
# ----------------------------------------------------------------------

@maybe_njit
def gt_integrals(gamma, beta):
    """The three antiderivatives driving time/downrange/altitude vs gamma.

    All three vanish as gamma -> -pi/2 when beta > 1.
    """
    s = math.sin(gamma)
    c = math.cos(gamma)
    sec = 1.0 / c
    tan = s / c
    w = sec + tan
    b2 = beta * beta
    f_t = (beta * sec - tan) * w ** beta / (b2 - 1.0)
    w2b = w ** (2.0 * beta)
    f_x = (2.0 * beta * sec - tan) * w2b / (4.0 * b2 - 1.0)
    f_z = (2.0 * beta * sec * tan - 2.0 * tan * tan - 1.0) * w2b / (4.0 * b2 - 4.0)
    return f_t, f_x, f_z


@maybe_njit
def gt_const(v0, gamma0, beta):
    """Trajectory constant fixing the speed profile through (v0, gamma0)."""
    c = math.cos(gamma0)
    s = math.sin(gamma0)
    sec = 1.0 / c
    return v0 / (sec * (sec + s / c) ** beta)


@maybe_njit
def gt_speed(gamma, beta, const):
    """Speed on the planar descent as a function of flight-path angle."""
    c = math.cos(gamma)
    s = math.sin(gamma)
    sec = 1.0 / c
    return const * sec * (sec + s / c) ** beta


@maybe_njit
def planar_step(v, gm, x, z, beta, grav, h):
    """One RK4 step of the planar time-domain equations of motion."""
    k1v = -grav * (beta + math.sin(gm))
    k1g = -grav * math.cos(gm) / max(v, _VEPS)
    k1x = v * math.cos(gm)
    k1z = v * math.sin(gm)

    va = v + 0.5 * h * k1v
    ga = gm + 0.5 * h * k1g
    k2v = -grav * (beta + math.sin(ga))
    k2g = -grav * math.cos(ga) / max(va, _VEPS)
    k2x = va * math.cos(ga)
    k2z = va * math.sin(ga)

    vb = v + 0.5 * h * k2v
    gb = gm + 0.5 * h * k2g
    k3v = -grav * (beta + math.sin(gb))
    k3g = -grav * math.cos(gb) / max(vb, _VEPS)
    k3x = vb * math.cos(gb)
    k3z = vb * math.sin(gb)

    vc = v + h * k3v
    gc = gm + h * k3g
    k4v = -grav * (beta + math.sin(gc))
    k4g = -grav * math.cos(gc) / max(vc, _VEPS)
    k4x = vc * math.cos(gc)
    k4z = vc * math.sin(gc)

    s = h / 6.0
    return (
        v + s * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        gm + s * (k1g + 2.0 * k2g + 2.0 * k3g + k4g),
        x + s * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        z + s * (k1z + 2.0 * k2z + 2.0 * k3z + k4z),
    )


@maybe_njit
def planar_run(v0, gamma0, x0, z0, t0, beta, grav, dt, stop_mode, stop_value,
               max_steps):
    """Propagate the planar descent with fixed-step RK4.

    stop_mode 0 stops when v crosses ``stop_value`` (bisecting the final
    step onto the crossing; use 0.0 to integrate to rest), stop_mode 1
    stops when gamma crosses ``stop_value`` the same way.  Both monitored
    quantities decrease monotonically along the descent.

    Returns (trajectory, n_rows, status) where trajectory rows are
    (t, v, gamma, x, z) and status is 0 when the stop condition fired,
    1 when max_steps ran out first.
    """
    traj = np.empty((max_steps + 1, 5))
    traj[0, 0] = t0
    traj[0, 1] = v0
    traj[0, 2] = gamma0
    traj[0, 3] = x0
    traj[0, 4] = z0
    n = 1
    v = v0
    gm = gamma0
    x = x0
    z = z0
    t = t0
    status = 1
    for _ in range(max_steps):
        v1, g1, x1, z1 = planar_step(v, gm, x, z, beta, grav, dt)
        crossed = (v1 <= stop_value) if stop_mode == 0 else (g1 <= stop_value)
        if crossed:
            lo = 0.0
            hi = dt
            vm, gmm, xm, zm = v1, g1, x1, z1
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                vm, gmm, xm, zm = planar_step(v, gm, x, z, beta, grav, mid)
                q = vm if stop_mode == 0 else gmm
                if q > stop_value:
                    lo = mid
                else:
                    hi = mid
            vm, gmm, xm, zm = planar_step(v, gm, x, z, beta, grav, hi)
            t += hi
            traj[n, 0] = t
            traj[n, 1] = vm
            traj[n, 2] = gmm
            traj[n, 3] = xm
            traj[n, 4] = zm
            n += 1
            status = 0
            break
        v, gm, x, z = v1, g1, x1, z1
        t += dt
        traj[n, 0] = t
        traj[n, 1] = v
        traj[n, 2] = gm
        traj[n, 3] = x
        traj[n, 4] = z
        n += 1
    return traj, n, status


# ----------------------------------------------------------------------
# terminal-velocity field
# ----------------------------------------------------------------------

@maybe_njit
def field_h(gm, kappa, beta):
    """Monotone residual whose root is the field flight-path angle."""
    s = math.sin(gm)
    c = math.cos(gm)
    return (2.0 * beta * s - s * s - 1.0) / ((2.0 * beta - s) * c) - kappa


@maybe_njit
def field_dh(gm, beta):
    """Derivative of the residual; strictly positive on (-pi/2, pi/2)."""
    s = math.sin(gm)
    c = math.cos(gm)
    den = (2.0 * beta - s) * c
    d = beta - s
    return (3.0 * d * d + beta * beta - 1.0) / (den * den)


@maybe_njit
def solve_gamma_kernel(x_go, z_go, beta, tol, max_iter):
    """Newton (clamped, warm-started from the line-of-sight angle) with a
    guaranteed bisection fallback.

    Returns (gamma, newton_iterations, residual, method) with method 0 when
    Newton converged and 1 when bisection finished the job.
    """
    fourb2 = 4.0 * beta * beta
    kappa = (fourb2 - 4.0) * z_go / ((fourb2 - 1.0) * x_go)
    gmin = -HALF_PI + 1e-6
    gmax = HALF_PI - 1e-6
    gm = math.atan2(z_go, x_go)
    if gm < gmin:
        gm = gmin
    elif gm > gmax:
        gm = gmax
    it = 0
    h = field_h(gm, kappa, beta)
    while abs(h) > tol and it < max_iter:
        g_next = gm - h / field_dh(gm, beta)
        if g_next < gmin:
            g_next = gmin
        elif g_next > gmax:
            g_next = gmax
        gm = g_next
        it += 1
        h = field_h(gm, kappa, beta)
    if abs(h) <= tol:
        return gm, it, h, 0
    lo = -HALF_PI + 1e-9
    hi = HALF_PI - 1e-9
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        hm = field_h(mid, kappa, beta)
        if abs(hm) <= tol:
            return mid, it, hm, 1
        if hm < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 5e-17:
            break
    mid = 0.5 * (lo + hi)
    return mid, it, field_h(mid, kappa, beta), 1


@maybe_njit
def vstar_kernel(gm, x_go, beta, grav):
    """Field speed at a solved flight-path angle (general branch)."""
    s = math.sin(gm)
    c = math.cos(gm)
    return math.sqrt((4.0 * beta * beta - 1.0) * grav * x_go / ((2.0 * beta - s) * c))


@maybe_njit
def vertical_vstar_kernel(z_go, beta, grav):
    """Field speed directly above the site (straight-down branch)."""
    drop = -z_go if z_go < 0.0 else 0.0
    return math.sqrt(2.0 * (beta - 1.0) * grav * drop)


@maybe_njit
def tgo_kernel(v_star, vz_star, e_norm, beta, grav, floor):
    """Time-to-go estimate: field time plus an error-proportional margin."""
    tgo = (beta * v_star - vz_star) / ((beta * beta - 1.0) * grav) \
        + e_norm / (beta * grav)
    return tgo if tgo > floor else floor


# ----------------------------------------------------------------------
# thrust command composition
# ----------------------------------------------------------------------

@maybe_njit
def sat3(x0, x1, x2, a, b):
    """Two-sided magnitude clamp preserving direction.

    Returns (y0, y1, y2, flag); flag 1 means the norm was raised to ``a``,
    2 means it was lowered to ``b``.  A zero vector with a > 0 has no
    direction to preserve and becomes vertical at magnitude ``a``.
    """
    n = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
    if n < a:
        if n == 0.0:
            return 0.0, 0.0, a, 1
        s = a / n
        return x0 * s, x1 * s, x2 * s, 1
    if n > b:
        s = b / n
        return x0 * s, x1 * s, x2 * s, 2
    return x0, x1, x2, 0


@maybe_njit
def sigmoid_kernel(x, a, b):
    """Linear ramp: 0 below a, 1 above b, linear in between."""
    if x <= a:
        return 0.0
    if x >= b:
        return 1.0
    return (x - a) / (b - a)


@maybe_njit
def fit3(x0, x1, x2, y0, y1, y2, c):
    """Largest piece of y that can be added to x without pushing the sum's
    norm past c or reducing its component along x.

    Three branches: x already past the budget contributes nothing; y
    opposing x keeps only its perpendicular part, clamped to the chord
    radius sqrt(c^2 - |x|^2); otherwise y is clamped to the distance from
    x's tip to the sphere of radius c along y's direction.
    """
    xn = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
    if xn > c:
        return 0.0, 0.0, 0.0
    yn = math.sqrt(y0 * y0 + y1 * y1 + y2 * y2)
    if yn == 0.0:
        return 0.0, 0.0, 0.0
    d = x0 * y0 + x1 * y1 + x2 * y2
    if d < 0.0 and xn > 0.0:
        yx = d / xn
        p0 = y0 - yx * x0 / xn
        p1 = y1 - yx * x1 / xn
        p2 = y2 - yx * x2 / xn
        cap = c * c - xn * xn
        cap = math.sqrt(cap) if cap > 0.0 else 0.0
        r0, r1, r2, _ = sat3(p0, p1, p2, 0.0, cap)
        return r0, r1, r2
    p = d / yn
    rad = p * p + c * c - xn * xn
    cap = -p + (math.sqrt(rad) if rad > 0.0 else 0.0)
    if cap < 0.0:
        cap = 0.0
    r0, r1, r2, _ = sat3(y0, y1, y2, 0.0, cap)
    return r0, r1, r2


# ----------------------------------------------------------------------
# constraint-surface avoidance
# ----------------------------------------------------------------------

@maybe_njit
def cone_tp(rx, ry, rz, vx, vy, vz, phi):
    """Time until the coasting straight-line path meets the glide-slope
    cone (the ground plane when phi == 0).  Non-positive means no forward
    intersection.
    """
    vv = vx * vx + vy * vy + vz * vz
    if vv == 0.0:
        return -1.0
    s2 = math.sin(phi) ** 2
    a_p = vz * vz - vv * s2
    b_p = rz * vz - (rx * vx + ry * vy + rz * vz) * s2
    c_p = rz * rz - (rx * rx + ry * ry + rz * rz) * s2
    if abs(a_p) < 1e-9 * vv:
        if b_p < 0.0:
            return -c_p / (2.0 * b_p)
        return -1.0
    disc = b_p * b_p - a_p * c_p
    return (-b_p - math.sqrt(abs(disc))) / a_p


@maybe_njit
def cone_normal(rx, ry, rz, phi):
    """Outward unit normal of the glide-slope cone at a surface point.

    Degenerates to straight up for phi == 0 or a vanishing point.
    """
    s2 = math.sin(phi) ** 2
    c2 = math.cos(phi) ** 2
    n0 = -rx * s2
    n1 = -ry * s2
    n2 = rz * c2
    nn = math.sqrt(n0 * n0 + n1 * n1 + n2 * n2)
    if nn < 1e-300:
        return 0.0, 0.0, 1.0
    return n0 / nn, n1 / nn, n2 / nn


@maybe_njit
def brake_accel(rx, ry, rz, vx, vy, vz, px, py, pz, n0, n1, n2,
                delta, eps, grav):
    """Acceleration that stops the approach toward the surface point in
    the remaining standoff distance (zero if already receding).

    Magnitude is gravity relief along the normal plus v_n^2 / (2 s).
    """
    w = vx * n0 + vy * n1 + vz * n2
    if w >= 0.0:
        return 0.0, 0.0, 0.0
    s = (rx - px) * n0 + (ry - py) * n1 + (rz - pz) * n2 - delta
    if s < eps:
        s = eps
    mag = grav * n2 + w * w / (2.0 * s)
    return mag * n0, mag * n1, mag * n2


# ----------------------------------------------------------------------
# full guidance step
# ----------------------------------------------------------------------

@maybe_njit
def guidance_kernel(r, v, m, xhat_prev, cfg, out):
    """One guidance evaluation: geometry, field solve, tracking command,
    avoidance command, and the composed saturated thrust acceleration.

    Writes into ``out`` (length N_OUT); see the layout constants above.
    """
    k = cfg[C_K]
    c_beta = cfg[C_CBETA]
    c_e = cfg[C_CE]
    delta = cfg[C_DELTA]
    c_lo = cfg[C_CLO]
    c_hi = cfg[C_CHI]
    phi = cfg[C_PHI]
    t_min = cfg[C_TMIN]
    t_max = cfg[C_TMAX]
    c_ex = cfg[C_EXH]
    grav = cfg[C_G]
    eps_x = cfg[C_EPSX]
    tgo_floor = cfg[C_TGOFLOOR]
    tol = cfg[C_TOL]
    max_iter = int(cfg[C_MAXIT])
    mass_mode = int(cfg[C_MASSMODE])
    m0 = cfg[C_M0]
    a_eps = cfg[C_AEPS]

    # reference thrust-to-weight profile
    m_ref = m0 if mass_mode == 1 else m
    beta = c_beta * t_max / (m_ref * grav)
    if beta <= 1.0:
        raise ValueError("thrust-to-weight ratio must exceed 1")
    beta_dot = 0.0 if mass_mode == 1 else beta * beta * grav / c_ex

    # guidance frame: x toward the site horizontally, frozen when degenerate
    x_go = math.hypot(r[0], r[1])
    z_go = -r[2]
    vertical = x_go < eps_x
    if vertical:
        xh0 = xhat_prev[0]
        xh1 = xhat_prev[1]
        nh = math.hypot(xh0, xh1)
        if nh > 0.0:
            xh0 /= nh
            xh1 /= nh
        else:
            xh0 = 1.0
            xh1 = 0.0
    else:
        xh0 = -r[0] / x_go
        xh1 = -r[1] / x_go
    yh0 = -xh1
    yh1 = xh0

    # field solve at the current geometry
    if vertical:
        gamma_s = -HALF_PI
        v_s = vertical_vstar_kernel(z_go, beta, grav)
        vx_s = 0.0
        vz_s = -v_s
        iters = 0
        resid = 0.0
        method = 2
    else:
        gamma_s, iters, resid, method = solve_gamma_kernel(
            x_go, z_go, beta, tol, max_iter)
        v_s = vstar_kernel(gamma_s, x_go, beta, grav)
        vx_s = v_s * math.cos(gamma_s)
        vz_s = v_s * math.sin(gamma_s)

    # velocity error in frame G
    vg0 = xh0 * v[0] + xh1 * v[1]
    vg1 = yh0 * v[0] + yh1 * v[1]
    vg2 = v[2]
    e0 = vx_s - vg0
    e1 = -vg1
    e2 = vz_s - vg2
    e_norm = math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
    tgo = tgo_kernel(v_s, vz_s, e_norm, beta, grav, tgo_floor)

    # tracking acceleration in frame G
    fourb2 = 4.0 * beta * beta
    ax = -(fourb2 - 1.0) * grav
    az = -(fourb2 - 4.0) * grav
    kfb = k / tgo
    if v_s > 1e-9:
        fxvx = (2.0 * beta * vx_s * vx_s + 2.0 * beta * v_s * v_s - v_s * vz_s) / v_s
        fxvz = (2.0 * beta * vx_s * vz_s - v_s * vx_s) / v_s
        fzvx = (2.0 * beta * vx_s * vz_s - 2.0 * v_s * vx_s) / v_s
        fzvz = (2.0 * beta * vz_s * vz_s + 2.0 * beta * v_s * v_s - 4.0 * v_s * vz_s) / v_s
        det = fxvx * fzvz - fzvx * fxvz
        fxb = 2.0 * v_s * vx_s - 8.0 * beta * grav * x_go
        fzb = 2.0 * v_s * vz_s - 8.0 * beta * grav * z_go
        fb_x = (fzvz * fxb - fxvz * fzb) / det
        fb_z = (-fzvx * fxb + fxvx * fzb) / det
        fe_x = (fzvz * (ax * e0) - fxvz * (az * e2)) / det
        fe_z = (-fzvx * (ax * e0) + fxvx * (az * e2)) / det
        om = 0.0 if vertical else vx_s / x_go
        ag0 = -beta * grav * vx_s / v_s - fb_x * beta_dot + kfb * e0 - fe_x
        ag1 = kfb * e1 + om * e1
        ag2 = -beta * grav * vz_s / v_s - fb_z * beta_dot + kfb * e2 - fe_z
    else:
        ag0 = kfb * e0
        ag1 = kfb * e1
        ag2 = beta * grav + kfb * e2

    at0 = ag0 * xh0 + ag1 * yh0
    at1 = ag0 * xh1 + ag1 * yh1
    at2 = ag2
    at_norm = math.sqrt(at0 * at0 + at1 * at1 + at2 * at2)

    # avoidance acceleration (gated)
    a_max = t_max / m
    ac0 = 0.0
    ac1 = 0.0
    ac2 = 0.0
    avoid = 0.0
    if e_norm >= c_e or at_norm >= a_max:
        avoid = 1.0
        tp = cone_tp(r[0], r[1], r[2], v[0], v[1], v[2], phi)
        if tp > 0.0:
            px = r[0] + v[0] * tp
            py = r[1] + v[1] * tp
            pz = r[2] + v[2] * tp
            n0, n1, n2 = cone_normal(px, py, pz, phi)
            b0, b1, b2 = brake_accel(r[0], r[1], r[2], v[0], v[1], v[2],
                                     px, py, pz, n0, n1, n2,
                                     delta, a_eps, grav)
            bmag = math.sqrt(b0 * b0 + b1 * b1 + b2 * b2)
            sig = sigmoid_kernel(bmag, c_lo * a_max, c_hi * a_max)
            ac0 = sig * b0
            ac1 = sig * b1
            ac2 = sig * b2

    # compose and saturate
    f0, f1, f2 = fit3(ac0, ac1, ac2, at0, at1, at2, a_max)
    s0 = ac0 + f0
    s1 = ac1 + f1
    s2 = ac2 + f2
    u0, u1, u2, satflag = sat3(s0, s1, s2, t_min / m, a_max)

    out[O_U] = u0
    out[O_U + 1] = u1
    out[O_U + 2] = u2
    out[O_VD] = vx_s
    out[O_VD + 1] = 0.0
    out[O_VD + 2] = vz_s
    out[O_E] = e0
    out[O_E + 1] = e1
    out[O_E + 2] = e2
    out[O_TGO] = tgo
    out[O_BETA] = beta
    out[O_BETADOT] = beta_dot
    out[O_ATRK] = at0
    out[O_ATRK + 1] = at1
    out[O_ATRK + 2] = at2
    out[O_ACOL] = ac0
    out[O_ACOL + 1] = ac1
    out[O_ACOL + 2] = ac2
    out[O_AVOID] = avoid
    out[O_SAT] = float(satflag)
    out[O_GAMMA] = gamma_s
    out[O_VSTAR] = v_s
    out[O_ITERS] = float(iters)
    out[O_RESID] = resid
    out[O_METHOD] = float(method)
    out[O_XGO] = x_go
    out[O_ZGO] = z_go
    out[O_XHAT] = xh0
    out[O_XHAT + 1] = xh1
    out[O_XHAT + 2] = 0.0


# ----------------------------------------------------------------------
# energy-optimal baseline (miss/velocity nulling with gravity compensation)
# ----------------------------------------------------------------------

@maybe_njit
def zz_quartic_tgo(rx, ry, rz, vx, vy, vz, grav, hint):
    """Largest positive real root of the time-to-go quartic
    (g^2/2) t^4 - 2|v|^2 t^2 - 12 (v.r) t - 18 |r|^2 = 0.

    Warm-starts Newton from ``hint``; otherwise brackets the top root by a
    downward grid scan from a Fujiwara-type root bound and bisects.
    Returns -1.0 when no positive root exists.
    """
    a4 = 0.5 * grav * grav
    vv = vx * vx + vy * vy + vz * vz
    rr = rx * rx + ry * ry + rz * rz
    vr = vx * rx + vy * ry + vz * rz
    a2 = -2.0 * vv
    a1 = -12.0 * vr
    a0 = -18.0 * rr

    if hint > 0.0:
        tg = hint
        ok = False
        for _ in range(30):
            p = ((a4 * tg * tg + a2) * tg + a1) * tg + a0
            dp = (4.0 * a4 * tg * tg + 2.0 * a2) * tg + a1
            if dp == 0.0:
                break
            step = p / dp
            tg -= step
            if abs(step) <= 1e-13 * max(1.0, abs(tg)):
                ok = True
                break
        if ok and tg > 0.0 and abs(tg - hint) < 5.0 + 0.5 * hint:
            dp = (4.0 * a4 * tg * tg + 2.0 * a2) * tg + a1
            if dp > 0.0:
                return tg

    m1 = math.sqrt(abs(a2) / a4)
    m2 = (abs(a1) / a4) ** (1.0 / 3.0)
    m3 = (abs(a0) / a4) ** 0.25
    bound = 2.0 * max(m1, max(m2, m3))
    if bound <= 0.0:
        return -1.0
    prev_t = bound
    prev_p = ((a4 * bound * bound + a2) * bound + a1) * bound + a0
    lo = -1.0
    hi = -1.0
    for i in range(1023, -1, -1):
        ti = bound * i / 1024.0
        pi_ = ((a4 * ti * ti + a2) * ti + a1) * ti + a0
        if pi_ <= 0.0 and prev_p > 0.0:
            lo = ti
            hi = prev_t
            break
        prev_t = ti
        prev_p = pi_
    if lo < 0.0:
        return -1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        pm = ((a4 * mid * mid + a2) * mid + a1) * mid + a0
        if pm <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@maybe_njit
def zemzev_kernel(r, v, m, grav, t_min, t_max, hint):
    """Baseline command: null predicted miss and final velocity over the
    quartic time-to-go, saturated to the thrust envelope.

    Below a 0.1 s time-to-go (or with no positive root) it degrades to a
    vertical brake-to-rest command.  Returns (u0, u1, u2, t_go).
    """
    tgo = zz_quartic_tgo(r[0], r[1], r[2], v[0], v[1], v[2], grav, hint)
    if tgo < 0.1:
        az = grav + v[2] * v[2] / (2.0 * max(r[2], 1e-2))
        u0, u1, u2, _ = sat3(0.0, 0.0, az, t_min / m, t_max / m)
        return u0, u1, u2, tgo
    zem0 = -(r[0] + v[0] * tgo)
    zem1 = -(r[1] + v[1] * tgo)
    zem2 = -(r[2] + v[2] * tgo - 0.5 * grav * tgo * tgo)
    zev0 = -v[0]
    zev1 = -v[1]
    zev2 = -(v[2] - grav * tgo)
    a0 = 6.0 * zem0 / (tgo * tgo) - 2.0 * zev0 / tgo
    a1 = 6.0 * zem1 / (tgo * tgo) - 2.0 * zev1 / tgo
    a2 = 6.0 * zem2 / (tgo * tgo) - 2.0 * zev2 / tgo
    u0, u1, u2, _ = sat3(a0, a1, a2, t_min / m, t_max / m)
    return u0, u1, u2, tgo


# ----------------------------------------------------------------------
# three-degree-of-freedom closed loop
# ----------------------------------------------------------------------

@maybe_njit
def accel3(vx, vy, vz, m, t0, t1, t2, g0, g1, g2, hrcds):
    """Translational acceleration: thrust/m + gravity(+bias) + drag/m."""
    vn = math.sqrt(vx * vx + vy * vy + vz * vz)
    q = hrcds * vn / m
    return (t0 / m + g0 - q * vx,
            t1 / m + g1 - q * vy,
            t2 / m + g2 - q * vz)


@maybe_njit
def dyn_step(rx, ry, rz, vx, vy, vz, m, t0, t1, t2,
             g0, g1, g2, hrcds, c_ex, dt):
    """One RK4 step of the point-mass dynamics under a held thrust force.

    Mass flow is the held thrust magnitude over the exhaust velocity, so
    mass varies linearly inside the step and feeds each stage.
    """
    tn = math.sqrt(t0 * t0 + t1 * t1 + t2 * t2)
    mdot = -tn / c_ex

    a1x, a1y, a1z = accel3(vx, vy, vz, m, t0, t1, t2, g0, g1, g2, hrcds)

    h2 = 0.5 * dt
    m2 = m + h2 * mdot
    v2x = vx + h2 * a1x
    v2y = vy + h2 * a1y
    v2z = vz + h2 * a1z
    a2x, a2y, a2z = accel3(v2x, v2y, v2z, m2, t0, t1, t2, g0, g1, g2, hrcds)

    v3x = vx + h2 * a2x
    v3y = vy + h2 * a2y
    v3z = vz + h2 * a2z
    a3x, a3y, a3z = accel3(v3x, v3y, v3z, m2, t0, t1, t2, g0, g1, g2, hrcds)

    m4 = m + dt * mdot
    v4x = vx + dt * a3x
    v4y = vy + dt * a3y
    v4z = vz + dt * a3z
    a4x, a4y, a4z = accel3(v4x, v4y, v4z, m4, t0, t1, t2, g0, g1, g2, hrcds)

    s = dt / 6.0
    rx_n = rx + s * (vx + 2.0 * v2x + 2.0 * v3x + v4x)
    ry_n = ry + s * (vy + 2.0 * v2y + 2.0 * v3y + v4y)
    rz_n = rz + s * (vz + 2.0 * v2z + 2.0 * v3z + v4z)
    vx_n = vx + s * (a1x + 2.0 * a2x + 2.0 * a3x + a4x)
    vy_n = vy + s * (a1y + 2.0 * a2y + 2.0 * a3y + a4y)
    vz_n = vz + s * (a1z + 2.0 * a2z + 2.0 * a3z + a4z)
    return rx_n, ry_n, rz_n, vx_n, vy_n, vz_n, m4


@maybe_njit
def run_loop(law, r0, v0, m0, m_dry, cfg, mrot, eta, gvec, hrcds, xi,
             dt, max_steps, want_log, xhat0):
    """Closed-loop descent: guidance each step, thrust held over the step.

    ``law`` 0 selects the field-tracking guidance, 1 the baseline.
    ``mrot`` is the thrust pointing-error rotation, ``eta`` the constant
    thrust scale error, ``xi`` per-step thrust noise, ``gvec`` the total
    constant acceleration (gravity plus bias), ``hrcds`` the drag constant
    rho*C_D*S_ref/2.

    Returns (records, n_records, report); records rows follow REC_COLUMNS.
    """
    t_max_cmd = cfg[C_TMAX]
    grav = cfg[C_G]
    c_ex = cfg[C_EXH]

    nrows = max_steps if want_log == 1 else 1
    rec = np.zeros((nrows, N_REC))
    report = np.zeros(N_REPORT)
    out = np.zeros(N_OUT)
    xhat = np.empty(3)
    xhat[0] = xhat0[0]
    xhat[1] = xhat0[1]
    xhat[2] = 0.0

    rx = r0[0]
    ry = r0[1]
    rz = r0[2]
    vx = v0[0]
    vy = v0[1]
    vz = v0[2]
    m = m0
    rbuf = np.empty(3)
    vbuf = np.empty(3)

    t = 0.0
    nrec = 0
    status = -1
    fuel_out = False
    min_elev = HALF_PI
    theta_u_last = HALF_PI
    tgo_hint = -1.0

    step = 0
    while step < max_steps:
        rn = math.sqrt(rx * rx + ry * ry + rz * rz)
        vn = math.sqrt(vx * vx + vy * vy + vz * vz)
        if rn < 0.01 and vn < 0.05:
            status = STATUS_LANDED
            break
        if rz < 0.0:
            status = STATUS_FUEL if fuel_out else STATUS_IMPACT
            break
        if rn >= 0.1:
            el = math.atan2(rz, math.hypot(rx, ry))
            if el < min_elev:
                min_elev = el

        u0 = 0.0
        u1 = 0.0
        u2 = 0.0
        tf0 = 0.0
        tf1 = 0.0
        tf2 = 0.0
        tn = 0.0
        e_norm = 0.0
        avoid = 0.0
        if not fuel_out:
            rbuf[0] = rx
            rbuf[1] = ry
            rbuf[2] = rz
            vbuf[0] = vx
            vbuf[1] = vy
            vbuf[2] = vz
            if law == 0:
                guidance_kernel(rbuf, vbuf, m, xhat, cfg, out)
                u0 = out[O_U]
                u1 = out[O_U + 1]
                u2 = out[O_U + 2]
                xhat[0] = out[O_XHAT]
                xhat[1] = out[O_XHAT + 1]
                e0 = out[O_E]
                e1 = out[O_E + 1]
                e2 = out[O_E + 2]
                e_norm = math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
                avoid = out[O_AVOID]
            else:
                u0, u1, u2, tgo_hint = zemzev_kernel(
                    rbuf, vbuf, m, grav, cfg[C_TMIN], t_max_cmd, tgo_hint)
            xi_k = xi[step] if step < xi.shape[0] else 0.0
            scale = m * (1.0 + eta + xi_k)
            tf0 = scale * (mrot[0, 0] * u0 + mrot[0, 1] * u1 + mrot[0, 2] * u2)
            tf1 = scale * (mrot[1, 0] * u0 + mrot[1, 1] * u1 + mrot[1, 2] * u2)
            tf2 = scale * (mrot[2, 0] * u0 + mrot[2, 1] * u1 + mrot[2, 2] * u2)
            tn = math.sqrt(tf0 * tf0 + tf1 * tf1 + tf2 * tf2)
            un = math.sqrt(u0 * u0 + u1 * u1 + u2 * u2)
            if un > 0.0:
                theta_u_last = math.asin(min(1.0, max(-1.0, u2 / un)))

        if want_log == 1:
            rec[nrec, 0] = t
            rec[nrec, 1] = rx
            rec[nrec, 2] = ry
            rec[nrec, 3] = rz
            rec[nrec, 4] = vx
            rec[nrec, 5] = vy
            rec[nrec, 6] = vz
            rec[nrec, 7] = m
            rec[nrec, 8] = u0
            rec[nrec, 9] = u1
            rec[nrec, 10] = u2
            rec[nrec, 11] = tn / t_max_cmd
            un = math.sqrt(u0 * u0 + u1 * u1 + u2 * u2)
            rec[nrec, 12] = math.degrees(
                math.asin(min(1.0, max(-1.0, u2 / un)))) if un > 0.0 else 0.0
            rec[nrec, 13] = math.degrees(math.atan2(vz, math.hypot(vx, vy)))
            rec[nrec, 14] = e_norm
            rec[nrec, 15] = avoid
        nrec += 1

        rx, ry, rz, vx, vy, vz, m = dyn_step(
            rx, ry, rz, vx, vy, vz, m, tf0, tf1, tf2,
            gvec[0], gvec[1], gvec[2], hrcds, c_ex, dt)
        if not fuel_out and m <= m_dry:
            m = m_dry
            fuel_out = True
        t += dt
        step += 1

    if status < 0:
        status = STATUS_FUEL if fuel_out else STATUS_TIMEOUT

    n_valid = min(nrec, nrows) if want_log == 1 else 0
    report[R_STATUS] = float(status)
    report[R_TF] = t
    report[R_FUEL] = m0 - m
    report[R_RNORM] = math.sqrt(rx * rx + ry * ry + rz * rz)
    report[R_VNORM] = math.sqrt(vx * vx + vy * vy + vz * vz)
    report[R_GAMMAF] = math.atan2(vz, math.hypot(vx, vy))
    report[R_THETAUF] = theta_u_last
    report[R_MINELEV] = min_elev
    report[R_NREC] = float(nrec)
    report[R_MF] = m
    return rec, n_valid, report
