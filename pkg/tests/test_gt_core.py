"""Closed-form planar descent: frozen high-precision values, derivative
identities, degenerate-geometry reductions, and RK4 cross-checks."""

import math

import numpy as np
import pytest

from gtland import (
    DomainError,
    GtTerminal,
    PlanarDescent,
    PlanarState,
    analytic_state_at,
    indefinite_integrals,
    integration_constant,
    planar_propagate,
    terminal_values,
)

G = 3.7114

# Frozen from a 50-digit arbitrary-precision evaluation of the closed
# forms (independent of the float implementation under test).
CONST_REF = 1.213203435596425732  # v=10, gamma=pi/4, beta=2
INTEGRALS_AT_ZERO = (2.0 / 3.0, 4.0 / 15.0, -1.0 / 12.0)  # gamma=0, beta=2

REF = PlanarState(v=150.0, gamma=0.2, x=0.0, z=2000.0, t=0.0)
REF_BETA = 1.8
REF_ROWS = {
    # gamma_query: (v, t, x, z)
    -0.5: (45.541859551329775825, 16.40581368071467744,
           1522.4544155835681988, 1964.955391582283486),
    -1.0: (20.833423611515921782, 22.273159868040479031,
           1666.2679487130362734, 1842.4352622275321081),
    -1.4: (7.2126347436405563097, 26.475998766537108084,
           1688.8192920409704761, 1789.236731244034897),
}
REF_TERMINAL = GtTerminal(x_f=1689.7327022194892896,
                          z_f=1780.6033430580085187,
                          t_f=28.892591597695711871)


def test_integration_constant_frozen():
    got = integration_constant(10.0, math.pi / 4, 2.0)
    assert got == pytest.approx(CONST_REF, rel=1e-14)


def test_integration_constant_zero_speed():
    assert integration_constant(0.0, 0.3, 1.5) == 0.0


def test_integration_constant_rejects_bad_inputs():
    with pytest.raises(DomainError):
        integration_constant(-1.0, 0.0, 2.0)
    with pytest.raises(DomainError):
        integration_constant(10.0, math.pi / 2, 2.0)
    with pytest.raises(DomainError):
        integration_constant(10.0, 0.0, 1.0)  # thrust ratio at unity


def test_indefinite_integrals_frozen():
    got = indefinite_integrals(0.0, 2.0)
    assert got == pytest.approx(INTEGRALS_AT_ZERO, rel=1e-14)


def test_indefinite_integrals_vanish_toward_vertical():
    # all three antiderivatives go to zero at the vertical limit
    for beta in (1.5, 2.0, 3.0):
        vals = indefinite_integrals(-math.pi / 2 + 1e-8, beta)
        assert max(abs(v) for v in vals) < 1e-6


@pytest.mark.parametrize("beta", [1.3, 1.8, 2.6])
@pytest.mark.parametrize("gamma", [-1.2, -0.4, 0.0, 0.7, 1.2])
def test_indefinite_integral_derivatives(beta, gamma):
    # central differences against the closed-form derivatives
    h = 1e-6
    up = indefinite_integrals(gamma + h, beta)
    dn = indefinite_integrals(gamma - h, beta)
    sec = 1.0 / math.cos(gamma)
    w = sec + math.tan(gamma)
    expect = (sec * sec * w ** beta,
              sec * sec * w ** (2 * beta),
              sec * sec * math.tan(gamma) * w ** (2 * beta))
    for (u, d, ex) in zip(up, dn, expect):
        # abs floor covers finite-difference cancellation noise at
        # exact zeros of the derivative
        assert (u - d) / (2 * h) == pytest.approx(ex, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("gamma", [-1.1, -0.3, 0.5])
def test_speed_derivative(gamma):
    desc = PlanarDescent(v0=140.0, gamma0=0.9, beta=1.6)
    h = 1e-6
    fd = (desc.speed(gamma + h) - desc.speed(gamma - h)) / (2 * h)
    v = desc.speed(gamma)
    expect = v * (math.tan(gamma) + desc.beta / math.cos(gamma))
    assert fd == pytest.approx(expect, rel=1e-6)


@pytest.mark.parametrize("gq", sorted(REF_ROWS))
def test_analytic_state_frozen(gq):
    v, t, x, z = REF_ROWS[gq]
    got = analytic_state_at(REF, gq, REF_BETA, g=G)
    assert got.gamma == gq
    assert got.v == pytest.approx(v, rel=1e-12)
    assert got.t == pytest.approx(t, rel=1e-12)
    assert got.x == pytest.approx(x, rel=1e-12)
    assert got.z == pytest.approx(z, rel=1e-12)


def test_terminal_values_frozen():
    got = terminal_values(REF, REF_BETA, g=G)
    assert got.x_f == pytest.approx(REF_TERMINAL.x_f, rel=1e-12)
    assert got.z_f == pytest.approx(REF_TERMINAL.z_f, rel=1e-12)
    assert got.t_f == pytest.approx(REF_TERMINAL.t_f, rel=1e-12)


def test_terminal_vertical_descent_reduction():
    # straight-down start: pure 1-D deceleration at (beta - 1) g
    v0, beta, x0, z0, t0 = 80.0, 1.7, 12.0, 500.0, 3.0
    init = PlanarState(v=v0, gamma=-math.pi / 2, x=x0, z=z0, t=t0)
    got = terminal_values(init, beta, g=G)
    assert got.x_f == pytest.approx(x0, abs=1e-12)
    assert got.z_f == pytest.approx(z0 - v0 ** 2 / (2 * (beta - 1) * G),
                                    rel=1e-13)
    assert got.t_f == pytest.approx(t0 + v0 / ((beta - 1) * G), rel=1e-13)


def test_terminal_vertical_ascent_reduction():
    # straight-up start: decelerated at (beta + 1) g until rest
    v0, beta, z0 = 60.0, 2.1, 100.0
    init = PlanarState(v=v0, gamma=math.pi / 2, x=0.0, z=z0, t=0.0)
    got = terminal_values(init, beta, g=G)
    assert got.x_f == pytest.approx(0.0, abs=1e-12)
    assert got.z_f == pytest.approx(z0 + v0 ** 2 / (2 * (beta + 1) * G),
                                    rel=1e-13)
    assert got.t_f == pytest.approx(v0 / ((beta + 1) * G), rel=1e-13)


def test_terminal_zero_speed_is_identity():
    init = PlanarState(v=0.0, gamma=-0.4, x=5.0, z=9.0, t=2.0)
    got = terminal_values(init, 1.9, g=G)
    assert (got.x_f, got.z_f, got.t_f) == (5.0, 9.0, 2.0)


def test_analytic_state_domain_errors():
    with pytest.raises(DomainError):
        analytic_state_at(REF, 0.3, REF_BETA)  # query above start
    with pytest.raises(DomainError):
        analytic_state_at(REF, -math.pi / 2, REF_BETA)  # closed endpoint
    bad = PlanarState(v=-1.0, gamma=0.2, x=0.0, z=0.0, t=0.0)
    with pytest.raises(DomainError):
        analytic_state_at(bad, -0.5, REF_BETA)


def test_propagate_matches_analytic_at_gamma_stop():
    traj = planar_propagate(REF, REF_BETA, g=G, dt=1e-3, stop_gamma=-0.9)
    t, v, gm, x, z = traj[-1]
    assert gm == pytest.approx(-0.9, abs=1e-9)
    ana = analytic_state_at(REF, -0.9, REF_BETA, g=G)
    scale = REF.v ** 2 / G
    assert abs(v - ana.v) < 1e-6 * REF.v
    assert abs(x - ana.x) < 1e-6 * scale
    assert abs(z - ana.z) < 1e-6 * scale
    assert abs(t - ana.t) < 1e-6 * REF.v / G


def test_propagate_monotone_speed_and_gamma():
    traj = planar_propagate(REF, REF_BETA, g=G, dt=1e-2, stop_gamma=-1.3)
    v = traj[:, 1]
    gm = traj[:, 2]
    assert np.all(np.diff(v) < 0.0)   # thrust ratio > 1 always brakes
    assert np.all(np.diff(gm) < 0.0)  # gravity always turns downward
    assert np.all(np.diff(traj[:, 0]) > 0.0)


@pytest.mark.parametrize("beta", [1.2, 1.6, 2.0])
def test_slow_speed_implies_near_vertical(beta):
    # once the speed has dropped to 1e-3 of its start, the path is
    # within 1e-2 rad of vertical (holds for moderate thrust ratios;
    # the closed form gives cos(gamma_end) ~ (1e-3 * 2^beta * sec(g0)
    # * w(g0)^beta)^(1/(beta-1)), which crosses 1e-2 near beta ~ 2.1)
    init = PlanarState(v=120.0, gamma=0.2, x=0.0, z=1500.0, t=0.0)
    traj = planar_propagate(init, beta, g=G, dt=1e-3,
                            stop_speed=1e-3 * init.v)
    assert traj[-1, 2] < -math.pi / 2 + 1e-2


def test_propagate_near_vertical_matches_analytic():
    init = PlanarState(v=120.0, gamma=-0.3, x=0.0, z=1500.0, t=0.0)
    beta = 2.2
    stop = -math.pi / 2 + 1e-6
    traj = planar_propagate(init, beta, g=G, dt=1e-4, stop_gamma=stop)
    t, v, gm, x, z = traj[-1]
    ana = analytic_state_at(init, stop, beta, g=G)
    scale = init.v ** 2 / G
    assert abs(v - ana.v) < 1e-6 * init.v
    assert abs(x - ana.x) < 1e-6 * scale
    assert abs(z - ana.z) < 1e-6 * scale


def test_propagate_unreached_stop_raises():
    with pytest.raises(DomainError):
        planar_propagate(REF, REF_BETA, g=G, dt=1e-3, stop_gamma=-1.5,
                         max_steps=100)


def test_descent_wrapper_consistency():
    desc = PlanarDescent(v0=REF.v, gamma0=REF.gamma, beta=REF_BETA,
                         x0=REF.x, z0=REF.z, t0=REF.t, g=G)
    assert desc.terminal() == terminal_values(REF, REF_BETA, g=G)
    rows = desc.sample([-0.5, -1.0, -1.4])
    for row, gq in zip(rows, (-0.5, -1.0, -1.4)):
        v, t, x, z = REF_ROWS[gq]
        assert row[1] == pytest.approx(v, rel=1e-12)
        assert row[0] == pytest.approx(t, rel=1e-12)
    assert desc.constant == pytest.approx(
        integration_constant(REF.v, REF.gamma, REF_BETA), rel=1e-15)
