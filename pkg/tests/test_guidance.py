"""Guidance-law tests: frame construction, reference thrust profile,
desired velocity, residual Jacobians, the two algebraically identical
tracking-acceleration forms, the full guidance step, and the error-decay
test rig."""

import math

import numpy as np
import pytest

from gtland import (
    FrameContext,
    GuidanceConfig,
    LanderState,
    beta_profile,
    build_frame,
    desired_velocity,
    error_decay_closed_form,
    error_decay_rig,
    guidance_step,
    jacobians,
    solve_field,
    time_to_go,
    tracking_acceleration,
    tracking_acceleration_chain,
    velocity_jacobian,
    with_overrides,
)
from gtland.errors import ConfigError, DomainError

G = 3.7114

# Oracle values (50-digit arithmetic, frozen):
#   beta = c_beta * t_max / (m * g) at the stock vehicle constants.
BETA_95 = 1.7814304709459412632        # m = 1905, c_beta = 0.95
BETADOT_95 = 0.0059939478737783186883  # beta^2 g / c at BETA_95
BETA_85 = 1.5939114740042632355        # m = 1905, c_beta = 0.85
# Root of 2*beta*sin(g) - sin(g)^2 - 1 = 0 at beta = 2: asin(2 - sqrt(3)).
FLAT_GAMMA_B2 = 0.27126375372602079843


def state(r, v, m=1905.0, t=0.0):
    return LanderState(r=np.array(r, float), v=np.array(v, float), m=m, t=t)


def on_field_state(r, m=1905.0, config=None):
    """State whose velocity equals the desired field velocity (e = 0)."""
    config = config or GuidanceConfig()
    st = state(r, [0.0, 0.0, 0.0], m=m)
    frame = build_frame(st, eps_x=config.eps_x)
    beta, _ = beta_profile(m, config)
    v_d, _ = desired_velocity(frame, beta, config.g, eps_x=config.eps_x)
    st.v = frame.to_frame_l(v_d)
    return st, frame, v_d


# ----------------------------------------------------------------------
# build_frame
# ----------------------------------------------------------------------

class TestBuildFrame:
    def test_axis_aligned_downrange(self):
        frame = build_frame(state([-2500.0, 0.0, 1500.0], [0, 0, 0]))
        np.testing.assert_allclose(frame.x_hat, [1.0, 0.0, 0.0], atol=1e-15)
        assert frame.x_go == pytest.approx(2500.0, rel=1e-15)
        assert frame.z_go == pytest.approx(-1500.0, rel=1e-15)

    def test_axis_aligned_crossrange(self):
        frame = build_frame(state([0.0, -100.0, 500.0], [0, 0, 0]))
        np.testing.assert_allclose(frame.x_hat, [0.0, 1.0, 0.0], atol=1e-15)
        assert frame.x_go == pytest.approx(100.0, rel=1e-15)

    def test_orthonormality_random(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            r = rng.uniform([-5000, -5000, 1], [5000, 5000, 3000])
            t = build_frame(state(r, [0, 0, 0])).t_gl
            np.testing.assert_allclose(t @ t.T, np.eye(3), atol=1e-14)
            assert np.linalg.det(t) == pytest.approx(1.0, abs=1e-14)

    def test_round_trip_idempotent(self):
        rng = np.random.default_rng(8)
        frame = build_frame(state([-1200.0, 340.0, 900.0], [0, 0, 0]))
        for _ in range(50):
            vec = rng.normal(0.0, 40.0, 3)
            back = frame.to_frame_l(frame.to_frame_g(vec))
            np.testing.assert_allclose(back, vec, atol=1e-12)

    def test_x_axis_points_at_site(self):
        # The site sits at the origin, so the horizontal component of -r
        # normalizes to the frame x axis.
        frame = build_frame(state([300.0, -400.0, 1000.0], [0, 0, 0]))
        np.testing.assert_allclose(frame.x_hat, [-0.6, 0.8, 0.0], atol=1e-15)
        assert frame.x_go == pytest.approx(500.0)

    def test_degenerate_above_site_uses_context(self):
        ctx = FrameContext()
        build_frame(state([-100.0, 0.0, 800.0], [0, 0, 0]), ctx)
        np.testing.assert_allclose(ctx.x_hat, [1.0, 0.0, 0.0], atol=1e-15)
        frame = build_frame(state([0.0, 0.0, 400.0], [0, 0, 0]), ctx)
        # Frozen axis survives while directly above the site.
        np.testing.assert_allclose(frame.x_hat, [1.0, 0.0, 0.0], atol=1e-15)
        assert frame.x_go == 0.0
        assert frame.z_go == pytest.approx(-400.0)

    def test_degenerate_without_context_defaults(self):
        frame = build_frame(state([0.0, 0.0, 123.0], [0, 0, 0]))
        np.testing.assert_allclose(frame.x_hat, [1.0, 0.0, 0.0], atol=1e-15)


# ----------------------------------------------------------------------
# beta_profile
# ----------------------------------------------------------------------

class TestBetaProfile:
    def test_stock_vehicle_values(self):
        beta, beta_dot = beta_profile(1905.0, GuidanceConfig())
        assert beta == pytest.approx(BETA_95, rel=1e-12)
        assert beta_dot == pytest.approx(BETADOT_95, rel=1e-12)

    def test_reduced_ratio(self):
        beta, _ = beta_profile(1905.0, GuidanceConfig(c_beta=0.85))
        assert beta == pytest.approx(BETA_85, rel=1e-12)

    def test_rate_identity(self):
        # beta_dot * c / (beta^2 g) = 1 for any mass where the profile exists.
        config = GuidanceConfig()
        for m in (1405.0, 1600.0, 1905.0):
            beta, beta_dot = beta_profile(m, config)
            assert beta_dot * config.c / (beta * beta * config.g) == \
                pytest.approx(1.0, rel=1e-15)

    def test_constant_mass_mode(self):
        config = GuidanceConfig(assume_constant_mass=True, m0=1905.0)
        beta, beta_dot = beta_profile(1500.0, config)
        assert beta == pytest.approx(BETA_95, rel=1e-12)
        assert beta_dot == 0.0

    def test_insufficient_thrust_rejected(self):
        with pytest.raises(DomainError):
            beta_profile(1905.0, GuidanceConfig(c_beta=0.5))
        with pytest.raises(DomainError):
            beta_profile(3500.0, GuidanceConfig())

    def test_nonpositive_mass_rejected(self):
        with pytest.raises(DomainError):
            beta_profile(0.0, GuidanceConfig())


# ----------------------------------------------------------------------
# desired_velocity
# ----------------------------------------------------------------------

class TestDesiredVelocity:
    def test_vertical_branch(self):
        frame = build_frame(state([0.0, 0.0, 500.0], [0, 0, 0]))
        v_d, sol = desired_velocity(frame, 2.0, G)
        expect = -math.sqrt(2.0 * (2.0 - 1.0) * G * 500.0)
        np.testing.assert_allclose(v_d, [0.0, 0.0, expect], rtol=1e-13,
                                   atol=1e-13)
        assert sol.method == "vertical"

    def test_flat_geometry_direction(self):
        frame = build_frame(state([-1000.0, 0.0, 0.0], [0, 0, 0]))
        v_d, sol = desired_velocity(frame, 2.0, G)
        assert sol.gamma_star == pytest.approx(FLAT_GAMMA_B2, abs=1e-11)
        np.testing.assert_allclose(
            v_d / sol.v_star,
            [math.cos(FLAT_GAMMA_B2), 0.0, math.sin(FLAT_GAMMA_B2)],
            atol=1e-11)

    def test_speed_equals_field_speed(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            r = rng.uniform([-4000, -4000, 10], [4000, 4000, 3000])
            frame = build_frame(state(r, [0, 0, 0]))
            v_d, sol = desired_velocity(frame, 1.9, G)
            assert np.linalg.norm(v_d) == pytest.approx(sol.v_star, rel=1e-14)
            assert v_d[1] == 0.0


# ----------------------------------------------------------------------
# jacobians
# ----------------------------------------------------------------------

class TestJacobians:
    @staticmethod
    def random_solution(rng, beta):
        x_go = rng.uniform(50.0, 5000.0)
        z_go = rng.uniform(-5000.0, 2000.0)
        sol = solve_field(x_go, z_go, beta, G)
        v_d = np.array([sol.v_star * math.cos(sol.gamma_star), 0.0,
                        sol.v_star * math.sin(sol.gamma_star)])
        return x_go, z_go, sol, v_d

    def test_denominator_closed_form(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            beta = rng.uniform(1.2, 3.5)
            _, _, sol, v_d = self.random_solution(rng, beta)
            fwd = velocity_jacobian(v_d, beta)
            det = fwd[0, 0] * fwd[2, 2] - fwd[0, 2] * fwd[2, 0]
            expect = (6.0 * (beta * sol.v_star - v_d[2]) ** 2
                      + 2.0 * sol.v_star ** 2 * (beta * beta - 1.0))
            assert det == pytest.approx(expect, rel=1e-9)
            assert det > 0.0

    def test_geometry_jacobian_diagonal(self):
        rng = np.random.default_rng(22)
        beta = 1.9
        _, _, sol, v_d = self.random_solution(rng, beta)
        _, f_rgo, _ = jacobians(v_d, 1000.0, -500.0, beta, G)
        expect = np.diag([-(4 * beta ** 2 - 1) * G, 0.0,
                          -(4 * beta ** 2 - 4) * G])
        np.testing.assert_allclose(f_rgo, expect, rtol=1e-15)

    def test_pseudo_inverse_identity(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            beta = rng.uniform(1.2, 3.5)
            x_go, z_go, sol, v_d = self.random_solution(rng, beta)
            dagger, _, _ = jacobians(v_d, x_go, z_go, beta, G)
            prod = dagger @ velocity_jacobian(v_d, beta)
            np.testing.assert_allclose(
                prod[np.ix_([0, 2], [0, 2])], np.eye(2), atol=1e-10)
            assert np.all(prod[1] == 0.0) and np.all(prod[:, 1] == 0.0)

    def test_zero_speed_rejected(self):
        with pytest.raises(DomainError):
            jacobians(np.zeros(3), 100.0, 0.0, 1.9, G)
        with pytest.raises(DomainError):
            velocity_jacobian(np.zeros(3), 1.9)


# ----------------------------------------------------------------------
# tracking acceleration
# ----------------------------------------------------------------------

class TestTracking:
    def test_pure_deceleration_on_field_constant_mass(self):
        # With zero tracking error and a constant profile ratio the whole
        # command collapses to the feedforward: -beta*g along the desired
        # velocity direction.
        config = GuidanceConfig(assume_constant_mass=True, m0=1905.0)
        st, frame, v_d = on_field_state([-2000.0, 0.0, 1200.0], config=config)
        res = tracking_acceleration(st, frame, config)
        beta, _ = beta_profile(st.m, config)
        expect = -beta * config.g * v_d / np.linalg.norm(v_d)
        np.testing.assert_allclose(res.a_trk_g, expect, atol=1e-10)
        np.testing.assert_allclose(res.e, 0.0, atol=1e-12)

    def test_rearranged_matches_chain_form(self):
        # The grouped flight form and the direct differentiation of the
        # desired velocity along the flow are the same law.
        config = GuidanceConfig()
        rng = np.random.default_rng(33)
        worst = 0.0
        for _ in range(300):
            r = np.array([rng.uniform(-5000, 5000), rng.uniform(-5000, 5000),
                          rng.uniform(50.0, 3000.0)])
            while math.hypot(r[0], r[1]) < 20.0:
                r[:2] = rng.uniform(-5000, 5000, 2)
            st = state(r, rng.normal(0.0, 80.0, 3), m=rng.uniform(1406, 1905))
            frame = build_frame(st)
            a1 = tracking_acceleration(st, frame, config).a_trk_g
            a2 = tracking_acceleration_chain(st, frame, config).a_trk_g
            worst = max(worst, float(np.max(
                np.abs(a1 - a2) / np.maximum(1.0, np.abs(a1)))))
        assert worst < 1e-9

    def test_time_to_go_estimate_plumbed(self):
        config = GuidanceConfig()
        st = state([-1500.0, 200.0, 900.0], [80.0, 10.0, -40.0])
        frame = build_frame(st)
        res = tracking_acceleration(st, frame, config)
        expect = time_to_go(
            res.solution.v_star, res.v_d[2], float(np.linalg.norm(res.e)),
            res.beta, config.g, floor=config.tgo_floor)
        assert res.t_go_hat == pytest.approx(expect, rel=1e-12)

    def test_vertical_limit_constant_mass_exact(self):
        config = GuidanceConfig(assume_constant_mass=True, m0=1905.0)
        st, frame, _ = on_field_state([0.0, 0.0, 100.0], config=config)
        res = tracking_acceleration(st, frame, config)
        beta, _ = beta_profile(st.m, config)
        np.testing.assert_allclose(
            res.a_trk_g, [0.0, 0.0, beta * config.g], atol=1e-12)

    def test_vertical_limit_approach(self):
        # Descending the vertical field line with the mass-flow term
        # active, the command approaches [0, 0, beta*g] from below as
        # altitude shrinks; the gap has the closed form
        # beta_dot * g * h / v* which scales like sqrt(h).
        config = GuidanceConfig()
        beta, beta_dot = beta_profile(1905.0, config)
        gaps = []
        for h in (10.0, 1.0, 0.1, 0.01):
            st, frame, _ = on_field_state([0.0, 0.0, h], config=config)
            res = tracking_acceleration(st, frame, config)
            assert res.a_trk_g[0] == pytest.approx(0.0, abs=1e-12)
            assert res.a_trk_g[1] == pytest.approx(0.0, abs=1e-12)
            v_star = math.sqrt(2.0 * (beta - 1.0) * config.g * h)
            predicted_gap = beta_dot * config.g * h / v_star
            gap = beta * config.g - res.a_trk_g[2]
            assert gap == pytest.approx(predicted_gap, rel=1e-10)
            gaps.append(gap)
        assert gaps == sorted(gaps, reverse=True)
        assert gaps[0] / gaps[2] == pytest.approx(10.0, rel=1e-9)

    def test_terminal_guard_exact(self):
        # At the site with zero velocity the desired speed vanishes and
        # the law degenerates to gravity relief plus error feedback; with
        # zero error that is exactly [0, 0, beta*g].
        config = GuidanceConfig()
        st = state([0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
        frame = build_frame(st)
        res = tracking_acceleration(st, frame, config)
        beta, _ = beta_profile(st.m, config)
        np.testing.assert_allclose(res.a_trk_g, [0.0, 0.0, beta * config.g],
                                   rtol=1e-15)
        res_chain = tracking_acceleration_chain(st, frame, config)
        np.testing.assert_allclose(res_chain.a_trk_g, res.a_trk_g, rtol=1e-15)

    def test_frame_transport_identity(self):
        # Omega e (rearranged form) equals omega x v_d (chain form) on
        # random states; exercised here through full-command agreement at
        # states with deliberately large crossrange velocity.
        config = GuidanceConfig()
        rng = np.random.default_rng(34)
        for _ in range(50):
            st = state([rng.uniform(100, 3000), rng.uniform(-2000, 2000),
                        rng.uniform(100, 2500)],
                       [rng.normal(0, 30), rng.normal(0, 120),
                        rng.normal(-50, 30)])
            frame = build_frame(st)
            a1 = tracking_acceleration(st, frame, config).a_trk_g
            a2 = tracking_acceleration_chain(st, frame, config).a_trk_g
            np.testing.assert_allclose(a1, a2, atol=1e-9)


# ----------------------------------------------------------------------
# guidance_step
# ----------------------------------------------------------------------

class TestGuidanceStep:
    def test_on_trajectory_passthrough(self):
        # Zero error, no avoidance: the command is the tracking
        # acceleration untouched.
        config = GuidanceConfig()
        st, _, _ = on_field_state([-2000.0, 0.0, 1200.0], config=config)
        out = guidance_step(st, config)
        assert not out.avoidance_active
        np.testing.assert_allclose(out.a_col, 0.0, atol=1e-15)
        np.testing.assert_allclose(out.u, out.a_trk, atol=1e-12)
        assert out.saturated == 0
        np.testing.assert_allclose(out.e, 0.0, atol=1e-10)

    def test_scenario1_initial_command_in_envelope(self):
        config = GuidanceConfig()
        st = state([-2500.0, 0.0, 1500.0], [100.0, 50.0, -75.0], m=1905.0)
        out = guidance_step(st, config)
        assert np.all(np.isfinite(out.u))
        thrust = float(np.linalg.norm(out.u)) * st.m
        assert config.t_min - 1e-9 <= thrust <= config.t_max + 1e-9

    def test_envelope_on_random_states(self):
        config = GuidanceConfig()
        rng = np.random.default_rng(44)
        for _ in range(200):
            st = state(rng.uniform([-4000, -4000, 5], [4000, 4000, 2500]),
                       rng.normal(0.0, 60.0, 3), m=rng.uniform(1406, 1905))
            out = guidance_step(st, config)
            thrust = float(np.linalg.norm(out.u)) * st.m
            assert config.t_min - 1e-9 <= thrust <= config.t_max + 1e-9

    def test_large_error_activates_avoidance(self):
        config = GuidanceConfig()
        st, frame, v_d = on_field_state([-2000.0, 0.0, 1200.0], config=config)
        # Push the velocity 25 m/s below the field value: error norm 25
        # exceeds the 20 m/s threshold.
        st.v = st.v + frame.to_frame_l(np.array([0.0, 0.0, -25.0]))
        out = guidance_step(st, config)
        assert np.linalg.norm(out.e) == pytest.approx(25.0, rel=1e-12)
        assert out.avoidance_active

    def test_matches_python_tracking_when_clean(self):
        # The compiled step and the reference implementation agree when
        # no avoidance blending or saturation occurs.
        config = GuidanceConfig()
        rng = np.random.default_rng(45)
        checked = 0
        for _ in range(200):
            st, frame, v_d = on_field_state(
                [rng.uniform(-4000, -500), rng.uniform(-500, 500),
                 rng.uniform(300, 2000)], config=config)
            st.v = st.v + rng.normal(0.0, 2.0, 3)
            out = guidance_step(st, config)
            if out.avoidance_active or out.saturated:
                continue
            res = tracking_acceleration(st, build_frame(st), config)
            np.testing.assert_allclose(out.a_trk, res.a_trk_l, atol=1e-9)
            np.testing.assert_allclose(out.u, res.a_trk_l, atol=1e-9)
            assert out.t_go_hat == pytest.approx(res.t_go_hat, rel=1e-9)
            checked += 1
        assert checked > 100

    def test_context_freezes_axis_over_site(self):
        config = GuidanceConfig()
        ctx = FrameContext()
        guidance_step(state([0.0, -300.0, 900.0], [0, 20, -30]), config, ctx)
        np.testing.assert_allclose(ctx.x_hat, [0.0, 1.0, 0.0], atol=1e-14)
        out = guidance_step(
            state([0.0, 0.0, 200.0], [0, 0, -20]), config, ctx)
        np.testing.assert_allclose(out.frame.x_hat, [0.0, 1.0, 0.0],
                                   atol=1e-14)


# ----------------------------------------------------------------------
# configuration validation
# ----------------------------------------------------------------------

class TestConfigValidation:
    @pytest.mark.parametrize("kwargs", [
        {"k": 1.0},
        {"k": 0.5},
        {"c_beta": 0.0},
        {"c_beta": 1.0},
        {"c_beta": -0.2},
        {"c_col_lo": 0.95, "c_col_hi": 0.75},
        {"c_col_lo": 0.5, "c_col_hi": 0.5},
        {"c_col_hi": 1.2},
        {"t_min": 14000.0},
        {"t_min": -1.0},
        {"phi": -0.1},
        {"phi": 1.6},
        {"c": -1.0},
        {"g": 0.0},
        {"c_e": 0.0},
        {"delta": -1.0},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ConfigError):
            GuidanceConfig(**kwargs)

    def test_with_overrides_validates(self):
        config = GuidanceConfig()
        assert with_overrides(config, c_beta=0.85).c_beta == 0.85
        with pytest.raises(ConfigError):
            with_overrides(config, k=0.9)

    def test_state_validation(self):
        with pytest.raises(DomainError):
            LanderState(r=np.zeros(2), v=np.zeros(3), m=1905.0)
        with pytest.raises(DomainError):
            LanderState(r=np.zeros(3), v=np.zeros(3), m=0.0)


# ----------------------------------------------------------------------
# error-decay rig
# ----------------------------------------------------------------------

class TestErrorDecayRig:
    def test_closed_form_endpoints(self):
        e0 = np.array([5.0, -3.0, 2.0])
        np.testing.assert_allclose(
            error_decay_closed_form(e0, 2.4, 30.0, 0.0), e0, rtol=1e-15)
        half = error_decay_closed_form(e0, 2.4, 30.0, 15.0)
        np.testing.assert_allclose(half, e0 * 0.5 ** 2.4, rtol=1e-14)

    def test_closed_form_domain(self):
        e0 = np.ones(3)
        with pytest.raises(DomainError):
            error_decay_closed_form(e0, 2.4, 30.0, 30.0)
        with pytest.raises(DomainError):
            error_decay_closed_form(e0, 2.4, 30.0, -1.0)

    def test_rig_matches_closed_form(self):
        e0 = np.array([5.0, -3.0, 2.0])
        times, errors = error_decay_rig(e0, 2.4, 30.0, 0.05, 27.0)
        expect = np.array([error_decay_closed_form(e0, 2.4, 30.0, t)
                           for t in times])
        np.testing.assert_allclose(errors, expect, rtol=1e-7, atol=1e-12)

    def test_rig_disturbance_bound(self):
        e0 = np.array([5.0, 0.0, 0.0])
        k, t_f, d_max = 2.4, 30.0, 1.0
        times, errors = error_decay_rig(
            e0, k, t_f, 0.05, 29.0, d=np.array([0.0, 0.0, d_max]))
        norms = np.linalg.norm(errors, axis=1)
        t_go = t_f - times
        bound = (t_go / t_f) ** k * np.linalg.norm(e0) \
            + t_go * d_max / (k - 1.0)
        assert np.all(norms <= bound + 1e-9)

    def test_rig_domain(self):
        e0 = np.ones(3)
        with pytest.raises(DomainError):
            error_decay_rig(e0, 2.4, 30.0, 0.05, 30.0)
        with pytest.raises(DomainError):
            error_decay_rig(e0, 2.4, 30.0, -0.05, 10.0)
