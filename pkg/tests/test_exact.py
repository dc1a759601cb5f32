import math
import warnings

import numpy as np
import pytest

from growthdiff.exact import (TruncationWarning, build_radial_series,
                              build_series, eval_physical, eval_radial_physical,
                              eval_radial_series, eval_series, eval_w, expand,
                              growth_region, series_manifest, series_sup_norm,
                              transform_ic)
from growthdiff.motion import (CriticalMotion, DomainCollapsedError,
                               PhysicsParams, SeparableMotion, eval_motion,
                               validity_horizon)
from growthdiff.transforms import w_from_u


def _sine(L0):
    return lambda xi: np.sin(np.pi * xi / L0)


class TestExpansion:
    def test_eigenmode_expands_to_unit_vector(self, physics):
        motion = SeparableMotion(physics, 1.0, 2.0, 1.0, gamma1=0.4, c=0.2)
        sol = build_series(motion, _sine(1.0), grid_size=256, num_modes=8)
        coeffs = expand(sol.eigen.modes[0], sol.eigen)
        expected = np.zeros(8)
        expected[0] = 1.0
        np.testing.assert_allclose(coeffs, expected, atol=1e-10)

    def test_mode_combination_recovers_weights(self, physics):
        motion = SeparableMotion(physics, 1.0, 2.0, 1.0, gamma1=0.4, c=0.2)
        sol = build_series(motion, _sine(1.0), grid_size=256, num_modes=8)
        combo = 3.0 * sol.eigen.modes[1] - sol.eigen.modes[3]
        expected = np.zeros(8)
        expected[1], expected[3] = 3.0, -1.0
        np.testing.assert_allclose(expand(combo, sol.eigen), expected, atol=1e-9)

    def test_parabola_coefficients(self, physics):
        motion = SeparableMotion.fixed_length(physics, math.pi)
        sol = build_series(motion, lambda xi: xi * (math.pi - xi),
                           grid_size=512, num_modes=8)
        for n in range(1, 9):
            if n % 2:
                exact = 4.0 * math.sqrt(2.0 / math.pi) / n ** 3
                assert sol.coeffs[n - 1] == pytest.approx(exact, abs=1e-9)
            else:
                assert abs(sol.coeffs[n - 1]) < 1e-12

    def test_initial_data_must_vanish_at_endpoints(self, physics):
        motion = SeparableMotion.fixed_length(physics, 1.0)
        xi = np.linspace(0.0, 1.0, 33)
        with pytest.raises(ValueError, match="vanish"):
            transform_ic(motion, xi, np.cos(np.pi * xi))

    def test_shape_mismatch_rejected(self, physics):
        motion = SeparableMotion.fixed_length(physics, 1.0)
        sol = build_series(motion, _sine(1.0), grid_size=128, num_modes=4)
        with pytest.raises(ValueError):
            expand(np.zeros(7), sol.eigen)

    def test_nonseparable_motion_rejected(self, physics):
        with pytest.raises(ValueError, match="separable"):
            build_series(CriticalMotion(physics, alpha=1.0), _sine(1.0))


class TestEvaluation:
    def test_stationary_interval_single_mode(self, physics):
        motion = SeparableMotion.fixed_length(physics, math.pi)
        sol = build_series(motion, np.sin, grid_size=512, num_modes=8,
                           extrapolate=True)
        xi = np.linspace(0.0, math.pi, 41)[1:-1]
        for t in (0.5, 2.0, 5.0):
            expected = math.exp((physics.f0 - 1.0) * t) * np.sin(xi)
            np.testing.assert_allclose(eval_series(sol, xi, t), expected,
                                       rtol=1e-9)

    def test_boundary_values_vanish(self, physics):
        motion = SeparableMotion.fixed_length(physics, math.pi)
        sol = build_series(motion, np.sin, grid_size=256, num_modes=8)
        vals = eval_series(sol, [0.0, math.pi], 1.0)
        assert np.all(np.abs(vals) < 1e-14)

    def test_linear_stretch_closed_form(self):
        ph = PhysicsParams(D=1.0, f0=1.0)
        motion = SeparableMotion.linear_length(ph, 1.0, 1.0)
        # choose u0 so the potential-form data is the bare first sine mode
        u0 = lambda xi: np.sin(np.pi * xi) * np.exp(-0.25 * xi * xi)
        sol = build_series(motion, u0, grid_size=1024, num_modes=8,
                           extrapolate=True)
        t, L, s = 1.0, 2.0, 0.5
        expected = (math.exp(ph.f0 * t) * math.sqrt(1.0 / L)
                    * math.exp(-0.25 * 0.25 * L) * math.exp(-math.pi ** 2 * s))
        assert float(eval_series(sol, [0.5], t)[0]) == pytest.approx(
            expected, rel=1e-8)

    def test_potential_form_consistent_with_field(self, physics, rng):
        motion = SeparableMotion.sqrt_length(physics, 2.0, 0.5, gamma1=0.3, c=0.1)
        sol = build_series(motion, _sine(2.0), grid_size=256, num_modes=16)
        xi = rng.uniform(0.1, 1.9, size=12)
        for t in (0.3, 1.4):
            u = eval_series(sol, xi, t)
            np.testing.assert_allclose(eval_w(sol, xi, t),
                                       w_from_u(motion, xi, t, u), rtol=1e-12)

    def test_linearity(self, physics, rng):
        motion = SeparableMotion.linear_length(physics, 1.0, 0.5, gamma1=0.2)
        u0a = lambda xi: np.sin(np.pi * xi)
        u0b = lambda xi: xi * (1.0 - xi)
        u0c = lambda xi: u0a(xi) + 2.0 * u0b(xi)
        kw = dict(grid_size=256, num_modes=24)
        sa = build_series(motion, u0a, **kw)
        sb = build_series(motion, u0b, **kw)
        sc = build_series(motion, u0c, **kw)
        xi = rng.uniform(0.0, 1.0, size=20)
        for t in (0.2, 1.0):
            np.testing.assert_allclose(
                eval_series(sc, xi, t),
                eval_series(sa, xi, t) + 2.0 * eval_series(sb, xi, t),
                rtol=1e-12, atol=1e-15)

    def test_initial_condition_reconstructed(self, physics):
        motion = SeparableMotion.fixed_length(physics, math.pi)
        u0 = lambda xi: (xi * (math.pi - xi)) ** 3
        sol = build_series(motion, u0, grid_size=512, num_modes=64)
        xi = sol.eigen.grid
        diff = eval_series(sol, xi, 0.0) - u0(xi)
        rel_l2 = (math.sqrt(np.trapezoid(diff ** 2, xi))
                  / math.sqrt(np.trapezoid(u0(xi) ** 2, xi)))
        assert rel_l2 < 1e-6

    def test_truncation_insensitive_once_modes_decay(self, physics):
        motion = SeparableMotion.fixed_length(physics, math.pi)
        u0 = lambda xi: xi * (math.pi - xi)
        a = build_series(motion, u0, grid_size=512, num_modes=32)
        b = build_series(motion, u0, grid_size=512, num_modes=48)
        xi = np.linspace(0.1, math.pi - 0.1, 17)
        va, vb = eval_series(a, xi, 0.5), eval_series(b, xi, 0.5)
        assert np.max(np.abs(va - vb)) < 1e-8 * np.max(np.abs(va))

    def test_tail_warning_when_truncated_too_hard(self, physics):
        motion = SeparableMotion.fixed_length(physics, math.pi)
        sol = build_series(motion, lambda xi: xi * (math.pi - xi),
                           grid_size=256, num_modes=3)
        with pytest.warns(TruncationWarning):
            eval_series(sol, np.linspace(0.3, 2.8, 9), 0.0)

    def test_no_tail_warning_for_resolved_series(self, physics):
        motion = SeparableMotion.fixed_length(physics, math.pi)
        sol = build_series(motion, lambda xi: xi * (math.pi - xi),
                           grid_size=256, num_modes=32)
        with warnings.catch_warnings():
            warnings.simplefilter("error", TruncationWarning)
            eval_series(sol, np.linspace(0.3, 2.8, 9), 0.1)

    def test_rejects_bad_route_and_coordinates(self, physics):
        motion = SeparableMotion.fixed_length(physics, 1.0)
        sol = build_series(motion, _sine(1.0), grid_size=128, num_modes=4)
        with pytest.raises(ValueError, match="route"):
            eval_series(sol, [0.5], 0.1, route="spline")
        with pytest.raises(ValueError):
            eval_series(sol, [-0.2], 0.1)
        with pytest.raises(ValueError):
            eval_series(sol, [1.3], 0.1)

    def test_collapse_time_is_enforced(self, physics):
        motion = SeparableMotion.sqrt_length(physics, 1.0, -0.5)
        sol = build_series(motion, _sine(1.0), grid_size=128, num_modes=8)
        with pytest.raises(DomainCollapsedError):
            eval_series(sol, [0.5], 1.2)


class TestDualRoutes:
    @pytest.mark.parametrize("builder", [
        lambda ph: SeparableMotion.fixed_length(ph, math.pi, gamma1=0.5, c=0.5),
        lambda ph: SeparableMotion.linear_length(ph, 1.0, 1.0, gamma1=0.3, c=0.2),
        lambda ph: SeparableMotion.sqrt_length(ph, 2.0, -0.5, gamma1=0.2, c=0.1),
        lambda ph: SeparableMotion(ph, 1.0, 2.0, 1.0, gamma1=0.2, c=0.3),
        lambda ph: SeparableMotion(ph, 1.0, 0.0, 1.0, gamma1=0.2, c=0.3),
    ])
    def test_fast_route_matches_quadrature_route(self, physics, rng, builder):
        motion = builder(physics)
        sol = build_series(motion, _sine(motion.L0), grid_size=256, num_modes=32)
        t_max = min(2.0, 0.8 * validity_horizon(motion))
        for _ in range(100):
            t = float(rng.uniform(0.05, t_max))
            xi = rng.uniform(0.0, motion.L0, size=3)
            fast = eval_series(sol, xi, t, route="fast")
            slow = eval_series(sol, xi, t, route="generic")
            scale = max(float(np.max(np.abs(fast))), 1e-300)
            assert np.max(np.abs(fast - slow)) <= 1e-9 * scale


class TestPhysicalFrame:
    def test_left_endpoint_and_midpoint(self, physics):
        motion = SeparableMotion.linear_length(physics, 1.0, 0.5, c=0.3)
        sol = build_series(motion, _sine(1.0), grid_size=256, num_modes=16)
        t = 1.2
        st = eval_motion(motion, t)
        assert float(eval_physical(sol, [st.A], t)[0]) == pytest.approx(0.0, abs=1e-14)
        mid = st.A + 0.5 * st.L
        assert float(eval_physical(sol, [mid], t)[0]) == pytest.approx(
            float(eval_series(sol, [0.5], t)[0]), rel=1e-12)

    def test_positions_outside_interval_rejected(self, physics):
        motion = SeparableMotion.fixed_length(physics, 1.0)
        sol = build_series(motion, _sine(1.0), grid_size=128, num_modes=4)
        with pytest.raises(ValueError, match="interval"):
            eval_physical(sol, [1.5], 0.1)


class TestSpreadingDecay:
    def test_balanced_spreading_probe_decays_three_halves(self):
        ph = PhysicsParams(D=1.0, f0=1.0)
        cs = ph.c_star
        motion = SeparableMotion.linear_length(ph, 1.0, 2.0 * cs, c=-cs)
        u0 = lambda xi: (np.sin(math.pi * xi)
                         * np.exp(-0.5 * cs * xi * xi + 0.5 * cs * xi))
        sol = build_series(motion, u0, grid_size=1024, num_modes=4,
                           extrapolate=True)
        times = np.geomspace(1e2, 1e4, 33)
        for y in (0.5, 1.0, 2.0):
            vals = np.array([
                float(eval_physical(sol, [eval_motion(motion, float(t)).A + y],
                                    float(t))[0])
                for t in times])
            slope = np.polynomial.polynomial.polyfit(
                np.log(times), np.log(vals), 1)[1]
            assert slope == pytest.approx(-1.5, abs=0.05)


class TestCollapse:
    @pytest.mark.parametrize("builder, horizon", [
        (lambda ph: SeparableMotion.sqrt_length(ph, 1.0, -0.5), 1.0),
        (lambda ph: SeparableMotion(ph, -1.0, 1.0, 1.0), 1.0 + math.sqrt(2.0)),
    ])
    def test_everything_dies_before_the_domain_does(self, physics, builder, horizon):
        motion = builder(physics)
        assert validity_horizon(motion) == pytest.approx(horizon, rel=1e-12)
        sol = build_series(motion, _sine(1.0), grid_size=256, num_modes=16)
        assert series_sup_norm(sol, horizon - 1e-3) < 1e-6


class TestGrowthRegion:
    def test_slow_spreading_interval_grows_everywhere(self, physics):
        verdict = growth_region(SeparableMotion.linear_length(physics, 1.0, 1.0))
        assert verdict.kind == "grow"
        assert verdict.window == (0.0, 1.0)

    def test_fast_drift_kills_growth(self, physics):
        verdict = growth_region(
            SeparableMotion.linear_length(physics, 1.0, 1.0, c=3.0))
        assert verdict.kind == "decay"

    def test_fast_spreading_leaves_partial_window(self, physics):
        verdict = growth_region(SeparableMotion.linear_length(physics, 1.0, 4.0))
        assert verdict.kind == "window"
        assert verdict.window[0] == pytest.approx(0.0)
        assert verdict.window[1] == pytest.approx(0.5)

    def test_fixed_interval_below_threshold_decays(self):
        ph = PhysicsParams(D=1.0, f0=0.5)
        verdict = growth_region(SeparableMotion.fixed_length(ph, 1.0))
        assert verdict.kind == "decay"
        assert verdict.rate == pytest.approx(0.5 - math.pi ** 2, rel=1e-12)

    def test_fixed_interval_at_threshold_is_marginal(self):
        ph = PhysicsParams(D=1.0, f0=1.0)
        verdict = growth_region(SeparableMotion.fixed_length(ph, math.pi))
        assert verdict.kind == "marginal"

    def test_fixed_interval_above_threshold_grows(self):
        ph = PhysicsParams(D=1.0, f0=2.0)
        verdict = growth_region(SeparableMotion.fixed_length(ph, math.pi))
        assert verdict.kind == "grow"
        assert verdict.rate == pytest.approx(1.0, rel=1e-12)

    def test_diffusive_spreading_grows_at_rate_f0(self, physics):
        verdict = growth_region(SeparableMotion.sqrt_length(physics, 1.0, 2.0))
        assert verdict.kind == "grow"
        assert verdict.rate == pytest.approx(physics.f0, rel=1e-12)

    def test_collapse_verdict_reports_the_time(self, physics):
        verdict = growth_region(SeparableMotion.sqrt_length(physics, 1.0, -0.5))
        assert verdict.kind == "collapse"
        assert verdict.collapse_time == pytest.approx(1.0, rel=1e-12)

    def test_critical_motion_rejected(self, physics):
        with pytest.raises(ValueError):
            growth_region(CriticalMotion(physics, alpha=1.0))


class TestRadialSeries:
    def test_stationary_ball_fundamental_mode(self, physics):
        motion = SeparableMotion.symmetric(physics, 2.0)
        sol = build_radial_series(motion, lambda r: np.sinc(r), 3,
                                  grid_size=512, num_modes=8, extrapolate=True)
        r = np.linspace(0.0, 0.95, 20)
        for t in (0.3, 1.0):
            expected = math.exp((physics.f0 - math.pi ** 2) * t) * np.sinc(r)
            np.testing.assert_allclose(eval_radial_series(sol, r, t), expected,
                                       rtol=1e-6)

    def test_one_dimensional_ball_matches_interval_series(self, physics):
        motion = SeparableMotion.symmetric(physics, 2.0, b=0.5)
        sol_int = build_series(motion, lambda xi: np.sin(0.5 * math.pi * xi),
                               grid_size=512, num_modes=32, extrapolate=True)
        sol_rad = build_radial_series(motion, lambda r: np.cos(0.5 * math.pi * r),
                                      1, grid_size=512, num_modes=32,
                                      extrapolate=True)
        for t in (0.3, 0.8):
            R = 0.5 * eval_motion(motion, t).L
            radius = np.linspace(0.05, 0.95, 10) * R
            np.testing.assert_allclose(eval_radial_physical(sol_rad, radius, t),
                                       eval_physical(sol_int, radius, t),
                                       rtol=1e-6)

    def test_boundary_data_must_vanish(self, physics):
        motion = SeparableMotion.symmetric(physics, 2.0)
        with pytest.raises(ValueError, match="vanish"):
            build_radial_series(motion, lambda r: np.cos(r), 3, grid_size=128)

    def test_off_centre_motion_rejected(self, physics):
        motion = SeparableMotion.fixed_length(physics, 2.0)
        with pytest.raises(ValueError, match="centred"):
            build_radial_series(motion, lambda r: np.sinc(r), 3, grid_size=128)

    def test_radius_outside_ball_rejected(self, physics):
        motion = SeparableMotion.symmetric(physics, 2.0)
        sol = build_radial_series(motion, lambda r: np.sinc(r), 3, grid_size=128,
                                  num_modes=4)
        with pytest.raises(ValueError, match="radius"):
            eval_radial_physical(sol, [1.4], 0.1)


class TestManifest:
    def test_describes_the_expansion(self, physics):
        motion = SeparableMotion.sqrt_length(physics, 1.0, 0.5, gamma1=0.2)
        sol = build_series(motion, _sine(1.0), grid_size=128, num_modes=6)
        doc = series_manifest(sol)
        assert doc["schema_version"] == 1
        assert doc["truncation"] == 6
        assert len(doc["sigmas"]) == 6
        assert isinstance(doc["motion_hash"], str) and len(doc["motion_hash"]) > 16
