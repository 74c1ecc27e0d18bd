import math

import numpy as np
import pytest
from scipy.integrate import quad

from nonlocal_lwr.entropy import (
    exponential_entropy,
    flux_weighted_entropy,
    quadratic_entropy,
    quartic_entropy,
)
from nonlocal_lwr.flux import (
    Flux,
    godunov_flux,
    greenshields,
    load_tabulated_velocity,
    tabulated_velocity,
    velocity_defect_integral,
    velocity_gap_bounds,
)


class TestVelocity:
    def test_greenshields_constants(self, vel):
        assert vel.sup_value == pytest.approx(1.0)
        assert vel.lipschitz == pytest.approx(1.0)
        assert vel.decay_floor == pytest.approx(1.0)

    def test_rejects_increasing_table(self):
        with pytest.raises(ValueError, match="non-increasing"):
            tabulated_velocity([0.0, 0.5, 1.0], [0.5, 0.8, 0.2])

    def test_rejects_negative_speeds(self):
        with pytest.raises(ValueError, match="nonnegative"):
            tabulated_velocity([0.0, 1.0], [0.5, -0.1])

    def test_rejects_partial_range(self):
        with pytest.raises(ValueError, match="cover"):
            tabulated_velocity([0.0, 0.5], [1.0, 0.5])

    def test_tabulated_interpolation_and_floor(self, vel_tab_kinky):
        assert float(vel_tab_kinky(0.5)) == pytest.approx(0.75 + (0.3 - 0.75) / 0.4 * 0.2)
        # weakest decay among the three segments
        slopes = [(0.75 - 1.0) / 0.3, (0.3 - 0.75) / 0.4, (0.05 - 0.3) / 0.3]
        assert vel_tab_kinky.decay_floor == pytest.approx(-max(slopes), rel=1e-10)

    def test_loader_roundtrip(self, tmp_path):
        path = tmp_path / "vel.txt"
        np.savetxt(path, np.column_stack([[0.0, 1.0], [1.0, 0.0]]))
        v = load_tabulated_velocity(path)
        assert float(v(0.25)) == pytest.approx(0.75)

    def test_antiderivative_matches_quadrature(self, vel_tab_kinky):
        for x in (0.1, 0.3, 0.55, 0.99):
            expected = quad(lambda z: float(vel_tab_kinky(z)), 0.0, x, points=[0.3, 0.7], limit=200)[0]
            assert float(vel_tab_kinky.antiderivative(x)) == pytest.approx(expected, abs=1e-10)


class TestGodunovFlux:
    def test_diagonal(self, vel):
        f = Flux(vel)
        for a in (0.0, 0.31, 1.0):
            assert godunov_flux(f, a, a) == pytest.approx(a * (1 - a))

    def test_increasing_pair_takes_endpoint_min(self, vel):
        f = Flux(vel)
        assert godunov_flux(f, 0.2, 0.8) == pytest.approx(0.16)

    def test_decreasing_pair_takes_interior_max(self, vel):
        f = Flux(vel)
        assert godunov_flux(f, 0.8, 0.2) == pytest.approx(0.25)

    def test_matches_dense_scan(self, vel, rng):
        f = Flux(vel)
        zs = np.linspace(0.0, 1.0, 2001)
        fz = f(zs)
        for _ in range(200):
            a, b = rng.uniform(0, 1, 2)
            sel = (zs >= min(a, b)) & (zs <= max(a, b))
            candidates = np.concatenate([[f(a), f(b)], fz[sel]])
            expected = np.min(candidates) if a <= b else np.max(candidates)
            assert godunov_flux(f, a, b) == pytest.approx(float(expected), abs=1e-7)

    def test_monotone_in_both_arguments(self, vel, rng):
        f = Flux(vel)
        a = rng.uniform(0, 1, 300)
        b = rng.uniform(0, 1, 300)
        d = rng.uniform(0, 0.2, 300)
        up_a = godunov_flux(f, np.minimum(a + d, 1.0), b) - godunov_flux(f, a, b)
        dn_b = godunov_flux(f, a, np.minimum(b + d, 1.0)) - godunov_flux(f, a, b)
        assert np.all(up_a >= -1e-12)
        assert np.all(dn_b <= 1e-12)

    def test_tabulated_critical_points(self, vel_tab_smoothish):
        f = Flux(vel_tab_smoothish)
        assert len(f.critical_points) >= 1
        for c in f.critical_points:
            assert abs(float(f.speed(c))) <= 1e-6


class TestRelativeDissipation:
    def test_diagonal_is_exactly_zero(self, quad_pair, rng):
        for b in rng.uniform(0, 1, 50):
            assert quad_pair.relative_dissipation(b, b) == 0.0

    def test_quadratic_greenshields_closed_form(self, quad_pair, rng):
        a = rng.uniform(0, 1, 500)
        b = rng.uniform(0, 1, 500)
        np.testing.assert_allclose(
            quad_pair.relative_dissipation(a, b), 0.5 * (b - a) ** 2, atol=1e-12
        )
        assert float(quad_pair.relative_dissipation(0.0, 1.0)) == pytest.approx(0.5, abs=1e-12)

    def test_nonnegative_and_bounded_for_convex(self, convex_pairs, rng):
        a = rng.uniform(0, 1, 2000)
        b = rng.uniform(0, 1, 2000)
        for pair in convex_pairs:
            h = pair.relative_dissipation(a, b)
            bound = pair.curvature_sup * pair.velocity.sup_value
            assert np.min(h) >= -1e-10
            assert np.max(h) <= bound + 1e-10

    def test_matches_quadrature(self, vel_tab_kinky, rng):
        pair = quartic_entropy(vel_tab_kinky)
        for _ in range(20):
            a, b = rng.uniform(0, 1, 2)
            expected = quad(
                lambda z: z**2 * (float(vel_tab_kinky(z)) - float(vel_tab_kinky(b))),
                a,
                b,
                points=[p for p in (0.3, 0.7) if min(a, b) < p < max(a, b)],
                limit=200,
            )[0]
            assert float(pair.relative_dissipation(a, b)) == pytest.approx(expected, abs=1e-10)

    def test_out_of_range_states(self, quad_pair):
        with pytest.raises(ValueError, match="state out of range"):
            quad_pair.relative_dissipation(1.2, 0.5)
        # drift within 1e-12 is clamped, not an error
        assert quad_pair.relative_dissipation(1.0 + 1e-13, 0.5) >= 0.0


class TestDerivedFluxes:
    def test_entropy_flux_derivative_consistency(self, convex_pairs):
        xs = np.linspace(0.0, 1.0, 1001)
        for pair in convex_pairs:
            lhs = pair.entropy_flux.derivative(xs)
            rhs = pair.eta_prime(xs) * pair.flux.speed(xs)
            assert np.max(np.abs(lhs - rhs)) <= 1e-10

    def test_conjugate_of_quadratic(self, quad_pair):
        xs = np.linspace(0.0, 1.0, 1001)
        np.testing.assert_array_equal(quad_pair.conjugate(xs), 0.5 * xs**2)

    def test_antiderivatives_vanish_at_zero(self, convex_pairs):
        for pair in convex_pairs:
            assert abs(float(pair.entropy_flux(0.0))) <= 1e-12
            assert abs(float(pair.dissipation_potential(0.0))) <= 1e-12
            assert abs(float(pair.conjugate_flux(0.0))) <= 1e-12

    def test_conjugate_flux_matches_quadrature(self, vel):
        pair = exponential_entropy(vel)
        for x in (0.2, 0.7, 1.0):
            expected = quad(lambda z: float(pair.conjugate(z)) * float(vel.slope(z)), 0.0, x, limit=200)[0]
            assert float(pair.conjugate_flux(x)) == pytest.approx(expected, abs=1e-10)

    def test_flux_weighted_entropy_is_nonconvex_but_usable(self, vel):
        pair = flux_weighted_entropy(vel)
        assert not pair.convex
        xs = np.linspace(0.0, 1.0, 101)
        np.testing.assert_allclose(pair.eta(xs), xs * (1 - xs), atol=1e-15)
        assert np.all(np.isfinite(pair.relative_dissipation(xs, xs[::-1])))

    def test_flux_weighted_needs_curvature_for_tables(self, vel_tab_kinky):
        with pytest.raises(ValueError, match="affine"):
            flux_weighted_entropy(vel_tab_kinky)


class TestVelocityGapInequality:
    def test_equal_states(self, vel):
        lhs, rhs = velocity_gap_bounds(vel, 0.4, 0.4)
        assert lhs == 0.0 and abs(rhs) <= 1e-14

    def test_greenshields_extremes_reach_equality(self, vel):
        lhs, rhs = velocity_gap_bounds(vel, 0.0, 1.0)
        assert lhs == pytest.approx(1.0)
        assert rhs == pytest.approx(1.0, abs=1e-12)

    def test_holds_on_random_pairs(self, vel, vel_tab_smoothish, vel_tab_kinky, rng):
        for velocity in (vel, vel_tab_smoothish, vel_tab_kinky):
            a = rng.uniform(0, 1, 1000)
            b = rng.uniform(0, 1, 1000)
            lhs, rhs = velocity_gap_bounds(velocity, a, b)
            assert np.all(lhs <= rhs + 1e-10)

    def test_defect_integral_nonnegative_any_order(self, vel_tab_kinky, rng):
        a = rng.uniform(0, 1, 500)
        b = rng.uniform(0, 1, 500)
        assert np.min(velocity_defect_integral(vel_tab_kinky, a, b)) >= -1e-12
