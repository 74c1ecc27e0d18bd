import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_lwr.grid import (
    Extension,
    Grid,
    GridFunction,
    GridMismatchError,
    coarsen,
    l1_distance_on_window,
    l1_norm,
    l2_norm_sq,
    mass,
    shift_sample,
    total_variation,
)


def gf(values, extension=Extension.ZERO, x_min=0.0, x_max=1.0):
    return GridFunction(Grid(x_min, x_max, len(values)), np.asarray(values, float), extension)


values_strategy = st.lists(
    st.floats(min_value=-10.0, max_value=10.0, allow_nan=False), min_size=2, max_size=40
)


class TestGridValidation:
    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            Grid(1.0, 0.0, 4)

    def test_too_few_cells(self):
        with pytest.raises(ValueError):
            Grid(0.0, 1.0, 1)

    def test_wrong_length_values(self):
        with pytest.raises(ValueError):
            GridFunction(Grid(0, 1, 4), np.ones(3))

    def test_non_finite_values(self):
        with pytest.raises(ValueError):
            GridFunction(Grid(0, 1, 2), [np.nan, 1.0])

    def test_values_immutable(self):
        f = gf([1.0, 2.0])
        with pytest.raises(ValueError):
            f.values[0] = 3.0


class TestNorms:
    def test_l1_zero_function(self):
        assert l1_norm(gf([0.0] * 5)) == 0.0

    def test_l1_unit_constant(self):
        assert l1_norm(gf([1.0] * 8)) == pytest.approx(1.0, abs=1e-15)

    def test_l1_half_indicator(self):
        # indicator of [0, 0.5) on [0, 1] with 4 cells
        assert l1_norm(gf([1.0, 1.0, 0.0, 0.0])) == pytest.approx(0.5, abs=1e-15)

    def test_l2_examples(self):
        assert l2_norm_sq(gf([0.0] * 4)) == 0.0
        assert l2_norm_sq(gf([1.0] * 7)) == pytest.approx(1.0, abs=1e-15)
        assert l2_norm_sq(gf([0.5] * 10, x_max=2.0)) == pytest.approx(0.5, abs=1e-15)

    @given(values_strategy)
    @settings(max_examples=50, deadline=None)
    def test_nonnegative(self, values):
        f = gf(values)
        assert l1_norm(f) >= 0.0
        assert l2_norm_sq(f) >= 0.0
        assert total_variation(f) >= 0.0


class TestTotalVariation:
    def test_constant_zero_extension(self):
        assert total_variation(gf([0.7] * 6)) == pytest.approx(1.4, abs=1e-15)

    def test_monotone_step_clamp(self):
        f = gf([0.0, 0.0, 1.0, 1.0], Extension.CLAMP)
        assert total_variation(f) == pytest.approx(1.0, abs=1e-15)

    def test_up_down_clamp(self):
        assert total_variation(gf([0.0, 1.0, 0.0], Extension.CLAMP)) == pytest.approx(2.0)

    def test_periodic_wrap_jump(self):
        assert total_variation(gf([0.0, 1.0], Extension.PERIODIC)) == pytest.approx(2.0)

    @given(values_strategy, st.integers(min_value=-5, max_value=5))
    @settings(max_examples=50, deadline=None)
    def test_whole_cell_shift_invariance_periodic(self, values, k):
        f = gf(values, Extension.PERIODIC)
        g = shift_sample(f, k * f.grid.dx)
        assert total_variation(g) == pytest.approx(total_variation(f), abs=1e-9)


class TestWindowDistance:
    def test_equal_functions(self):
        f = gf([0.3, 0.8, 0.1, 0.5])
        assert l1_distance_on_window(f, f, (0.0, 1.0)) == 0.0

    def test_unit_gap_half_window(self):
        f = gf([1.0] * 8)
        g = gf([0.0] * 8)
        assert l1_distance_on_window(f, g, (0.0, 0.5)) == pytest.approx(0.5, abs=1e-15)

    def test_matches_bruteforce(self, rng):
        a = rng.uniform(-1, 1, 16)
        b = rng.uniform(-1, 1, 16)
        f, g = gf(a), gf(b)
        lo, hi = 0.2, 0.8
        dx = f.grid.dx
        expected = sum(
            dx * abs(a[j] - b[j])
            for j in range(16)
            if lo <= f.grid.centers[j] <= hi
        )
        assert l1_distance_on_window(f, g, (lo, hi)) == pytest.approx(expected, rel=1e-13)

    def test_whole_domain_equals_l1_of_difference(self, rng):
        a = rng.uniform(-1, 1, 12)
        b = rng.uniform(-1, 1, 12)
        f, g = gf(a), gf(b)
        assert l1_distance_on_window(f, g, (0.0, 1.0)) == pytest.approx(l1_norm(f - g), abs=1e-15)

    def test_grid_mismatch(self):
        f = gf([1.0, 2.0])
        g = GridFunction(Grid(0.0, 2.0, 2), [1.0, 2.0])
        with pytest.raises(GridMismatchError, match="grid mismatch"):
            l1_distance_on_window(f, g, (0.0, 1.0))

    def test_window_outside_domain(self):
        f = gf([1.0, 2.0])
        with pytest.raises(ValueError):
            l1_distance_on_window(f, f, (-1.0, 0.5))


class TestShiftSample:
    def test_zero_offset_identity(self, rng):
        f = gf(rng.uniform(0, 1, 9), Extension.CLAMP)
        np.testing.assert_array_equal(shift_sample(f, 0.0).values, f.values)

    def test_whole_cell_periodic_rotation(self):
        f = gf([1.0, 2.0, 3.0, 4.0], Extension.PERIODIC)
        np.testing.assert_allclose(shift_sample(f, f.grid.dx).values, [2.0, 3.0, 4.0, 1.0])

    def test_half_cell_zero_extension(self):
        f = gf([0.0, 1.0])
        np.testing.assert_allclose(shift_sample(f, 0.25).values, [0.5, 0.5])

    def test_negative_offset(self):
        f = gf([0.0, 1.0, 0.0, 0.0], Extension.PERIODIC)
        np.testing.assert_allclose(shift_sample(f, -f.grid.dx).values, [0.0, 0.0, 1.0, 0.0])

    @given(values_strategy, st.floats(min_value=-3.0, max_value=3.0, allow_nan=False))
    @settings(max_examples=80, deadline=None)
    def test_mass_conserved_periodic(self, values, offset):
        f = gf(values, Extension.PERIODIC)
        g = shift_sample(f, offset)
        assert mass(g) == pytest.approx(mass(f), abs=1e-12)

    def test_exactness_against_fine_average(self, rng):
        # shifting cell averages must equal averaging the shifted function
        vals = rng.uniform(0, 1, 10)
        f = gf(vals, Extension.ZERO)
        offset = 0.137
        shifted = shift_sample(f, offset)
        fine = gf(np.repeat(vals, 50), Extension.ZERO)  # same function, finer cells
        fine_shift = shift_sample(fine, offset)
        np.testing.assert_allclose(
            fine_shift.values.reshape(10, 50).mean(axis=1), shifted.values, atol=1e-12
        )


class TestCoarsen:
    def test_block_average(self):
        f = gf([1.0, 3.0, 5.0, 7.0])
        g = coarsen(f, 2)
        np.testing.assert_allclose(g.values, [2.0, 6.0])
        assert g.grid.n_cells == 2
        assert mass(g) == pytest.approx(mass(f), abs=1e-15)

    def test_indivisible(self):
        with pytest.raises(ValueError):
            coarsen(gf([1.0, 2.0, 3.0]), 2)
