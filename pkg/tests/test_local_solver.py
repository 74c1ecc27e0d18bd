import math

import numpy as np
import pytest

from nonlocal_lwr.flux import Flux
from nonlocal_lwr.grid import Extension, Grid, GridFunction, l1_norm, mass
from nonlocal_lwr.local_solver import (
    GreenshieldsRiemann,
    RiemannDatum,
    godunov_step,
    kruzhkov_step_residual,
    solve_local,
)
from nonlocal_lwr.nonlocal_solver import SolverConfig


class TestExactRiemann:
    def test_equal_states_constant(self):
        sol = GreenshieldsRiemann(RiemannDatum(0.4, 0.4, 0.0))
        xs = np.linspace(-1, 1, 11)
        np.testing.assert_array_equal(sol.profile(xs, 0.7), np.full(11, 0.4))

    def test_stationary_shock(self):
        sol = GreenshieldsRiemann(RiemannDatum(0.0, 1.0, 0.0))
        assert sol.shock_speed == 0.0
        xs = np.array([-0.5, -1e-9, 1e-9, 0.5])
        np.testing.assert_array_equal(sol.profile(xs, 1.0), [0.0, 0.0, 1.0, 1.0])

    def test_moving_shock_speed(self):
        sol = GreenshieldsRiemann(RiemannDatum(0.1, 0.5, 0.0))
        assert sol.shock_speed == pytest.approx(0.4)
        assert float(sol.profile(0.39, 1.0)) == 0.1
        assert float(sol.profile(0.41, 1.0)) == 0.5

    def test_rarefaction_ramp_at_unit_time(self):
        sol = GreenshieldsRiemann(RiemannDatum(1.0, 0.0, 0.0))
        xs = np.linspace(-1.0, 1.0, 21)
        np.testing.assert_allclose(sol.profile(xs, 1.0), (1.0 - xs) / 2.0, atol=1e-14)
        assert float(sol.profile(-1.001, 1.0)) == 1.0
        assert float(sol.profile(1.001, 1.0)) == 0.0

    def test_initial_time_is_the_step(self):
        sol = GreenshieldsRiemann(RiemannDatum(1.0, 0.0, 0.25))
        assert float(sol.profile(0.2, 0.0)) == 1.0
        assert float(sol.profile(0.3, 0.0)) == 0.0

    def test_cell_averages_match_quadrature(self, rng):
        grid = Grid(-2, 2, 37)
        for datum in (RiemannDatum(1.0, 0.0, 0.1), RiemannDatum(0.2, 0.9, -0.3)):
            sol = GreenshieldsRiemann(datum)
            avg = sol.cell_averages(grid, 0.6).values
            fine = 400
            for j in (0, 11, 22, 36):
                xs = grid.x_min + (j + (np.arange(fine) + 0.5) / fine) * grid.dx
                assert avg[j] == pytest.approx(float(np.mean(sol.profile(xs, 0.6))), abs=1e-5)

    def test_states_validated(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            RiemannDatum(-0.1, 0.5)


class TestGodunovSolver:
    def test_constant_datum_unchanged(self, vel):
        grid = Grid(0, 1, 32)
        u0 = GridFunction(grid, np.full(32, 0.6), Extension.PERIODIC)
        traj = solve_local(u0, vel, SolverConfig(t_end=0.3))
        np.testing.assert_allclose(traj.final.u.values, 0.6, atol=1e-14)

    def test_stationary_shock_is_exact(self, vel):
        grid = Grid(-2, 2, 256)  # jump at 0 aligns with a cell edge
        sol = GreenshieldsRiemann(RiemannDatum(0.0, 1.0, 0.0))
        u0 = sol.cell_averages(grid, 0.0, Extension.CLAMP)
        traj = solve_local(u0, vel, SolverConfig(t_end=0.5, record_every=10**9))
        exact = sol.cell_averages(grid, 0.5, Extension.CLAMP)
        assert l1_norm(traj.final.u - exact) <= 1e-13

    def test_shock_refinement(self, vel):
        datum = RiemannDatum(0.1, 0.5, 0.3)
        errs = []
        for n in (320, 640, 1280):
            grid = Grid(-2, 2, n)
            sol = GreenshieldsRiemann(datum)
            u0 = sol.cell_averages(grid, 0.0, Extension.CLAMP)
            traj = solve_local(u0, vel, SolverConfig(t_end=0.5, record_every=10**9))
            errs.append(l1_norm(traj.final.u - sol.cell_averages(grid, 0.5, Extension.CLAMP)))
        assert errs[2] < errs[1] < errs[0]
        assert math.log2(errs[0] / errs[1]) >= 0.7

    def test_rarefaction_refinement(self, vel):
        datum = RiemannDatum(1.0, 0.0, 0.3)
        errs = []
        for n in (512, 1024, 2048):
            grid = Grid(-2, 2, n)
            sol = GreenshieldsRiemann(datum)
            u0 = sol.cell_averages(grid, 0.0, Extension.CLAMP)
            traj = solve_local(u0, vel, SolverConfig(t_end=0.5, record_every=10**9))
            errs.append(l1_norm(traj.final.u - sol.cell_averages(grid, 0.5, Extension.CLAMP)))
        assert errs[2] < errs[1] < errs[0]
        assert math.log2(errs[0] / errs[1]) >= 0.7

    def test_mass_conserved_periodic(self, vel, rng):
        grid = Grid(0, 2, 200)
        u0 = GridFunction(grid, rng.uniform(0, 1, 200), Extension.PERIODIC)
        traj = solve_local(u0, vel, SolverConfig(t_end=0.3))
        drift = np.abs(traj.mass_history() - mass(u0))
        assert np.max(drift) <= 1e-12 * max(1, traj.n_steps)

    def test_discrete_entropy_inequality(self, vel):
        flux = Flux(vel)
        grid = Grid(-1, 1, 200)
        sol = GreenshieldsRiemann(RiemannDatum(0.9, 0.1, 0.0))
        u = sol.cell_averages(grid, 0.0, Extension.CLAMP)
        dt = 0.5 * grid.dx / flux.max_char_speed
        worst = -np.inf
        for _ in range(40):
            u_new = godunov_step(u, flux, dt)
            for k in (0.1, 0.25, 0.5, 0.75, 0.9):
                worst = max(worst, kruzhkov_step_residual(u, u_new, flux, dt, k))
            u = u_new
        assert worst <= 1e-12

    def test_self_convergence_order(self, vel):
        from nonlocal_lwr.grid import coarsen

        finals = []
        for n in (128, 256, 512):
            grid = Grid(0, 2, n)
            edges = grid.edges
            k = np.pi  # one period on [0, 2]: u = 0.5 - 0.25 sin(pi x)
            anti = 0.5 * edges + (0.25 / k) * np.cos(k * edges)
            u0 = GridFunction(grid, np.diff(anti) / grid.dx, Extension.PERIODIC)
            finals.append(solve_local(u0, vel, SolverConfig(t_end=0.2, record_every=10**9)).final.u)
        e1 = l1_norm(coarsen(finals[1], 2) - finals[0])
        e2 = l1_norm(coarsen(finals[2], 2) - finals[1])
        assert math.log2(e1 / e2) >= 0.8
