"""Godunov reference solver for the local conservation law du/dt + f(u)_x = 0.

This is the entropy solution the horizon sweep converges to.  For the
Greenshields flux the Riemann problem has a closed-form entropy solution
(stationary or moving shock for increasing jumps, centered rarefaction for
decreasing ones), provided here with exact cell averages for use as an
oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .flux import Flux, Velocity, godunov_flux
from .grid import Grid, GridFunction, padded_values
from .nonlocal_solver import CFLError, MaxPrincipleError, Snapshot, SolverConfig, Trajectory

__all__ = [
    "GreenshieldsRiemann",
    "RiemannDatum",
    "godunov_step",
    "kruzhkov_step_residual",
    "solve_local",
]

BOUND_TOL = 1e-12


@dataclass(frozen=True)
class RiemannDatum:
    u_left: float
    u_right: float
    x_jump: float = 0.0

    def __post_init__(self) -> None:
        for v in (self.u_left, self.u_right):
            if not 0.0 <= v <= 1.0:
                raise ValueError("Riemann states must lie in [0, 1]")


def godunov_step(u: GridFunction, flux: Flux, dt: float, cfl: float = 1.0) -> GridFunction:
    dx = u.grid.dx
    if dt > cfl * dx / flux.max_char_speed * (1.0 + 1e-12):
        raise CFLError("time step too large")
    ext = padded_values(u, 1, 1)
    f = godunov_flux(flux, ext[:-1], ext[1:])
    u_new = u.values - (dt / dx) * np.diff(f)
    if float(np.min(u_new)) < -BOUND_TOL or float(np.max(u_new)) > 1.0 + BOUND_TOL:
        raise MaxPrincipleError("maximum principle violated")
    return u.with_values(np.clip(u_new, 0.0, 1.0))


def solve_local(initial: GridFunction, velocity: Velocity, config: SolverConfig) -> Trajectory:
    if np.any(initial.values < -BOUND_TOL) or np.any(initial.values > 1.0 + BOUND_TOL):
        raise ValueError("initial datum outside the admissible range [0, 1]")
    flux = Flux(velocity)
    u = initial.with_values(np.clip(initial.values, 0.0, 1.0))
    snaps = [Snapshot(0.0, u, None)]
    if config.t_end == 0.0:
        return Trajectory(tuple(snaps), 0.0, 0, velocity)
    dt_bound = config.cfl * initial.grid.dx / flux.max_char_speed
    n_steps = max(1, math.ceil(config.t_end / dt_bound - 1e-12))
    dt = config.t_end / n_steps
    for i in range(1, n_steps + 1):
        u = godunov_step(u, flux, dt, config.cfl)
        if i % config.record_every == 0 or i == n_steps:
            snaps.append(Snapshot(i * dt, u, None))
    return Trajectory(tuple(snaps), dt, n_steps, velocity)


def kruzhkov_step_residual(u_old: GridFunction, u_new: GridFunction, flux: Flux, dt: float, k: float) -> float:
    """Largest positive per-step entropy residual for eta = |u - k|.

    Godunov with the matched numerical entropy flux
    Q(a, b) = F(max(a,k), max(b,k)) - F(min(a,k), min(b,k)) satisfies the
    discrete entropy inequality; the positive part of the residual should be
    rounding-level.
    """
    dx = u_old.grid.dx
    ext = padded_values(u_old, 1, 1)
    a, b = ext[:-1], ext[1:]
    q = godunov_flux(flux, np.maximum(a, k), np.maximum(b, k)) - godunov_flux(
        flux, np.minimum(a, k), np.minimum(b, k)
    )
    res = np.abs(u_new.values - k) - np.abs(u_old.values - k) + (dt / dx) * np.diff(q)
    return float(np.max(res))


class GreenshieldsRiemann:
    """Closed-form entropy solution for V = 1 - u and step initial data."""

    def __init__(self, datum: RiemannDatum) -> None:
        self.datum = datum
        ul, ur = datum.u_left, datum.u_right
        self.is_shock = ul < ur
        self.shock_speed = 1.0 - ul - ur  # Rankine-Hugoniot for f = u(1-u)
        # characteristic fan edges f'(u) = 1 - 2u
        self.speed_left = 1.0 - 2.0 * ul
        self.speed_right = 1.0 - 2.0 * ur

    def profile(self, x, t: float):
        """Pointwise solution values at time t >= 0."""
        if t < 0.0:
            raise ValueError("time must be nonnegative")
        x = np.asarray(x, dtype=np.float64)
        ul, ur = self.datum.u_left, self.datum.u_right
        xi = x - self.datum.x_jump
        if ul == ur:
            return np.full_like(x, ul)
        if self.is_shock or t == 0.0:
            xs = self.shock_speed * t if self.is_shock else 0.0
            return np.where(xi < xs, ul, ur)
        s = xi / t
        fan = 0.5 * (1.0 - s)
        return np.where(s <= self.speed_left, ul, np.where(s >= self.speed_right, ur, fan))

    def _antiderivative(self, x, t: float):
        """integral of the profile from the jump point to x (up to a constant)."""
        x = np.asarray(x, dtype=np.float64)
        ul, ur = self.datum.u_left, self.datum.u_right
        x0 = self.datum.x_jump
        xi = x - x0
        if ul == ur:
            return ul * xi
        if self.is_shock or t == 0.0:
            xs = self.shock_speed * t if self.is_shock else 0.0
            return ul * np.minimum(xi, xs) + ur * np.maximum(xi - xs, 0.0)
        a = self.speed_left * t
        b = self.speed_right * t

        def fan_int(y):
            # integral of (1 - s/t)/2 from a to y
            return 0.5 * (y - a) - (y * y - a * a) / (4.0 * t)

        left = ul * np.minimum(xi, a)
        mid = fan_int(np.clip(xi, a, b))
        right = ur * np.maximum(xi - b, 0.0)
        return left + mid + right

    def cell_averages(self, grid: Grid, t: float, extension="clamp") -> GridFunction:
        """Exact cell averages of the solution at time t."""
        anti = self._antiderivative(grid.edges, t)
        return GridFunction(grid, np.diff(anti) / grid.dx, extension)
