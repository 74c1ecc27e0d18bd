"""Monotone finite-volume evolution of the nonlocal traffic model.

The conservation law is du/dt + d/dx (V(w) u) = 0 where w is the downstream
convolution of u.  The scheme is upwind with the look-ahead field evaluated
exactly at cell interfaces:

    F[i] = u[i-1] * V(W[i]),   W[i] = convolution at edge x_min + i*dx,

which matches the forward-anchored weight windows: the interface value is
the convolution anchored one cell downstream, with the same weights.  With
nonnegative, non-increasing weights this update is a convex-combination step
(up to the look-ahead coupling), and the discrete solution stays in [0, 1]
under the sharpened CFL restriction used by `solve`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .flux import Velocity
from .grid import Extension, GridFunction, mass, padded_values
from .kernels import Kernel, ScaledKernelWeights, build_weights, convolve_edges

__all__ = [
    "CFLError",
    "MaxPrincipleError",
    "NonlocalState",
    "Snapshot",
    "SolverConfig",
    "Trajectory",
    "advance",
    "initial_state",
    "solve",
    "solve_with_weights",
    "upwind_update",
]

BOUND_TOL = 1e-12


class CFLError(ValueError):
    pass


class MaxPrincipleError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    t_end: float
    cfl: float = 0.5
    record_every: int = 1
    scheme: str = "upwind_nonlocal"

    def __post_init__(self) -> None:
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")
        if self.t_end < 0.0:
            raise ValueError("t_end must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
        if self.scheme != "upwind_nonlocal":
            raise ValueError(f"unknown scheme: {self.scheme!r}")


@dataclass(frozen=True)
class Snapshot:
    t: float
    u: GridFunction
    w: GridFunction | None = None


@dataclass(frozen=True)
class Trajectory:
    """Ordered snapshots of one run, with the run's fixed step size."""

    snapshots: tuple[Snapshot, ...]
    dt: float
    n_steps: int
    velocity: Velocity
    horizon: float | None = None
    weights: ScaledKernelWeights | None = None
    u_range_raw: tuple[float, float] = (0.0, 1.0)

    @property
    def times(self) -> np.ndarray:
        return np.asarray([s.t for s in self.snapshots], dtype=np.float64)

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    @property
    def initial(self) -> Snapshot:
        return self.snapshots[0]

    @property
    def grid(self):
        return self.snapshots[0].u.grid

    @property
    def dx(self) -> float:
        return self.grid.dx

    def mass_history(self) -> np.ndarray:
        return np.asarray([mass(s.u) for s in self.snapshots], dtype=np.float64)


@dataclass(frozen=True)
class NonlocalState:
    t: float
    u: GridFunction
    w: GridFunction
    horizon: float
    weights: ScaledKernelWeights
    w_edges: np.ndarray = field(repr=False)
    # extremes of the last update before clamping, for bound reporting
    step_range_raw: tuple[float, float] = (0.0, 1.0)


def initial_state(u0: GridFunction, weights: ScaledKernelWeights, t: float = 0.0) -> NonlocalState:
    if np.any(u0.values < -BOUND_TOL) or np.any(u0.values > 1.0 + BOUND_TOL):
        raise ValueError("initial datum outside the admissible range [0, 1]")
    u0 = u0.with_values(np.clip(u0.values, 0.0, 1.0))
    edges = convolve_edges(u0, weights)
    w = u0.with_values(edges[: u0.grid.n_cells])
    return NonlocalState(t, u0, w, weights.horizon, weights, edges)


def max_stable_dt(dx: float, velocity: Velocity, cfl: float) -> float:
    return cfl * dx / velocity.sup_value


def upwind_update(u: GridFunction, interface_speeds: np.ndarray, dt: float) -> np.ndarray:
    """Transport part of the step: upwind fluxes against given edge speeds.

    For fixed nonnegative speeds with dt * max(speeds) <= dx this is a
    monotone (order-preserving) map of the cell values.
    """
    n = u.grid.n_cells
    upwind = padded_values(u, 1, 0)[: n + 1]
    flux = upwind * interface_speeds
    return u.values - (dt / u.grid.dx) * np.diff(flux)


def advance(state: NonlocalState, dt: float, velocity: Velocity, cfl: float = 1.0) -> NonlocalState:
    """One upwind step; raises on CFL violation or a maximum-principle breach."""
    grid = state.u.grid
    dx = grid.dx
    if dt > max_stable_dt(dx, velocity, cfl) * (1.0 + 1e-12):
        raise CFLError("time step too large")
    n = grid.n_cells
    speeds = np.asarray(velocity(state.w_edges), dtype=np.float64)
    u_new = upwind_update(state.u, speeds, dt)
    lo = float(np.min(u_new))
    hi = float(np.max(u_new))
    if lo < -BOUND_TOL or hi > 1.0 + BOUND_TOL:
        raise MaxPrincipleError("maximum principle violated")
    u = state.u.with_values(np.clip(u_new, 0.0, 1.0))
    edges = convolve_edges(u, state.weights)
    w = u.with_values(edges[:n])
    return NonlocalState(state.t + dt, u, w, state.horizon, state.weights, edges, (lo, hi))


def solve(
    initial: GridFunction,
    kernel: Kernel,
    horizon: float,
    velocity: Velocity,
    config: SolverConfig,
    tail_tol: float = 1e-12,
) -> Trajectory:
    """Evolve to t_end with a uniform step chosen once from the CFL bound.

    The step additionally resolves the look-ahead coupling: the denominator
    carries the first-weight correction w0 * Lip(V), which is what makes the
    discrete [0, 1] bound a theorem rather than an observation.  The result
    still satisfies dt <= cfl * dx / max V.
    """
    weights = build_weights(kernel, horizon, initial.grid.dx, tail_tol=tail_tol)
    return solve_with_weights(initial, weights, velocity, config)


def solve_with_weights(
    initial: GridFunction,
    weights: ScaledKernelWeights,
    velocity: Velocity,
    config: SolverConfig,
) -> Trajectory:
    dx = initial.grid.dx
    state = initial_state(initial, weights)
    w0 = float(weights.weights[0]) if weights.n_weights else 0.0
    dt_bound = config.cfl * dx / (velocity.sup_value + w0 * velocity.lipschitz)
    snaps = [Snapshot(0.0, state.u, state.w)]
    if config.t_end == 0.0:
        return Trajectory(tuple(snaps), 0.0, 0, velocity, weights.horizon, weights)

    n_steps = max(1, math.ceil(config.t_end / dt_bound - 1e-12))
    dt = config.t_end / n_steps
    u_lo, u_hi = 0.0, 1.0
    for i in range(1, n_steps + 1):
        state = advance(state, dt, velocity, config.cfl)
        u_lo = min(u_lo, state.step_range_raw[0])
        u_hi = max(u_hi, state.step_range_raw[1])
        if i % config.record_every == 0 or i == n_steps:
            snaps.append(Snapshot(i * dt, state.u, state.w))
    return Trajectory(
        tuple(snaps), dt, n_steps, velocity, weights.horizon, weights, u_range_raw=(u_lo, u_hi)
    )
