"""Finite-volume laboratory for nonlocal LWR-type traffic models.

Simulates the conservation law du/dt + d/dx(V(w) u) = 0 with a downstream
look-ahead field w (a rescaled anisotropic convolution of u), evaluates the
entropy-dissipation functionals that control its vanishing-horizon limit,
and measures convergence toward the local entropy solution produced by a
Godunov reference solver.
"""

__version__ = "0.1.0"

from .grid import Extension, Grid, GridFunction
from .flux import Flux, Velocity, godunov_flux, greenshields, tabulated_velocity
from .kernels import (
    ExponentialKernel,
    Kernel,
    LinearKernel,
    PiecewiseConstantKernel,
    TabulatedKernel,
    build_weights,
    convolve,
)
from .entropy import EntropyPair, quadratic_entropy
from .nonlocal_solver import SolverConfig, Trajectory, solve
from .local_solver import GreenshieldsRiemann, RiemannDatum, solve_local
from .scenarios import Scenario, load_scenario, validate_scenario
from .sweep import run_sweep

__all__ = [
    "EntropyPair",
    "ExponentialKernel",
    "Extension",
    "Flux",
    "GreenshieldsRiemann",
    "Grid",
    "GridFunction",
    "Kernel",
    "LinearKernel",
    "PiecewiseConstantKernel",
    "RiemannDatum",
    "Scenario",
    "SolverConfig",
    "TabulatedKernel",
    "Trajectory",
    "Velocity",
    "__version__",
    "build_weights",
    "convolve",
    "godunov_flux",
    "greenshields",
    "load_scenario",
    "quadratic_entropy",
    "run_sweep",
    "solve",
    "solve_local",
    "tabulated_velocity",
    "validate_scenario",
]
