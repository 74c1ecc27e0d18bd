#!/usr/bin/env python3
"""Vanishing-horizon study: look-ahead error against the Godunov reference.

Solves the nonlocal model for both canonical kernels and both Riemann data,
prints the windowed L1 errors along the horizon sweep, and fits the observed
convergence rates.

Usage:
    python scripts/horizon_convergence_study.py [--n-cells N] [--t-end T]
"""

import argparse
import sys

import numpy as np

from nonlocal_lwr.diagnostics import fit_scaling
from nonlocal_lwr.flux import greenshields
from nonlocal_lwr.grid import Extension, Grid, coarsen, l1_distance_on_window
from nonlocal_lwr.kernels import ExponentialKernel, PiecewiseConstantKernel
from nonlocal_lwr.local_solver import GreenshieldsRiemann, RiemannDatum, solve_local
from nonlocal_lwr.nonlocal_solver import SolverConfig, solve


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-cells", type=int, default=4096)
    ap.add_argument("--t-end", type=float, default=0.4)
    ap.add_argument("--epsilons", type=float, nargs="+", default=[0.4, 0.2, 0.1, 0.05, 0.025])
    args = ap.parse_args()

    vel = greenshields()
    grid = Grid(-2.0, 3.0, args.n_cells)
    window = (-0.5, 1.5)
    kernels = [("uniform", PiecewiseConstantKernel()), ("exponential", ExponentialKernel())]
    data = [("jam ahead (0,1)", RiemannDatum(0.0, 1.0, 0.5)), ("jam behind (1,0)", RiemannDatum(1.0, 0.0, 0.5))]

    print(f"grid: {args.n_cells} cells on [-2, 3], T = {args.t_end}, window {window}")
    for dname, datum in data:
        sol = GreenshieldsRiemann(datum)
        u0 = sol.cell_averages(grid, 0.0, Extension.CLAMP)
        ref_grid = grid.refined(4)
        ref0 = sol.cell_averages(ref_grid, 0.0, Extension.CLAMP)
        ref = coarsen(solve_local(ref0, vel, SolverConfig(t_end=args.t_end, record_every=10**9)).final.u, 4)
        for kname, kernel in kernels:
            errs_w, errs_u = [], []
            for eps in args.epsilons:
                traj = solve(u0, kernel, eps, vel, SolverConfig(t_end=args.t_end, record_every=10**9))
                errs_w.append(l1_distance_on_window(traj.final.w, ref, window))
                errs_u.append(l1_distance_on_window(traj.final.u, ref, window))
            def rate(vals):
                try:
                    return f"{fit_scaling(args.epsilons, vals).fitted_exponent:.3f}"
                except ValueError:
                    return "n/a (zero error)"

            print(f"\n{dname} / {kname} kernel:")
            print("  eps      err_w        err_u")
            for eps, ew, eu in zip(args.epsilons, errs_w, errs_u):
                print(f"  {eps:<7g}  {ew:.5e}  {eu:.5e}")
            print(f"  fitted rates: err_w {rate(errs_w)}, err_u {rate(errs_u)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
