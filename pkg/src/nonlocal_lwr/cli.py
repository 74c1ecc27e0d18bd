"""Command-line interface.

Subcommands
-----------
run <config.json>      horizon sweep with CSV outputs and a manifest
riemann-table          exact Greenshields Riemann solution as CSV
kernels inspect        discrete weights of a kernel for given horizon / dx
oracle-suite           randomized rearrangement / bathtub property checks

Exit codes: 0 success, 2 scenario validation failure, 3 inequality violation
under --strict-inequalities, 1 anything else.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .grid import Grid
from .kernels import build_weights, kernel_from_spec, load_tabulated_kernel
from .local_solver import GreenshieldsRiemann, RiemannDatum
from .rearrangement import (
    DiscreteProfile,
    OracleViolation,
    bathtub_extremes,
    quadratic_cap_map,
    rearrangement_pairing,
    shifted_monotone_positivity,
)
from .scenarios import ScenarioValidationError, load_scenario
from .sweep import run_sweep

ANALYTIC_KERNELS = ("piecewise_constant", "exponential", "linear")


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.config)
    except ScenarioValidationError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.config).parent / f"out_{Path(args.config).stem}"
    sweep = run_sweep(scenario, out_dir=out_dir, threads=args.threads, dump_snapshots=args.dump_snapshots)
    for r in sorted(sweep.results, key=lambda x: -x.epsilon):
        if r.failed is not None:
            print(f"epsilon={r.epsilon:g}: FAILED ({r.failed})")
        else:
            print(f"epsilon={r.epsilon:g}: err_w={r.err_w:.6e} err_u={r.err_u:.6e}")
    for name, fit in sorted(sweep.fits.items()):
        print(f"fit {name}: exponent={fit.fitted_exponent:.4f} residual={fit.fit_residual:.2e}")
    if sweep.violations:
        print("inequality slack exceeded:", file=sys.stderr)
        for v in sweep.violations:
            print(f"  {v}", file=sys.stderr)
        if args.strict_inequalities:
            return 3
    if sweep.all_failed:
        print("every horizon failed", file=sys.stderr)
        return 1
    print(f"wrote results to {out_dir}")
    return 0


def _cmd_riemann_table(args) -> int:
    datum = RiemannDatum(args.u_left, args.u_right, args.x_jump)
    sol = GreenshieldsRiemann(datum)
    grid = Grid(args.x_min, args.x_max, args.n_cells)
    avg = sol.cell_averages(grid, args.time)
    lines = ["x,u"]
    for x, u in zip(grid.centers, avg.values):
        lines.append(f"{float(x)!r},{float(u)!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_kernels_inspect(args) -> int:
    if args.spec in ANALYTIC_KERNELS:
        kernel = kernel_from_spec({"kind": args.spec})
    else:
        kernel = load_tabulated_kernel(args.spec)
    w = build_weights(kernel, args.epsilon, args.dx, tail_tol=args.tail_tol)
    lines = ["k,offset_lo,offset_hi,weight"]
    for k, wk in enumerate(w.weights):
        lines.append(f"{k},{float(k * args.dx)!r},{float((k + 1) * args.dx)!r},{float(wk)!r}")
    lines.append(f"# sum_weights,{float(np.sum(w.weights))!r}")
    lines.append(f"# truncation_tail,{float(w.truncation_tail)!r}")
    lines.append(f"# strictly_monotone,{kernel.is_strictly_monotone}")
    lines.append(f"# convex,{kernel.is_convex}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_oracle_suite(args) -> int:
    rng = np.random.default_rng(args.seed)
    lines = [f"oracle suite: seed={args.seed} cases={args.cases}"]
    failures = 0

    worst_gap = np.inf
    for _ in range(args.cases):
        n = int(rng.integers(1, 9))
        f = DiscreteProfile(rng.uniform(0.0, 1.0, n))
        g = DiscreteProfile(rng.uniform(0.0, 1.0, int(rng.integers(1, 9))))
        try:
            lhs, rhs = rearrangement_pairing(f, g)
            worst_gap = min(worst_gap, rhs - lhs)
        except OracleViolation:
            failures += 1
    lines.append(f"rearrangement_pairing: min(rhs-lhs)={worst_gap:.6e} failures={failures}")

    worst = np.inf
    for _ in range(args.cases):
        n = int(rng.integers(2, 17))
        h = DiscreteProfile(rng.uniform(0.0, 1.0, n))
        shift = int(rng.integers(1, n))
        delta = float(rng.uniform(0.05, 1.0))
        fn = quadratic_cap_map(delta)
        try:
            worst = min(worst, shifted_monotone_positivity(h, fn, shift))
        except OracleViolation:
            failures += 1
    lines.append(f"shifted_monotone_positivity (quadratic cap map): min={worst:.6e} failures={failures}")

    bracket_fail = 0
    checked = 0
    for _ in range(args.cases):
        length = float(rng.uniform(0.5, 2.0))
        cap = float(rng.uniform(0.5, 2.0))
        total = float(rng.uniform(0.0, 1.0)) * cap * length
        c = float(rng.uniform(0.0, 2.0))
        psi = lambda z, c=c: z + c * z * z
        lo, hi = bathtub_extremes(psi, length, cap, total)
        m = 64
        prof = rng.uniform(0.0, cap, m)
        scale = total / max(float(np.sum(prof)) * (length / m), 1e-300)
        if scale > 1.0:
            continue  # random profile cannot carry this much mass; skip
        prof = prof * scale  # 0 <= prof <= cap with exactly the right mass
        edges = np.linspace(0.0, length, m + 1)
        anti = edges**2 / 2.0 + c * edges**3 / 3.0  # exact antiderivative of psi
        val = float(np.sum(prof * np.diff(anti)))
        checked += 1
        if not (lo - 1e-9 <= val <= hi + 1e-9):
            bracket_fail += 1
    lines.append(f"bathtub_extremes bracketing: checked={checked} failures={bracket_fail}")
    failures += bracket_fail

    lines.append("RESULT: " + ("PASS" if failures == 0 else f"FAIL ({failures})"))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nonlocal-lwr", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a horizon sweep from a JSON scenario")
    run.add_argument("config")
    run.add_argument("--out-dir", default=None)
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--strict-inequalities", action="store_true")
    run.add_argument("--dump-snapshots", action="store_true")
    run.set_defaults(fn=_cmd_run)

    rt = sub.add_parser("riemann-table", help="exact Greenshields Riemann solution as CSV")
    rt.add_argument("--u-left", type=float, required=True)
    rt.add_argument("--u-right", type=float, required=True)
    rt.add_argument("--x-jump", type=float, default=0.0)
    rt.add_argument("--time", type=float, required=True)
    rt.add_argument("--x-min", type=float, default=-2.0)
    rt.add_argument("--x-max", type=float, default=2.0)
    rt.add_argument("--n-cells", type=int, default=400)
    rt.add_argument("--out", default=None)
    rt.set_defaults(fn=_cmd_riemann_table)

    kern = sub.add_parser("kernels", help="kernel utilities")
    ksub = kern.add_subparsers(dest="kernels_command", required=True)
    insp = ksub.add_parser("inspect", help="emit discrete weights for a kernel")
    insp.add_argument("spec", help="piecewise_constant | exponential | linear | path to a table file")
    insp.add_argument("--epsilon", type=float, required=True)
    insp.add_argument("--dx", type=float, required=True)
    insp.add_argument("--tail-tol", type=float, default=1e-12)
    insp.add_argument("--out", default=None)
    insp.set_defaults(fn=_cmd_kernels_inspect)

    orc = sub.add_parser("oracle-suite", help="run the randomized inequality oracles")
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--cases", type=int, default=1000)
    orc.add_argument("--out", default=None)
    orc.set_defaults(fn=_cmd_oracle_suite)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioValidationError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
