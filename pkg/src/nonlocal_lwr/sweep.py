"""Horizon sweeps: nonlocal runs, local reference, errors, and persistence.

One sweep solves the nonlocal model for every horizon in the scenario,
solves the local equation once on a 4x-refined grid as the reference entropy
solution, measures windowed L1 errors, evaluates the toggled diagnostics
with their bounds, fits log-log scalings, and writes everything to CSV plus
a manifest that reproduces the run exactly (no timestamps, fixed float
formatting, fixed row order).
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import BoundedValue, DiagnosticsReport, compute_report, fit_scaling
from .grid import GridFunction, coarsen, l1_distance_on_window
from .local_solver import solve_local
from .nonlocal_solver import Snapshot, SolverConfig, Trajectory, solve
from .scenarios import Scenario, build_initial, build_kernel, build_velocity, validate_scenario

__all__ = ["EpsilonResult", "SweepResult", "run_sweep", "run_sweep_from_manifest"]

REFERENCE_REFINEMENT = 4


@dataclass
class EpsilonResult:
    epsilon: float
    err_w: float = math.nan
    err_u: float = math.nan
    report: DiagnosticsReport | None = None
    final: Snapshot | None = None
    dt: float = math.nan
    n_steps: int = 0
    failed: str | None = None

    @property
    def quantities(self) -> dict:
        return {} if self.report is None else self.report.quantities


@dataclass
class SweepResult:
    scenario: Scenario
    results: list[EpsilonResult]
    fits: dict = field(default_factory=dict)
    fit_skipped: dict = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)
    reference_final: GridFunction | None = None

    @property
    def all_failed(self) -> bool:
        return all(r.failed is not None for r in self.results)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def _reference(scenario: Scenario, velocity) -> tuple[GridFunction, Trajectory]:
    grid = scenario.make_grid().refined(REFERENCE_REFINEMENT)
    u0 = build_initial(scenario, grid)
    stride = 1 if scenario.error_norm == "spacetime" else 10**9
    config = SolverConfig(t_end=scenario.t_end, cfl=scenario.cfl, record_every=stride)
    traj = solve_local(u0, velocity, config)
    return coarsen(traj.final.u, REFERENCE_REFINEMENT), traj


def _time_interp(traj: Trajectory, t: float) -> np.ndarray:
    times = traj.times
    idx = int(np.clip(np.searchsorted(times, t) - 1, 0, len(times) - 2))
    t0, t1 = times[idx], times[idx + 1]
    lam = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
    lam = min(max(lam, 0.0), 1.0)
    return (1.0 - lam) * traj.snapshots[idx].u.values + lam * traj.snapshots[idx + 1].u.values


def _spacetime_error(nl: Trajectory, ref: Trajectory, window, which: str) -> float:
    total = 0.0
    dts = np.diff(nl.times)
    for i, dt in enumerate(dts):
        snap = nl.snapshots[i]
        f = snap.w if which == "w" else snap.u
        ref_vals = _time_interp(ref, nl.times[i])
        ref_fun = GridFunction(ref.grid, ref_vals, ref.snapshots[0].u.extension)
        total += dt * l1_distance_on_window(f, coarsen(ref_fun, REFERENCE_REFINEMENT), window)
    return total


def _run_one(scenario: Scenario, eps: float, velocity, kernel, ref_final, ref_traj) -> EpsilonResult:
    grid = scenario.make_grid()
    u0 = build_initial(scenario, grid)
    config = SolverConfig(t_end=scenario.t_end, cfl=scenario.cfl, record_every=scenario.record_every)
    try:
        traj = solve(u0, kernel, eps, velocity, config, tail_tol=scenario.tail_tol)
        report = compute_report(traj, scenario.diagnostics)
        err_w = l1_distance_on_window(traj.final.w, ref_final, scenario.window)
        err_u = l1_distance_on_window(traj.final.u, ref_final, scenario.window)
        if scenario.error_norm == "spacetime":
            err_w = _spacetime_error(traj, ref_traj, scenario.window, "w")
            err_u = _spacetime_error(traj, ref_traj, scenario.window, "u")
        return EpsilonResult(
            epsilon=eps,
            err_w=err_w,
            err_u=err_u,
            report=report,
            final=traj.final,
            dt=traj.dt,
            n_steps=traj.n_steps,
        )
    except Exception as exc:  # a failed horizon is recorded, the sweep goes on
        return EpsilonResult(epsilon=eps, failed=f"{type(exc).__name__}: {exc}")


def run_sweep(
    scenario: Scenario,
    out_dir=None,
    threads: int = 1,
    dump_snapshots: bool = False,
) -> SweepResult:
    velocity = build_velocity(scenario.velocity)
    kernel = build_kernel(scenario.kernel)
    ref_final, ref_traj = _reference(scenario, velocity)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda e: _run_one(scenario, e, velocity, kernel, ref_final, ref_traj), scenario.epsilons)
            )
    else:
        results = [_run_one(scenario, e, velocity, kernel, ref_final, ref_traj) for e in scenario.epsilons]

    ok = [r for r in results if r.failed is None]
    fits: dict = {}
    fit_skipped: dict = {}
    if len(ok) >= 3:
        eps = [r.epsilon for r in ok]
        candidates = {"err_w": [r.err_w for r in ok], "err_u": [r.err_u for r in ok]}
        keys = sorted({k for r in ok for k in r.quantities})
        for k in keys:
            if all(k in r.quantities for r in ok):
                candidates[k] = [r.quantities[k].value for r in ok]
        for name, vals in sorted(candidates.items()):
            if all(v > 0.0 and math.isfinite(v) for v in vals):
                fits[name] = fit_scaling(eps, vals)
            else:
                bad = [e for e, v in zip(eps, vals) if not (v > 0.0 and math.isfinite(v))]
                fit_skipped[name] = f"non-positive values at epsilon = {bad}"

    violations = [
        f"epsilon={r.epsilon:g} {name}: value {bv.value!r} exceeds bound {bv.bound!r}"
        for r in ok
        for name, bv in sorted(r.quantities.items())
        if bv.violated
    ]

    manifest = _manifest(scenario, results)
    sweep = SweepResult(scenario, results, fits, fit_skipped, manifest, violations, reference_final=ref_final)
    if out_dir is not None:
        _persist(sweep, Path(out_dir), dump_snapshots)
    return sweep


def _manifest(scenario: Scenario, results) -> dict:
    import numpy
    import scipy

    from .kernels import convergence_regime

    cfg = scenario.to_dict()
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return {
        "scenario": cfg,
        "config_hash": hashlib.sha256(blob).hexdigest(),
        "convergence_regime": convergence_regime(build_kernel(scenario.kernel), scenario.velocity["kind"]),
        "dx": scenario.dx,
        "per_epsilon": {
            f"{r.epsilon:g}": {"dt": None if math.isnan(r.dt) else r.dt, "n_steps": r.n_steps, "failed": r.failed}
            for r in results
        },
        "reference_refinement": REFERENCE_REFINEMENT,
        "versions": {"nonlocal-lwr": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__},
    }


def run_sweep_from_manifest(path, out_dir=None, threads: int = 1) -> SweepResult:
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    scenario = validate_scenario(manifest["scenario"])
    return run_sweep(scenario, out_dir=out_dir, threads=threads)


def _persist(sweep: SweepResult, out: Path, dump_snapshots: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    results = sorted(sweep.results, key=lambda r: -r.epsilon)
    qkeys = sorted({k for r in results for k in r.quantities})

    lines = ["epsilon,err_w,err_u,status," + ",".join(f"{k},{k}_bound" for k in qkeys)]
    for r in results:
        cells = [_fmt(r.epsilon), _fmt(r.err_w), _fmt(r.err_u), "ok" if r.failed is None else f"failed: {r.failed}"]
        for k in qkeys:
            bv = r.quantities.get(k)
            cells.extend(["", ""] if bv is None else [_fmt(bv.value), _fmt(bv.bound)])
        lines.append(",".join(cells))
    (out / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    rows = ["epsilon,quantity_name,value,bound,slack"]
    for r in results:
        if r.failed is not None:
            continue
        rows.append(f"{_fmt(r.epsilon)},err_w,{_fmt(r.err_w)},,")
        rows.append(f"{_fmt(r.epsilon)},err_u,{_fmt(r.err_u)},,")
        for k in qkeys:
            bv = r.quantities.get(k)
            if bv is not None:
                slack = "" if math.isnan(bv.bound) else _fmt(bv.slack)
                rows.append(f"{_fmt(r.epsilon)},{k},{_fmt(bv.value)},{_fmt(bv.bound)},{slack}")
    (out / "scaling.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    frows = ["quantity_name,fitted_exponent,fit_residual,n_points"]
    for name, f in sorted(sweep.fits.items()):
        frows.append(f"{name},{_fmt(f.fitted_exponent)},{_fmt(f.fit_residual)},{len(f.epsilons)}")
    (out / "fits.csv").write_text("\n".join(frows) + "\n", encoding="utf-8")

    for r in results:
        if r.report is None:
            continue
        tag = f"{r.epsilon:g}"
        dlines = ["t,tv_w,tv_u,mass,l2_u"]
        rep = r.report
        for i in range(len(rep.times)):
            dlines.append(
                ",".join(_fmt(v) for v in (rep.times[i], rep.tv_w[i], rep.tv_u[i], rep.mass[i], rep.l2_u[i]))
            )
        (out / f"diagnostics_{tag}.csv").write_text("\n".join(dlines) + "\n", encoding="utf-8")

    (out / "manifest.json").write_text(
        json.dumps(sweep.manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    if dump_snapshots:
        _dump_snapshots(sweep, out)


def _dump_snapshots(sweep: SweepResult, out: Path) -> None:
    """Raw final snapshots as flat float64 arrays with a small JSON header."""

    def write(tag: str, grid, t: float, fields: dict) -> None:
        header = {
            "n_cells": grid.n_cells,
            "dx": grid.dx,
            "x_min": grid.x_min,
            "t": t,
            "fields": sorted(fields),
            "dtype": "<f8",
            "layout": "field-major",
        }
        (out / f"snapshot_{tag}.json").write_text(json.dumps(header, sort_keys=True, indent=2) + "\n")
        buf = np.concatenate([fields[k] for k in sorted(fields)]).astype("<f8")
        (out / f"snapshot_{tag}.bin").write_bytes(buf.tobytes())

    for r in sorted(sweep.results, key=lambda x: -x.epsilon):
        if r.final is None:
            continue
        grid = r.final.u.grid
        write(f"{r.epsilon:g}", grid, r.final.t, {"u": r.final.u.values, "w": r.final.w.values})
    if sweep.reference_final is not None:
        ref = sweep.reference_final
        write("reference", ref.grid, sweep.scenario.t_end, {"u": ref.values})
