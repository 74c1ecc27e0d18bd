#!/usr/bin/env python3
"""Run every bundled scenario and persist CSVs + manifests.

Usage:
    python scripts/run_bundled_sweeps.py [--out-dir OUT] [--threads N] [--dump-snapshots]

Each scenario gets its own subdirectory under OUT (default: ./out).
"""

import argparse
import sys
import time
from pathlib import Path

from nonlocal_lwr.scenarios import bundled_scenario_names, bundled_scenario_path, load_scenario
from nonlocal_lwr.sweep import run_sweep


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--dump-snapshots", action="store_true")
    args = ap.parse_args()

    root = Path(args.out_dir)
    t0 = time.perf_counter()
    failures = 0
    for name in bundled_scenario_names():
        scenario = load_scenario(bundled_scenario_path(name))
        out = root / scenario.name
        sweep = run_sweep(scenario, out_dir=out, threads=args.threads, dump_snapshots=args.dump_snapshots)
        fit = sweep.fits.get("err_w")
        rate = f"err_w rate {fit.fitted_exponent:.3f}" if fit else "no fit"
        bad = sum(1 for r in sweep.results if r.failed is not None)
        failures += bad
        print(f"{scenario.name:<28} {rate:<22} violations={len(sweep.violations)} failed={bad}  -> {out}")
    print(f"done in {time.perf_counter() - t0:.1f} s")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
