"""Experiment descriptions: initial data, model pieces, sweep parameters.

A scenario is a JSON mapping validated into a frozen dataclass; validation
reports every violated constraint, not just the first.  Initial cell
averages of the built-in data shapes are computed by exact integration of
their antiderivatives, so convergence measurements are not polluted by
O(dx) initialization noise.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from .flux import Velocity, greenshields, load_tabulated_velocity, tabulated_velocity
from .grid import Extension, Grid, GridFunction
from .kernels import Kernel, kernel_from_spec

__all__ = [
    "Scenario",
    "ScenarioValidationError",
    "build_initial",
    "build_kernel",
    "build_velocity",
    "bundled_scenario_names",
    "bundled_scenario_path",
    "load_scenario",
    "validate_scenario",
]

KNOWN_DIAGNOSTICS = {
    "dissipation_constant",
    "energy_identity",
    "grad_w",
    "dissipation_exponential",
    "exp_identity",
    "tv_transfer",
    "entropy_production",
    "tv_monotonicity",
    "mass_drift",
}

_CONSTANT_KERNEL_ONLY = {"dissipation_constant", "energy_identity", "grad_w"}
_EXPONENTIAL_KERNEL_ONLY = {"dissipation_exponential", "exp_identity", "tv_transfer"}


class ScenarioValidationError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("invalid scenario:\n  - " + "\n  - ".join(errors))
        self.errors = list(errors)


@dataclass(frozen=True)
class Scenario:
    name: str
    initial: dict
    velocity: dict
    kernel: dict
    epsilons: tuple[float, ...]
    grid: tuple[float, float, int]
    t_end: float
    window: tuple[float, float]
    extension: str = "zero"
    cfl: float = 0.5
    record_every: int = 1
    diagnostics: tuple[str, ...] = ()
    seed: int = 0
    error_norm: str = "final"
    tail_tol: float = 1e-12

    def make_grid(self) -> Grid:
        return Grid(self.grid[0], self.grid[1], self.grid[2])

    @property
    def dx(self) -> float:
        return (self.grid[1] - self.grid[0]) / self.grid[2]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["epsilons"] = list(self.epsilons)
        d["grid"] = {"x_min": self.grid[0], "x_max": self.grid[1], "n_cells": self.grid[2]}
        d["window"] = list(self.window)
        d["diagnostics"] = list(self.diagnostics)
        return d


def _num(raw, key, errors, default=None, lo=None, hi=None, integer=False):
    if key not in raw:
        if default is None:
            errors.append(f"missing field: {key}")
            return None
        return default
    v = raw[key]
    if integer:
        if not isinstance(v, int) or isinstance(v, bool):
            errors.append(f"{key} must be an integer")
            return None
    elif not isinstance(v, (int, float)) or isinstance(v, bool):
        errors.append(f"{key} must be a number")
        return None
    if lo is not None and v < lo:
        errors.append(f"{key} must be >= {lo}")
        return None
    if hi is not None and v > hi:
        errors.append(f"{key} must be <= {hi}")
        return None
    return v


def _validate_initial(spec, errors) -> None:
    if not isinstance(spec, dict) or "kind" not in spec:
        errors.append("initial must be a mapping with a 'kind'")
        return
    kind = spec["kind"]
    rng_msg = "initial datum outside the admissible range [0, 1]"
    if kind == "riemann":
        for k in ("u_left", "u_right"):
            v = spec.get(k)
            if not isinstance(v, (int, float)):
                errors.append(f"riemann initial needs numeric {k}")
            elif not 0.0 <= v <= 1.0:
                errors.append(f"{rng_msg}: {k} = {v}")
        if not isinstance(spec.get("x_jump", 0.0), (int, float)):
            errors.append("riemann x_jump must be a number")
    elif kind == "box":
        h = spec.get("height")
        if not isinstance(h, (int, float)) or not 0.0 <= h <= 1.0:
            errors.append(f"{rng_msg}: box height")
        if not (isinstance(spec.get("a"), (int, float)) and isinstance(spec.get("b"), (int, float))):
            errors.append("box initial needs numeric a and b")
        elif spec["a"] >= spec["b"]:
            errors.append("box initial needs a < b")
    elif kind == "bump":
        h = spec.get("height")
        if not isinstance(h, (int, float)) or not 0.0 <= h <= 1.0:
            errors.append(f"{rng_msg}: bump height")
        if not isinstance(spec.get("center"), (int, float)):
            errors.append("bump initial needs a numeric center")
        w = spec.get("width")
        if not isinstance(w, (int, float)) or w <= 0.0:
            errors.append("bump initial needs a positive width")
    elif kind == "sine":
        mean = spec.get("mean")
        amp = spec.get("amplitude")
        if not (isinstance(mean, (int, float)) and isinstance(amp, (int, float))):
            errors.append("sine initial needs numeric mean and amplitude")
        elif amp < 0 or mean - amp < -1e-12 or mean + amp > 1.0 + 1e-12:
            errors.append(f"{rng_msg}: sine mean +- amplitude")
        periods = spec.get("periods", 1)
        if not isinstance(periods, int) or periods < 1:
            errors.append("sine periods must be a positive integer")
    elif kind == "table":
        if "path" not in spec and "points" not in spec:
            errors.append("table initial needs a path or points")
    else:
        errors.append(f"unknown initial kind: {kind!r}")


def validate_scenario(raw) -> Scenario:
    """Validate a config mapping (or JSON text); report every violation."""
    if isinstance(raw, str):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ScenarioValidationError([f"malformed JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ScenarioValidationError(["scenario must be a JSON object"])
    errors: list[str] = []
    known = {
        "name", "initial", "velocity", "kernel", "epsilons", "grid", "t_end",
        "window", "extension", "cfl", "record_every", "diagnostics", "seed",
        "error_norm", "tail_tol",
    }
    for key in raw:
        if key not in known:
            errors.append(f"unknown field: {key}")

    name = raw.get("name")
    if not isinstance(name, str) or not name:
        errors.append("name must be a nonempty string")
        name = "unnamed"

    grid_raw = raw.get("grid")
    grid_tuple = None
    dx = None
    if not isinstance(grid_raw, dict):
        errors.append("grid must be a mapping with x_min, x_max, n_cells")
    else:
        x_min = _num(grid_raw, "x_min", errors)
        x_max = _num(grid_raw, "x_max", errors)
        n_cells = _num(grid_raw, "n_cells", errors, integer=True, lo=2)
        if None not in (x_min, x_max, n_cells):
            if x_max <= x_min:
                errors.append("grid needs x_min < x_max")
            else:
                grid_tuple = (float(x_min), float(x_max), int(n_cells))
                dx = (x_max - x_min) / n_cells

    eps_raw = raw.get("epsilons")
    epsilons = None
    if not isinstance(eps_raw, list) or not eps_raw:
        errors.append("epsilons must be a nonempty list")
    elif not all(isinstance(e, (int, float)) and e > 0 for e in eps_raw):
        errors.append("epsilons must be positive numbers")
    else:
        if any(b >= a for a, b in zip(eps_raw, eps_raw[1:])):
            errors.append("epsilons must be strictly decreasing")
        if dx is not None:
            bad = [e for e in eps_raw if e < 4.0 * dx]
            if bad:
                errors.append(f"epsilons must be at least 4*dx = {4.0 * dx}; too small: {bad}")
        epsilons = tuple(float(e) for e in eps_raw)

    t_end = _num(raw, "t_end", errors, lo=0.0)
    cfl = _num(raw, "cfl", errors, default=0.5)
    if cfl is not None and not 0.0 < cfl <= 1.0:
        errors.append("cfl must lie in (0, 1]")
    record_every = _num(raw, "record_every", errors, default=1, integer=True, lo=1)
    seed = _num(raw, "seed", errors, default=0, integer=True)
    tail_tol = _num(raw, "tail_tol", errors, default=1e-12)
    if tail_tol is not None and not 0.0 < tail_tol <= 1e-8:
        errors.append("tail_tol must lie in (0, 1e-8]")

    extension = raw.get("extension", "zero")
    try:
        Extension(extension)
    except ValueError:
        errors.append(f"unknown extension policy: {extension!r}")

    error_norm = raw.get("error_norm", "final")
    if error_norm not in ("final", "spacetime"):
        errors.append("error_norm must be 'final' or 'spacetime'")

    window = raw.get("window")
    window_tuple = None
    if window is None:
        if grid_tuple is not None:
            window_tuple = (grid_tuple[0], grid_tuple[1])
    elif not (isinstance(window, list) and len(window) == 2 and all(isinstance(v, (int, float)) for v in window)):
        errors.append("window must be a [a, b] pair")
    else:
        a, b = float(window[0]), float(window[1])
        if a >= b:
            errors.append("window needs a < b")
        elif grid_tuple is not None and (a < grid_tuple[0] - 1e-12 or b > grid_tuple[1] + 1e-12):
            errors.append("window must be contained in the grid domain")
        else:
            window_tuple = (a, b)

    initial = raw.get("initial")
    if initial is None:
        errors.append("missing field: initial")
    else:
        _validate_initial(initial, errors)

    velocity = raw.get("velocity")
    vel_kind = None
    if not isinstance(velocity, dict) or "kind" not in velocity:
        errors.append("velocity must be a mapping with a 'kind'")
    else:
        vel_kind = velocity["kind"]
        if vel_kind not in ("greenshields", "tabulated"):
            errors.append(f"unknown velocity kind: {vel_kind!r}")
        elif vel_kind == "tabulated" and "path" not in velocity and "points" not in velocity:
            errors.append("tabulated velocity needs a path or points")

    kernel = raw.get("kernel")
    kernel_kind = None
    if not isinstance(kernel, dict) or "kind" not in kernel:
        errors.append("kernel must be a mapping with a 'kind'")
    else:
        kernel_kind = kernel["kind"]
        if kernel_kind not in ("piecewise_constant", "exponential", "linear", "tabulated"):
            errors.append(f"unknown kernel kind: {kernel_kind!r}")
        elif kernel_kind == "tabulated" and "path" not in kernel and "points" not in kernel:
            errors.append("tabulated kernel needs a path or points")

    diagnostics = raw.get("diagnostics", [])
    if not isinstance(diagnostics, list) or not all(isinstance(d, str) for d in diagnostics):
        errors.append("diagnostics must be a list of names")
        diagnostics = []
    else:
        unknown = sorted(set(diagnostics) - KNOWN_DIAGNOSTICS)
        if unknown:
            errors.append(f"unknown diagnostics: {unknown}")
        for d in sorted(set(diagnostics) & _CONSTANT_KERNEL_ONLY):
            if kernel_kind is not None and kernel_kind != "piecewise_constant":
                errors.append(f"diagnostic {d!r} needs the piecewise_constant kernel")
        for d in sorted(set(diagnostics) & _EXPONENTIAL_KERNEL_ONLY):
            if kernel_kind is not None and kernel_kind != "exponential":
                errors.append(f"diagnostic {d!r} needs the exponential kernel")
        if "energy_identity" in diagnostics and vel_kind is not None and vel_kind != "greenshields":
            errors.append("diagnostic 'energy_identity' needs the Greenshields velocity")

    if errors:
        raise ScenarioValidationError(errors)

    return Scenario(
        name=name,
        initial=dict(initial),
        velocity=dict(velocity),
        kernel=dict(kernel),
        epsilons=epsilons,
        grid=grid_tuple,
        t_end=float(t_end),
        window=window_tuple,
        extension=str(extension),
        cfl=float(cfl),
        record_every=int(record_every),
        diagnostics=tuple(diagnostics),
        seed=int(seed),
        error_norm=str(error_norm),
        tail_tol=float(tail_tol),
    )


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_scenario(fh.read())


def build_velocity(spec: dict) -> Velocity:
    if spec["kind"] == "greenshields":
        return greenshields()
    if "path" in spec:
        return load_tabulated_velocity(spec["path"])
    pts = np.asarray(spec["points"], dtype=np.float64)
    return tabulated_velocity(pts[:, 0], pts[:, 1])


def build_kernel(spec: dict) -> Kernel:
    return kernel_from_spec(spec)


def _pl_antiderivative(xs: np.ndarray, ys: np.ndarray):
    """Antiderivative of the piecewise-linear interpolant (edge-extended)."""
    seg = 0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)
    cum = np.concatenate([[0.0], np.cumsum(seg)])

    def anti(x):
        x = np.asarray(x, dtype=np.float64)
        xc = np.clip(x, xs[0], xs[-1])
        idx = np.clip(np.searchsorted(xs, xc, side="right") - 1, 0, len(xs) - 2)
        x0 = xs[idx]
        y0 = ys[idx]
        s = (ys[idx + 1] - y0) / (xs[idx + 1] - x0)
        d = xc - x0
        inner = cum[idx] + y0 * d + 0.5 * s * d * d
        # constant extension outside the table
        return inner + ys[0] * np.minimum(x - xs[0], 0.0) + ys[-1] * np.maximum(x - xs[-1], 0.0)

    return anti


def build_initial(scenario: Scenario, grid: Grid) -> GridFunction:
    """Exact cell averages of the scenario's initial datum."""
    spec = scenario.initial
    kind = spec["kind"]
    edges = grid.edges

    if kind == "riemann":
        ul, ur, xj = float(spec["u_left"]), float(spec["u_right"]), float(spec.get("x_jump", 0.0))
        anti = ul * np.minimum(edges, xj) + ur * np.maximum(edges - xj, 0.0)
    elif kind == "box":
        h, a, b = float(spec["height"]), float(spec["a"]), float(spec["b"])
        anti = h * (np.clip(edges, a, b) - a)
    elif kind == "bump":
        h, c, w = float(spec["height"]), float(spec["center"]), float(spec["width"])
        s = np.clip(edges - c, -w, w)
        anti = h * (0.5 * s + (w / (2.0 * math.pi)) * np.sin(math.pi * s / w) + 0.5 * w)
    elif kind == "sine":
        mean, amp = float(spec["mean"]), float(spec["amplitude"])
        periods = int(spec.get("periods", 1))
        k = 2.0 * math.pi * periods / grid.length
        anti = mean * edges - (amp / k) * np.cos(k * (edges - grid.x_min))
    elif kind == "table":
        if "path" in spec:
            data = np.loadtxt(spec["path"], dtype=np.float64, ndmin=2)
        else:
            data = np.asarray(spec["points"], dtype=np.float64)
        if data.shape[1] != 2 or data.shape[0] < 2:
            raise ValueError("table initial needs two columns with at least two rows")
        xs, ys = data[:, 0], data[:, 1]
        if not np.all(np.diff(xs) > 0):
            raise ValueError("table initial breakpoints must be strictly increasing")
        if np.any(ys < -1e-12) or np.any(ys > 1.0 + 1e-12):
            raise ValueError("initial datum outside the admissible range [0, 1]")
        anti = _pl_antiderivative(xs, np.clip(ys, 0.0, 1.0))(edges)
    else:
        raise ValueError(f"unknown initial kind: {kind!r}")

    vals = np.diff(anti) / grid.dx
    vals = np.clip(vals, 0.0, 1.0)  # exact averages of [0,1] data stay inside; guards rounding
    return GridFunction(grid, vals, Extension(scenario.extension))


def bundled_scenario_names() -> list[str]:
    root = resources.files(__package__) / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def bundled_scenario_path(name: str):
    if not name.endswith(".json"):
        name = name + ".json"
    return resources.files(__package__) / "scenarios" / name
