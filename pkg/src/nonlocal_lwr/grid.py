"""Uniform 1D grids and cell-averaged functions.

Everything in this package computes on :class:`GridFunction`: cell averages
on a uniform grid together with a rule for continuing the function beyond
the domain.  All operations treat the stored values as a genuinely
piecewise-constant function of x, so shifts and convolutions can be
evaluated exactly instead of by point sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Extension",
    "Grid",
    "GridFunction",
    "GridMismatchError",
    "coarsen",
    "l1_distance_on_window",
    "l1_norm",
    "l2_norm_sq",
    "mass",
    "padded_values",
    "shift_sample",
    "total_variation",
]


class GridMismatchError(ValueError):
    """Raised when two grid functions do not live on the same grid."""


class Extension(str, Enum):
    """Continuation rule outside [x_min, x_max]."""

    ZERO = "zero"
    CLAMP = "clamp"  # left of x_min takes values[0], right of x_max takes values[-1]
    PERIODIC = "periodic"

    @property
    def pad_mode(self) -> str:
        return {"zero": "constant", "clamp": "edge", "periodic": "wrap"}[self.value]


@dataclass(frozen=True)
class Grid:
    """Uniform cell partition of [x_min, x_max] into n_cells cells."""

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must be greater than x_min")
        if self.n_cells < 2:
            raise ValueError("n_cells must be at least 2")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_cells + 1)

    def refined(self, factor: int) -> "Grid":
        if factor < 1:
            raise ValueError("refinement factor must be positive")
        return Grid(self.x_min, self.x_max, self.n_cells * factor)


@dataclass(frozen=True)
class GridFunction:
    """Cell averages on a grid, immutable after construction."""

    grid: Grid
    values: np.ndarray
    extension: Extension = Extension.ZERO

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 1 or v.shape[0] != self.grid.n_cells:
            raise ValueError("values must be a 1D array with one entry per cell")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "extension", Extension(self.extension))

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, values, self.extension)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self, other)
        return GridFunction(self.grid, self.values - other.values, self.extension)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _require_same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values, self.extension)


def _require_same_grid(f: GridFunction, g: GridFunction) -> None:
    if f.grid != g.grid:
        raise GridMismatchError("grid mismatch")


def padded_values(f: GridFunction, before: int, after: int) -> np.ndarray:
    """Values on cells [-before, n_cells + after), extended per policy."""
    if before < 0 or after < 0:
        raise ValueError("padding must be nonnegative")
    if before == 0 and after == 0:
        return f.values
    return np.pad(f.values, (before, after), mode=f.extension.pad_mode)


def mass(f: GridFunction) -> float:
    """Integral of f over the domain (no extension contribution)."""
    return float(f.grid.dx * np.sum(f.values))


def l1_norm(f: GridFunction) -> float:
    return float(f.grid.dx * np.sum(np.abs(f.values)))


def l2_norm_sq(f: GridFunction) -> float:
    return float(f.grid.dx * np.sum(f.values * f.values))


def total_variation(f: GridFunction) -> float:
    """Total variation of the extended piecewise-constant function.

    Interior jumps always count; the extension policy decides the boundary
    contribution (zero extension adds the two edge jumps, periodic adds the
    wrap-around jump, clamp adds nothing).
    """
    v = f.values
    tv = float(np.sum(np.abs(np.diff(v))))
    if f.extension is Extension.ZERO:
        tv += abs(float(v[0])) + abs(float(v[-1]))
    elif f.extension is Extension.PERIODIC:
        tv += abs(float(v[0]) - float(v[-1]))
    return tv


def l1_distance_on_window(f: GridFunction, g: GridFunction, window: tuple[float, float]) -> float:
    """dx-weighted L1 distance over cells whose centers lie in [a, b]."""
    _require_same_grid(f, g)
    a, b = window
    grid = f.grid
    tol = 1e-12 * max(1.0, abs(grid.x_min), abs(grid.x_max))
    if a > b:
        raise ValueError("window must satisfy a <= b")
    if a < grid.x_min - tol or b > grid.x_max + tol:
        raise ValueError("window must be contained in the domain")
    centers = grid.centers
    sel = (centers >= a - tol) & (centers <= b + tol)
    return float(grid.dx * np.sum(np.abs(f.values[sel] - g.values[sel])))


def shift_sample(f: GridFunction, offset: float) -> GridFunction:
    """Exact cell averages of x -> f(x + offset).

    The offset splits into a whole-cell part m and a fractional part theta;
    each shifted cell average is the convex combination
    (1 - theta) * v[j + m] + theta * v[j + m + 1] of the two cells the
    shifted window overlaps, with out-of-range cells supplied by the
    extension policy.
    """
    dx = f.grid.dx
    ratio = offset / dx
    m = math.floor(ratio)
    theta = ratio - m
    n = f.grid.n_cells
    before = max(0, -m)
    after = max(0, m + 1)
    ext = padded_values(f, before, after)
    base = before + m
    lo = ext[base : base + n]
    hi = ext[base + 1 : base + 1 + n]
    return f.with_values((1.0 - theta) * lo + theta * hi)


def coarsen(f: GridFunction, factor: int) -> GridFunction:
    """Exact cell-average restriction onto a grid coarsened by `factor`."""
    n = f.grid.n_cells
    if factor < 1 or n % factor != 0:
        raise ValueError("n_cells must be divisible by the coarsening factor")
    coarse = Grid(f.grid.x_min, f.grid.x_max, n // factor)
    vals = f.values.reshape(-1, factor).mean(axis=1)
    return GridFunction(coarse, vals, f.extension)
