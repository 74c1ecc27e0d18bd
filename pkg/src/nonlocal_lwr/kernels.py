"""Anisotropic look-ahead kernels and their exact discrete convolution.

A kernel is a probability density gamma supported on the negative half-line
and non-decreasing there: drivers react only to traffic ahead of them and
weight nearby positions most.  The rescaled density gamma_h(z) = gamma(z/h)/h
concentrates at the origin as the horizon h shrinks.

Discrete convolution weights are exact integrals of the rescaled density
over cell-width offset windows, anchored at the upstream cell edge:

    weight[k] = integral of gamma_h over offsets [k*dx, (k+1)*dx] downstream,

so (conv u)[j] = sum_k weight[k] * u[j+k] is the exact convolution of the
piecewise-constant representative of u, evaluated at the left edge of cell j.
Weights therefore inherit unit mass, nonnegativity and monotone decay from
the kernel, which is what the discrete maximum principle rests on.

The uniform and exponential kernels additionally provide O(n) evaluation
paths (sliding window and first-order recursion); both are required to agree
with the direct summation to 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .grid import GridFunction, GridMismatchError, padded_values

__all__ = [
    "ExponentialKernel",
    "Kernel",
    "KernelSupportError",
    "LinearKernel",
    "PiecewiseConstantKernel",
    "ScaledKernelWeights",
    "TabulatedKernel",
    "build_weights",
    "convolve",
    "convergence_regime",
    "convolve_direct",
    "convolve_edges",
    "kernel_from_spec",
    "kernel_growth_ratio",
    "load_tabulated_kernel",
    "slack_mass",
]

MASS_TOL = 1e-12


class KernelSupportError(ValueError):
    """Raised when truncating a kernel would need too many cells."""


class Kernel:
    """Base interface: a unit-mass, non-decreasing density on ]-inf, 0]."""

    name: str = "kernel"
    support: float = math.inf  # gamma vanishes below -support
    is_convex: bool = False
    is_strictly_monotone: bool = False  # gamma' > 0 a.e. on the support

    def density(self, z):
        """gamma(z); at z = 0 the left-limit value."""
        raise NotImplementedError

    def mass_above(self, a):
        """Exact integral of gamma over [a, 0] (vectorized in a <= 0)."""
        raise NotImplementedError

    def growth_ratio(self) -> float | None:
        """Largest D >= 0 with gamma' >= D * gamma a.e., None if not positive."""
        raise NotImplementedError

    def window_masses(self, edges: np.ndarray) -> np.ndarray:
        """Masses of the windows [edges[k+1], edges[k]] (edges decreasing).

        Default: differences of the cumulative mass; overridden where the
        cumulative form would cancel catastrophically in the tail.
        """
        cum = np.asarray(self.mass_above(edges), dtype=np.float64)
        return np.maximum(cum[1:] - cum[:-1], 0.0)

    def slack_mass(self, slope_floor: float, cutoff: float) -> float:
        """Kernel mass where the slope condition fails or beyond the cutoff.

        Integral of gamma over {z <= -cutoff or gamma'(z) < slope_floor};
        the anti-concentration quantity that must vanish for the strictly
        monotone convergence mechanism.
        """
        raise NotImplementedError


class PiecewiseConstantKernel(Kernel):
    """gamma = 1 on [-1, 0]: uniform look-ahead over one horizon."""

    name = "piecewise_constant"
    support = 1.0
    is_convex = False  # jumps up at -1, so not convex on the half-line

    def density(self, z):
        z = np.asarray(z, dtype=np.float64)
        return np.where((z >= -1.0) & (z <= 0.0), 1.0, 0.0)

    def mass_above(self, a):
        a = np.asarray(a, dtype=np.float64)
        return np.clip(-a, 0.0, 1.0)

    def growth_ratio(self) -> float | None:
        return None  # gamma' vanishes in the interior

    def slack_mass(self, slope_floor: float, cutoff: float) -> float:
        # gamma' = 0 a.e., so the slope condition fails everywhere.
        return 1.0


class ExponentialKernel(Kernel):
    """gamma(z) = exp(z) on ]-inf, 0]."""

    name = "exponential"
    support = math.inf
    is_convex = True
    is_strictly_monotone = True

    def density(self, z):
        z = np.asarray(z, dtype=np.float64)
        return np.where(z <= 0.0, np.exp(np.minimum(z, 0.0)), 0.0)

    def mass_above(self, a):
        a = np.asarray(a, dtype=np.float64)
        return 1.0 - np.exp(np.minimum(a, 0.0))

    def growth_ratio(self) -> float | None:
        return 1.0  # gamma' = gamma exactly

    def window_masses(self, edges: np.ndarray) -> np.ndarray:
        # e^hi - e^lo as e^hi * (1 - e^(lo-hi)): no cancellation in the tail
        hi = np.minimum(edges[:-1], 0.0)
        lo = np.minimum(edges[1:], 0.0)
        return np.exp(hi) * (-np.expm1(lo - hi))

    def slack_mass(self, slope_floor: float, cutoff: float) -> float:
        # gamma'(z) = e^z < slope_floor iff z < log(slope_floor).
        if slope_floor >= 1.0:
            return 1.0
        edge = max(-cutoff, math.log(slope_floor))
        return math.exp(min(edge, 0.0))


class LinearKernel(Kernel):
    """gamma(z) = 2(1+z) on [-1, 0]: linearly decaying look-ahead."""

    name = "linear"
    support = 1.0
    is_convex = True
    is_strictly_monotone = True

    def density(self, z):
        z = np.asarray(z, dtype=np.float64)
        return np.where((z >= -1.0) & (z <= 0.0), 2.0 * (1.0 + z), 0.0)

    def mass_above(self, a):
        a = np.clip(np.asarray(a, dtype=np.float64), -1.0, 0.0)
        return 1.0 - (1.0 + a) ** 2

    def growth_ratio(self) -> float | None:
        # gamma'/gamma = 1/(1+z) >= 1 on ]-1, 0[, infimum 1 at z -> 0-.
        return 1.0

    def slack_mass(self, slope_floor: float, cutoff: float) -> float:
        if slope_floor > 2.0:
            return 1.0
        if cutoff >= 1.0:
            return 0.0
        return float((1.0 - cutoff) ** 2)  # mass of [-1, -cutoff]


class TabulatedKernel(Kernel):
    """Piecewise-linear density from (breakpoint, value) samples on [-L, 0].

    Values are validated nonnegative and non-decreasing, then normalized to
    unit mass at construction.
    """

    name = "tabulated"

    def __init__(self, breakpoints, values) -> None:
        z = np.asarray(breakpoints, dtype=np.float64)
        v = np.asarray(values, dtype=np.float64)
        errors = []
        if z.ndim != 1 or z.shape != v.shape or z.size < 2:
            raise ValueError("kernel table needs matching 1D breakpoints and values, length >= 2")
        if not np.all(np.diff(z) > 0):
            errors.append("kernel breakpoints must be strictly increasing")
        if abs(z[-1]) > 1e-12:
            errors.append("kernel support must end at 0")
        if np.any(z < -1e12):
            errors.append("kernel support must be finite")
        if np.any(v < -1e-12):
            errors.append("kernel values must be nonnegative")
        if np.any(np.diff(v) < -1e-12):
            errors.append("kernel values must be non-decreasing toward 0")
        if errors:
            raise ValueError("; ".join(errors))
        v = np.maximum(v, 0.0)
        raw_mass = float(np.trapezoid(v, z))
        if raw_mass <= 0.0:
            raise ValueError("kernel table must carry positive mass")
        self._z = z
        self._v = v / raw_mass
        self.support = float(-z[0])
        # cumulative mass from the right at each breakpoint
        seg = 0.5 * (self._v[1:] + self._v[:-1]) * np.diff(z)
        tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        self._tail = tail  # mass_above(z[i]) == tail[i]
        slopes = np.diff(self._v) / np.diff(z)
        self._slopes = slopes
        self.is_convex = bool(self._v[0] <= 1e-12 and np.all(np.diff(slopes) >= -1e-12))
        self.is_strictly_monotone = bool(np.all(slopes > 1e-14))

    def density(self, z):
        z = np.asarray(z, dtype=np.float64)
        out = np.interp(z, self._z, self._v, left=0.0, right=0.0)
        return np.where(z > 0.0, 0.0, out)

    def mass_above(self, a):
        a = np.clip(np.asarray(a, dtype=np.float64), self._z[0], 0.0)
        idx = np.clip(np.searchsorted(self._z, a, side="right") - 1, 0, len(self._z) - 2)
        z0 = self._z[idx]
        v0 = self._v[idx]
        s = self._slopes[idx]
        # subtract the partial trapezoid [z0, a] from the tail at z0
        da = a - z0
        partial = v0 * da + 0.5 * s * da * da
        return self._tail[idx] - partial

    def growth_ratio(self) -> float | None:
        # On each linear piece the ratio gamma'/gamma is minimized at the
        # right endpoint (gamma non-decreasing).
        ratios = []
        for i, s in enumerate(self._slopes):
            v_right = self._v[i + 1]
            if s <= 1e-14:
                return None
            if v_right > 0.0:
                ratios.append(s / v_right)
        return float(min(ratios)) if ratios else None

    def slack_mass(self, slope_floor: float, cutoff: float) -> float:
        total = 0.0
        for i, s in enumerate(self._slopes):
            z0, z1 = self._z[i], self._z[i + 1]
            if s < slope_floor:
                lo, hi = z0, z1  # whole piece fails the slope condition
            else:
                hi = min(z1, -cutoff)
                lo = z0
                if hi <= lo:
                    continue
            total += float(self.mass_above(lo) - self.mass_above(hi))
        return total


def kernel_from_spec(spec: dict) -> Kernel:
    """Build a kernel from a config mapping {'kind': ..., ...}."""
    kind = spec.get("kind")
    if kind == "piecewise_constant":
        return PiecewiseConstantKernel()
    if kind == "exponential":
        return ExponentialKernel()
    if kind == "linear":
        return LinearKernel()
    if kind == "tabulated":
        if "path" in spec:
            return load_tabulated_kernel(spec["path"])
        pts = np.asarray(spec["points"], dtype=np.float64)
        return TabulatedKernel(pts[:, 0], pts[:, 1])
    raise ValueError(f"unknown kernel kind: {kind!r}")


def load_tabulated_kernel(path) -> TabulatedKernel:
    """Load a two-column text file (breakpoint, value)."""
    data = np.loadtxt(path, dtype=np.float64, ndmin=2)
    if data.shape[1] != 2:
        raise ValueError("kernel file must have two columns: breakpoint, value")
    return TabulatedKernel(data[:, 0], data[:, 1])


@dataclass(frozen=True)
class ScaledKernelWeights:
    """Exact cell-window integrals of the rescaled kernel.

    weights[k] covers downstream offsets [k*dx, (k+1)*dx]; for kernels with
    unbounded support the dropped mass is tracked in truncation_tail, never
    silently renormalized.
    """

    kernel: Kernel
    horizon: float
    dx: float
    weights: np.ndarray
    truncation_tail: float

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        total = float(np.sum(w)) + self.truncation_tail
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError("kernel weights plus tail must have unit mass")
        if np.any(w < 0.0):
            raise ValueError("kernel weights must be nonnegative")
        if np.any(np.diff(w) > 1e-14):
            raise ValueError("kernel weights must not increase away from the origin")

    @property
    def n_weights(self) -> int:
        return int(self.weights.shape[0])

    def derivative_weights(self) -> np.ndarray:
        """Exact cell-window integrals of the distributional derivative.

        The derivative of a non-decreasing density over an offset window is
        the difference of its endpoint values, so interior jumps (the
        uniform kernel's far-edge Dirac) are captured exactly.  One window
        beyond the mass weights is included: a Dirac sitting exactly on the
        truncation edge belongs to it.  The Dirac at offset 0 is omitted:
        every consumer pairs it with a factor that vanishes on the diagonal.
        """
        k = np.arange(self.n_weights + 2, dtype=np.float64)
        g = self.kernel.density(-(k * self.dx) / self.horizon) / self.horizon
        d = g[:-1] - g[1:]
        return np.maximum(d, 0.0)


def build_weights(
    kernel: Kernel,
    horizon: float,
    dx: float,
    tail_tol: float = 1e-12,
    max_support_cells: int = 4_000_000,
) -> ScaledKernelWeights:
    """Integrate the rescaled kernel over cell-width offset windows.

    Closed form for the analytic kernels, exact piecewise-linear integration
    for tabulated ones; unbounded supports are truncated once the remaining
    mass drops below tail_tol.
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    if dx <= 0.0:
        raise ValueError("dx must be positive")
    if not 0.0 < tail_tol <= 1e-8:
        raise ValueError("tail_tol must lie in (0, 1e-8]")

    if math.isfinite(kernel.support):
        n_w = max(1, math.ceil(kernel.support * horizon / dx - 1e-12))
    else:
        # smallest K with mass_above(-K dx / horizon) >= 1 - tail_tol
        n_w = max(1, math.ceil(horizon * math.log(1.0 / tail_tol) / dx))
    if n_w > max_support_cells:
        raise KernelSupportError("kernel support too wide for grid")

    edges = -np.arange(n_w + 1, dtype=np.float64) * (dx / horizon)
    w = kernel.window_masses(edges)
    if math.isfinite(kernel.support):
        tail = 0.0
    else:
        tail = float(np.exp(edges[-1])) if isinstance(kernel, ExponentialKernel) else float(
            max(0.0, 1.0 - float(kernel.mass_above(edges[-1])))
        )
    return ScaledKernelWeights(kernel, horizon, dx, w, tail)


def kernel_growth_ratio(kernel: Kernel) -> float | None:
    return kernel.growth_ratio()


def convergence_regime(kernel: Kernel, velocity_name: str) -> str:
    """Which vanishing-horizon convergence mechanism covers this model.

    The uniform kernel is covered only together with the affine speed law;
    strictly monotone kernels are covered for any admissible speed law;
    anything else runs fine but carries no convergence theorem.
    """
    if isinstance(kernel, PiecewiseConstantKernel):
        if velocity_name == "greenshields":
            return "covered: uniform kernel with the affine speed law"
        return "no convergence theorem applies (uniform kernel needs the affine speed law)"
    if kernel.is_strictly_monotone:
        return "covered: strictly monotone kernel"
    return "no convergence theorem applies (kernel is not strictly monotone)"


def slack_mass(kernel: Kernel, slope_floor: float, cutoff: float) -> float:
    if slope_floor <= 0.0 or cutoff <= 0.0:
        raise ValueError("slope_floor and cutoff must be positive")
    return kernel.slack_mass(slope_floor, cutoff)


def _uniform_window(ext: np.ndarray, n_out: int, weights: np.ndarray) -> np.ndarray:
    """Sliding-window sums for a flat weight prefix plus one partial cell."""
    n_w = weights.shape[0]
    c = float(weights[0])
    full = n_w if abs(float(weights[-1]) - c) <= 1e-15 * max(c, 1.0) else n_w - 1
    cum = np.concatenate(([0.0], np.cumsum(ext)))
    out = c * (cum[full : full + n_out] - cum[:n_out])
    if full < n_w:
        out = out + float(weights[-1]) * ext[full : full + n_out]
    return out


def _exp_recursion(ext: np.ndarray, n_out: int, n_w: int, rho: float) -> np.ndarray:
    """First-order recursion for geometric weights, truncated after n_w cells.

    T[i] = c*ext[i] + r*T[i+1] accumulates the full suffix; subtracting
    r^n_w * T[i + n_w] removes everything past the truncation point.
    """
    r = math.exp(-rho)
    c = 1.0 - r
    t = lfilter([c], [1.0, -r], ext[::-1])[::-1]
    return t[:n_out] - (r**n_w) * t[n_w : n_w + n_out]


def _convolved_values(f: GridFunction, w: ScaledKernelWeights, n_out: int) -> np.ndarray:
    n = f.grid.n_cells
    n_w = w.n_weights
    if isinstance(w.kernel, ExponentialKernel):
        ext = padded_values(f, 0, n_out - n + n_w)
        return _exp_recursion(ext, n_out, n_w, w.dx / w.horizon)
    ext = padded_values(f, 0, n_out - n + n_w - 1)
    if isinstance(w.kernel, PiecewiseConstantKernel):
        return _uniform_window(ext, n_out, w.weights)
    return np.correlate(ext, w.weights, mode="valid")[:n_out]


def _check_dx(f: GridFunction, w: ScaledKernelWeights) -> None:
    if abs(f.grid.dx - w.dx) > 1e-12 * w.dx:
        raise GridMismatchError("kernel weights built for a different cell size")


def convolve(f: GridFunction, w: ScaledKernelWeights) -> GridFunction:
    """Downstream convolution (conv f)[j] = sum_k weights[k] * f[j+k]."""
    _check_dx(f, w)
    return f.with_values(_convolved_values(f, w, f.grid.n_cells))


def convolve_edges(f: GridFunction, w: ScaledKernelWeights) -> np.ndarray:
    """Convolution at all n_cells + 1 cell edges (index i sits at x_min + i*dx)."""
    _check_dx(f, w)
    return _convolved_values(f, w, f.grid.n_cells + 1)


def convolve_direct(f: GridFunction, w: ScaledKernelWeights) -> GridFunction:
    """Reference O(n * n_weights) summation, for cross-checking fast paths."""
    _check_dx(f, w)
    n = f.grid.n_cells
    ext = padded_values(f, 0, w.n_weights - 1)
    return f.with_values(np.correlate(ext, w.weights, mode="valid")[:n])
