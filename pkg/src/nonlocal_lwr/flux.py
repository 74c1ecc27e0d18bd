"""Speed laws V, the traffic flux f(u) = u*V(u), and exact Riemann fluxes.

A speed law is Lipschitz and non-increasing on the normalized density range
[0, 1]; the Greenshields law V = 1 - u is the canonical analytic case,
tabulated piecewise-linear laws cover measured fundamental diagrams.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .quadrature import ChebyshevAntiderivative

__all__ = [
    "Flux",
    "Velocity",
    "godunov_flux",
    "greenshields",
    "load_tabulated_velocity",
    "tabulated_velocity",
    "velocity_defect_integral",
    "velocity_gap_bounds",
]

_SAMPLES = 4097


class Velocity:
    """Non-increasing, nonnegative speed law on [0, 1]."""

    def __init__(self, value_fn, slope_fn, name: str, kinks=()) -> None:
        self._value = value_fn
        self._slope = slope_fn
        self.name = name
        self.kinks = tuple(kinks)
        xs = np.linspace(0.0, 1.0, _SAMPLES)
        vals = np.asarray(value_fn(xs), dtype=np.float64)
        slopes = np.asarray(slope_fn(xs), dtype=np.float64)
        if np.any(vals < -1e-12):
            raise ValueError("speed law must be nonnegative on [0, 1]")
        if np.any(slopes > 1e-12):
            raise ValueError("speed law must be non-increasing on [0, 1]")
        self.sup_value = float(np.max(vals))
        self.lipschitz = float(np.max(np.abs(slopes)))
        # largest v with V' <= -v everywhere; 0 when V' touches 0
        self.decay_floor = float(max(0.0, -np.max(slopes)))
        self._anti = ChebyshevAntiderivative(value_fn, 0.0, 1.0, kinks=self.kinks)

    def __call__(self, xi):
        return self._value(np.asarray(xi, dtype=np.float64))

    def slope(self, xi):
        return self._slope(np.asarray(xi, dtype=np.float64))

    def antiderivative(self, xi):
        """Integral of V from 0 to xi."""
        return self._anti(xi)


def greenshields() -> Velocity:
    return Velocity(lambda x: 1.0 - x, lambda x: np.full_like(np.asarray(x, dtype=np.float64), -1.0), "greenshields")


def tabulated_velocity(breakpoints, values, name: str = "tabulated") -> Velocity:
    """Piecewise-linear speed law through (density, speed) samples."""
    x = np.asarray(breakpoints, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.shape != v.shape or x.size < 2:
        raise ValueError("velocity table needs matching 1D breakpoints and values, length >= 2")
    if not np.all(np.diff(x) > 0):
        raise ValueError("velocity breakpoints must be strictly increasing")
    if abs(x[0]) > 1e-12 or abs(x[-1] - 1.0) > 1e-12:
        raise ValueError("velocity table must cover [0, 1]")
    if np.any(np.diff(v) > 1e-12):
        raise ValueError("velocity table must be non-increasing")
    if np.any(v < -1e-12):
        raise ValueError("velocity table must be nonnegative")
    slopes = np.diff(v) / np.diff(x)

    def value_fn(xi):
        return np.interp(np.clip(xi, 0.0, 1.0), x, v)

    def slope_fn(xi):
        xi = np.clip(np.asarray(xi, dtype=np.float64), 0.0, 1.0)
        idx = np.clip(np.searchsorted(x, xi, side="right") - 1, 0, len(slopes) - 1)
        return slopes[idx]

    return Velocity(value_fn, slope_fn, name, kinks=x[1:-1])


def load_tabulated_velocity(path, name: str = "tabulated") -> Velocity:
    data = np.loadtxt(path, dtype=np.float64, ndmin=2)
    if data.shape[1] != 2:
        raise ValueError("velocity file must have two columns: density, speed")
    return tabulated_velocity(data[:, 0], data[:, 1], name=name)


def velocity_defect_integral(velocity: Velocity, a, b):
    """Integral of V(z) - V(b) for z from a to b (vectorized, any order).

    Nonnegative for every pair because V is non-increasing; this is the
    inner dissipation integral every quadratic entropy balance produces.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return velocity.antiderivative(b) - velocity.antiderivative(a) - velocity(b) * (b - a)


def velocity_gap_bounds(velocity: Velocity, a, b):
    """Both sides of (V(a)-V(b))^2 <= 2 Lip(V) * defect_integral(a, b)."""
    lhs = (velocity(a) - velocity(b)) ** 2
    rhs = 2.0 * velocity.lipschitz * velocity_defect_integral(velocity, a, b)
    return lhs, rhs


@dataclass
class Flux:
    """Traffic flux f(u) = u * V(u) with its critical points on [0, 1]."""

    velocity: Velocity
    genuinely_nonlinear: bool = True
    critical_points: tuple = field(init=False)
    max_char_speed: float = field(init=False)

    def __post_init__(self) -> None:
        xs = np.linspace(0.0, 1.0, _SAMPLES)
        sp = np.asarray(self.speed(xs), dtype=np.float64)
        self.max_char_speed = float(np.max(np.abs(sp)))
        crits = []
        sign = np.sign(sp)
        for i in np.nonzero(np.diff(sign) != 0)[0]:
            a, b = xs[i], xs[i + 1]
            if sp[i] == 0.0:
                c = float(a)
            else:
                try:
                    c = float(brentq(lambda x: float(self.speed(x)), a, b))
                except ValueError:
                    c = float(0.5 * (a + b))
            if not crits or c - crits[-1] > 1e-9:
                crits.append(c)
        self.critical_points = tuple(crits)

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        return xi * self.velocity(xi)

    def speed(self, xi):
        """Characteristic speed f'(u) = V(u) + u V'(u)."""
        xi = np.asarray(xi, dtype=np.float64)
        return self.velocity(xi) + xi * self.velocity.slope(xi)


def godunov_flux(flux: Flux, a, b):
    """Exact Riemann flux: min of f over [a, b] if a <= b, else max over [b, a].

    Extrema are taken over the endpoints and the interior critical points of
    f that fall inside the interval.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    fa = flux(a)
    fb = flux(b)
    vmin = np.minimum(fa, fb)
    vmax = np.maximum(fa, fb)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    for c in flux.critical_points:
        inside = (lo <= c) & (c <= hi)
        if np.any(inside):
            fc = float(flux(c))
            vmin = np.where(inside, np.minimum(vmin, fc), vmin)
            vmax = np.where(inside, np.maximum(vmax, fc), vmax)
    out = np.where(a <= b, vmin, vmax)
    return float(out) if out.ndim == 0 else out
