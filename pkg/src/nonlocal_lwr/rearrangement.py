"""Brute-force verifiers for the rearrangement inequalities the estimates rest on.

Discrete Hardy-Littlewood pairing, the shifted-monotone positivity it
implies, and bang-bang extremizers of linear functionals under box and mass
constraints (the bathtub principle).  These are independent of the solver
stack on purpose: they check the inequalities by direct summation and
enumeration, nothing else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

__all__ = [
    "DiscreteProfile",
    "OracleViolation",
    "bathtub_extremes",
    "quadratic_cap_map",
    "rearrangement_pairing",
    "shifted_monotone_positivity",
    "symmetric_decreasing",
]

TOL = 1e-12


class OracleViolation(AssertionError):
    """An inequality that should hold unconditionally failed."""


@dataclass(frozen=True)
class DiscreteProfile:
    """A nonnegative sequence, read as unit-width cells that vanish outside."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("profile must be one-dimensional")
        if np.any(v < 0.0):
            raise ValueError("profile values must be nonnegative")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.values.shape[0])


def symmetric_decreasing(values: np.ndarray) -> np.ndarray:
    """Sort descending and place center-out, alternating right then left."""
    v = np.sort(np.asarray(values, dtype=np.float64))[::-1]
    n = v.shape[0]
    out = np.empty(n)
    center = (n - 1) // 2
    pos = center
    step = 1
    for i in range(n):
        out[pos] = v[i]
        pos = center + step if i % 2 == 0 else center - step
        if i % 2 == 1:
            step += 1
    return out


def rearrangement_pairing(f: DiscreteProfile, g: DiscreteProfile) -> tuple[float, float]:
    """(sum f*g, sum f#*g#) with # the symmetric-decreasing rearrangement.

    The rearranged pairing dominates: raises OracleViolation otherwise.
    Profiles of different lengths are zero-padded to match.
    """
    n = max(len(f), len(g))
    fv = np.pad(f.values, (0, n - len(f)))
    gv = np.pad(g.values, (0, n - len(g)))
    lhs = float(np.dot(fv, gv))
    rhs = float(np.dot(symmetric_decreasing(fv), symmetric_decreasing(gv)))
    if lhs > rhs + TOL:
        raise OracleViolation(f"pairing {lhs} exceeds rearranged pairing {rhs}")
    return lhs, rhs


def _check_increasing(fn, sample: np.ndarray) -> None:
    s = np.unique(sample)
    if s.size < 2:
        return
    vals = np.asarray([float(fn(x)) for x in s])
    if np.any(np.diff(vals) <= 0.0):
        raise ValueError("map must be strictly increasing on the profile range")


def shifted_monotone_positivity(h: DiscreteProfile, fn, shift: int) -> float:
    """sum_i F(h_i) * (h_i - h_{i+shift}) over the zero-padded line.

    The window covers every index where either factor is nonzero, so the
    translation-invariant part of F cancels and positivity follows from the
    rearrangement inequality; raises OracleViolation if it fails anyway.
    """
    if shift < 1:
        raise ValueError("shift must be a positive integer")
    _check_increasing(fn, h.values)
    a = shift
    w = np.concatenate([np.zeros(a), h.values, np.zeros(2 * a)])
    fw = np.asarray(fn(w), dtype=np.float64)
    total = float(np.sum(fw[:-a] * (w[:-a] - w[a:])))
    if total < -TOL:
        raise OracleViolation(f"shifted-monotone sum {total} is negative")
    return total


def quadratic_cap_map(delta: float):
    """F(x) = x^2/delta - max(x, delta) + delta: nonnegative, strictly increasing."""
    if delta <= 0.0:
        raise ValueError("delta must be positive")

    def fn(x):
        x = np.asarray(x, dtype=np.float64)
        return x * x / delta - np.maximum(x, delta) + delta

    return fn


def bathtub_extremes(psi, length: float, cap: float, total: float) -> tuple[float, float]:
    """Extremes of integral(psi * h) over 0 <= h <= cap with fixed mass.

    For non-decreasing psi on [0, length] the minimizer piles the mass at the
    left (h = cap on [0, total/cap]) and the maximizer at the right.
    """
    if length <= 0.0 or cap <= 0.0:
        raise ValueError("length and cap must be positive")
    if not 0.0 <= total <= cap * length + TOL:
        raise ValueError("infeasible mass for the given cap and length")
    xs = np.linspace(0.0, length, 257)
    vals = np.asarray([float(psi(x)) for x in xs])
    if np.any(np.diff(vals) < -1e-10):
        raise ValueError("psi must be non-decreasing")
    width = min(total / cap, length)
    lo = cap * quad(psi, 0.0, width, limit=200)[0]
    hi = cap * quad(psi, length - width, length, limit=200)[0]
    return float(lo), float(hi)
