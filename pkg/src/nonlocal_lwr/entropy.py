"""Entropy pairs and the dissipation calculus built on a speed law.

For an entropy eta (C2 on [0, 1]) and flux f(u) = u*V(u), the package works
with four derived objects, all normalized to vanish at 0:

* the entropy flux q, with q' = eta' * f';
* the dissipation potential I, with I' = eta'' * V, whose increments give
  the relative dissipation
      rd(a, b) = integral_a^b eta''(z) (V(z) - V(b)) dz
  (nonnegative for convex eta, the quantity every dissipation functional
  integrates);
* the conjugate P(u) = u*eta'(u) - eta(u) and its flux Q with Q' = P * V',
  which drive the relaxation-form entropy balance of the exponential-kernel
  model.

Antiderivatives are precomputed on panel-wise Chebyshev tables (tolerance
well under 1e-10) because they are evaluated per cell per step.
"""

from __future__ import annotations

import numpy as np

from .flux import Flux, Velocity
from .quadrature import ChebyshevAntiderivative

__all__ = [
    "EntropyPair",
    "exponential_entropy",
    "flux_weighted_entropy",
    "quadratic_entropy",
    "quartic_entropy",
]

_SAMPLES = 4097
_DRIFT = 1e-12


def _clip_states(x):
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < -_DRIFT) or np.any(arr > 1.0 + _DRIFT):
        raise ValueError("state out of range")
    return np.clip(arr, 0.0, 1.0)


class EntropyPair:
    """An entropy with its derived fluxes under a given speed law."""

    def __init__(self, velocity: Velocity, eta, eta_prime, eta_second, name: str = "entropy") -> None:
        self.velocity = velocity
        self.flux = Flux(velocity)
        self.name = name
        self._eta = eta
        self._eta_prime = eta_prime
        self._eta_second = eta_second
        kinks = velocity.kinks
        self.entropy_flux = ChebyshevAntiderivative(
            lambda z: np.asarray(eta_prime(z), dtype=np.float64) * self.flux.speed(z),
            kinks=kinks,
        )
        self.dissipation_potential = ChebyshevAntiderivative(
            lambda z: np.asarray(eta_second(z), dtype=np.float64) * velocity(z),
            kinks=kinks,
        )
        self.conjugate_flux = ChebyshevAntiderivative(
            lambda z: self.conjugate(z) * velocity.slope(z),
            kinks=kinks,
        )
        xs = np.linspace(0.0, 1.0, _SAMPLES)
        second = np.asarray(eta_second(xs), dtype=np.float64)
        self.curvature_sup = float(np.max(np.abs(second)))
        self.convex = bool(np.all(second >= -1e-12))

    def eta(self, xi):
        return np.asarray(self._eta(np.asarray(xi, dtype=np.float64)), dtype=np.float64)

    def eta_prime(self, xi):
        return np.asarray(self._eta_prime(np.asarray(xi, dtype=np.float64)), dtype=np.float64)

    def eta_second(self, xi):
        return np.asarray(self._eta_second(np.asarray(xi, dtype=np.float64)), dtype=np.float64)

    def conjugate(self, xi):
        """P(u) = u*eta'(u) - eta(u)."""
        xi = np.asarray(xi, dtype=np.float64)
        return xi * self.eta_prime(xi) - self.eta(xi)

    def relative_dissipation(self, a, b):
        """integral_a^b eta''(z) (V(z) - V(b)) dz, vectorized in (a, b).

        States may drift past [0, 1] by at most 1e-12 (clamped); anything
        larger is an error since it would mean the maximum principle broke.
        """
        a = _clip_states(a)
        b = _clip_states(b)
        gap = self.dissipation_potential(b) - self.dissipation_potential(a)
        out = gap - self.velocity(b) * (self.eta_prime(b) - self.eta_prime(a))
        return out


def quadratic_entropy(velocity: Velocity) -> EntropyPair:
    return EntropyPair(
        velocity,
        eta=lambda x: 0.5 * x * x,
        eta_prime=lambda x: x,
        eta_second=lambda x: np.ones_like(np.asarray(x, dtype=np.float64)),
        name="quadratic",
    )


def quartic_entropy(velocity: Velocity) -> EntropyPair:
    return EntropyPair(
        velocity,
        eta=lambda x: x**4 / 12.0,
        eta_prime=lambda x: x**3 / 3.0,
        eta_second=lambda x: x**2,
        name="quartic",
    )


def exponential_entropy(velocity: Velocity) -> EntropyPair:
    return EntropyPair(
        velocity,
        eta=lambda x: np.exp(x) - 1.0,
        eta_prime=np.exp,
        eta_second=np.exp,
        name="exponential",
    )


def flux_weighted_entropy(velocity: Velocity, velocity_second=None) -> EntropyPair:
    """The non-convex entropy eta(u) = u*V(u) = f(u).

    Needs V''; defaults to 0, which is exact for affine laws such as
    Greenshields.
    """
    if velocity_second is None:
        if velocity.name != "greenshields":
            raise ValueError("flux-weighted entropy needs V'' (affine laws only by default)")
        velocity_second = lambda x: np.zeros_like(np.asarray(x, dtype=np.float64))
    return EntropyPair(
        velocity,
        eta=lambda x: x * velocity(x),
        eta_prime=lambda x: velocity(x) + x * velocity.slope(x),
        eta_second=lambda x: 2.0 * velocity.slope(x) + x * np.asarray(velocity_second(x), dtype=np.float64),
        name="flux_weighted",
    )
