"""Panel-wise Chebyshev antiderivatives for smooth-by-parts integrands.

Entropy fluxes and dissipation potentials are antiderivatives evaluated per
cell per step, so they are precomputed once on Chebyshev interpolants (one
panel between consecutive kinks of the integrand) and evaluated by table
lookup.  For integrands that are analytic on each panel the table error is
far below the 1e-10 budget.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.chebyshev import Chebyshev

__all__ = ["ChebyshevAntiderivative"]


class ChebyshevAntiderivative:
    """F(x) = integral of fn from `lower` to x, on [lower, upper]."""

    def __init__(self, fn, lower: float = 0.0, upper: float = 1.0, kinks=(), degree: int = 48):
        pts = [lower, *sorted(p for p in kinks if lower < p < upper), upper]
        self._breaks = np.asarray(pts, dtype=np.float64)
        self._pieces = []
        self._anti = []
        offsets = [0.0]
        for a, b in zip(pts[:-1], pts[1:]):
            poly = Chebyshev.interpolate(lambda x: np.asarray(fn(x), dtype=np.float64), degree, domain=[a, b])
            anti = poly.integ(lbnd=a)
            self._pieces.append(poly)
            self._anti.append(anti)
            offsets.append(offsets[-1] + float(anti(b)))
        self._offsets = np.asarray(offsets[:-1], dtype=np.float64)
        self.lower = lower
        self.upper = upper

    def _locate(self, x: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self._breaks, x, side="right") - 1
        return np.clip(idx, 0, len(self._pieces) - 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        idx = self._locate(xv)
        out = np.empty_like(xv)
        for i in range(len(self._pieces)):
            sel = idx == i
            if np.any(sel):
                out[sel] = self._anti[i](xv[sel]) + self._offsets[i]
        return float(out[0]) if scalar else out

    def derivative(self, x):
        """The stored interpolant of the integrand itself."""
        x = np.asarray(x, dtype=np.float64)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        idx = self._locate(xv)
        out = np.empty_like(xv)
        for i in range(len(self._pieces)):
            sel = idx == i
            if np.any(sel):
                out[sel] = self._pieces[i](xv[sel])
        return float(out[0]) if scalar else out
