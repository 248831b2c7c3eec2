"""Quadrature grids shared by the transforms and measure algebra."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import integrate, special

# Gauss-Legendre points per panel; a panel of width L resolves e^{i w s}
# for w*L up to about 2*(n - 10).
GL_ORDER = 24
_MAX_PHASE_PER_PANEL = 2.0 * (GL_ORDER - 10)


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


@lru_cache(maxsize=16)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def gl_panels(breaks, n=GL_ORDER):
    """Composite Gauss-Legendre rule on consecutive intervals of ``breaks``."""
    breaks = np.asarray(breaks, dtype=float)
    xs, ws = _leggauss(n)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (half * xs[None, :] + 0.5 * (hi + lo)).ravel()
    weights = (half * ws[None, :]).ravel()
    return nodes, weights


def panel_breaks(lo, hi, max_width, extra=()):
    """Uniform panel edges on [lo, hi] no wider than ``max_width``, also cut at ``extra``."""
    npan = max(1, int(np.ceil((hi - lo) / max_width - 1e-12)))
    edges = np.linspace(lo, hi, npan + 1)
    cuts = [e for e in extra if lo < e < hi]
    if cuts:
        edges = np.unique(np.concatenate([edges, cuts]))
        edges = edges[np.concatenate([[True], np.diff(edges) > 1e-12 * max(1.0, abs(hi))])]
    return edges


def oscillatory_rule(lo, hi, frequency, extra=(), n=GL_ORDER):
    """GL panels on [lo, hi] fine enough for integrands oscillating like e^{i frequency s}."""
    width = _MAX_PHASE_PER_PANEL / max(frequency, 1e-9)
    return gl_panels(panel_breaks(lo, hi, min(width, max(hi - lo, 1e-12)), extra), n)


def lambda_rule(cutoff, t_max, n=GL_ORDER):
    """Spectral-parameter rule on [0, cutoff] resolving kernels up to support ``t_max``.

    Products of three characters oscillate with frequency up to ``2 t_max``
    in the spectral variable, which sets the panel width.
    """
    return oscillatory_rule(0.0, float(cutoff), 2.0 * float(t_max) + 1.0, n=n)


def jacobi_rule(n, a, b=None):
    """Gauss-Jacobi nodes/weights on [-1, 1] for weight (1-u)^a (1+u)^b."""
    if b is None:
        b = a
    if abs(a) < 1e-14 and abs(b) < 1e-14:
        return _leggauss(n)
    return special.roots_jacobi(n, a, b)


def adaptive_quad(fn, lo, hi, rtol=1e-10, points=None, limit=400):
    """Adaptive Gauss-Kronrod integral of ``fn`` on [lo, hi] (``hi`` may be inf)."""
    kw = {"epsabs": 0.0, "epsrel": rtol, "limit": limit, "full_output": 1}
    if points is not None and np.isfinite(hi):
        pts = [p for p in points if lo < p < hi]
        if pts:
            kw["points"] = pts
    out = integrate.quad(fn, lo, hi, **kw)
    value, err = out[0], out[1]
    if len(out) > 3 and abs(err) > max(rtol * abs(value), 1e-14):
        raise QuadratureError(f"quadrature on [{lo}, {hi}] did not converge", err)
    return value


def trapezoid_weights(grid):
    grid = np.asarray(grid, dtype=float)
    w = np.zeros_like(grid)
    if grid.size > 1:
        h = np.diff(grid)
        w[:-1] += 0.5 * h
        w[1:] += 0.5 * h
    return w
