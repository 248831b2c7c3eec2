"""Product-formula measures and the convolution algebra of radial measures.

``product_measure(x, y)`` is the measure ``mu_{x,y}`` with
``phi_k(x) phi_k(y) = int phi_k dmu_{x,y}``.  The Bessel and Jacobi families
(``alpha >= beta``) have explicit kernels on ``[|x-y|, x+y]``, integrated with
a Gauss-Jacobi rule that absorbs the endpoint factor
``((t-|x-y|)(x+y-t))^(alpha-1/2)``.  Other models are inverted spectrally.
"""

from __future__ import annotations

import numpy as np
from scipy import interpolate, special

from . import coefficients as co
from . import eigenfunctions as ef
from .measures import (
    CoordinateError,
    RadialMeasure,
    l1_distance,
    read_measure_csv,
    recentre,
    reflect,
    total_mass,
    total_variation,
    weighted_norm,
    write_measure_csv,
)
from .quadrature import jacobi_rule, oscillatory_rule
from .spectral import SpectralSymbol, forward_transform, inverse_transform

__all__ = [
    "RadialMeasure", "product_measure", "convolve", "recentre", "reflect", "l1_distance",
    "weighted_norm", "total_mass", "total_variation", "write_measure_csv", "read_measure_csv",
    "CoordinateError", "add_measures",
]


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - np.log(2.0)


def _log_sinh(x):
    x = np.abs(x)
    return x + np.log1p(-np.exp(-2.0 * x)) - np.log(2.0)


def _node_count(x, y, nodes):
    if nodes is not None:
        return int(nodes)
    return int(max(96, 64 + 10 * np.ceil(min(x, y))))


def _bessel_kernel(alpha, x, y, n):
    a = alpha - 0.5
    u, W = jacobi_rule(n, a)
    big, small = max(x, y), min(x, y)
    t = big + small * u
    d, s = abs(x - y), x + y
    lc = special.gammaln(alpha + 1.0) - 0.5 * np.log(np.pi) - special.gammaln(alpha + 0.5)
    c = np.exp(lc) * 2.0 ** (1.0 - 2.0 * alpha)
    # density = c t [(t-d)(t+d)(s-t)(s+t)]^a / (xy)^(2 alpha); (t-d)(s-t) = small^2 (1-u^2)
    smooth = c * t * ((t + d) * (s + t) * small * small) ** a / (x * y) ** (2.0 * alpha)
    endpoint = (1.0 - u * u) ** a
    return t, smooth * endpoint, W * small / endpoint


def _jacobi_kernel(alpha, beta, x, y, n):
    a = alpha - 0.5
    u, W = jacobi_rule(n, a)
    big, small = max(x, y), min(x, y)
    r = big + small * u
    lcx, lcy, lcr = _log_cosh(x), _log_cosh(y), _log_cosh(r)
    lsx, lsy, lsr = _log_sinh(x), _log_sinh(y), _log_sinh(r)
    # B = (cosh^2 x + cosh^2 y + cosh^2 r - 1) / (2 cosh x cosh y cosh r), overflow-free
    B = 0.5 * (np.exp(lcx - lcy - lcr) + np.exp(lcy - lcx - lcr) + np.exp(lcr - lcx - lcy)
               - np.exp(-lcx - lcy - lcr))
    one_m_b2 = np.maximum(1.0 - B * B, 0.0)
    lead = (special.gammaln(alpha + 1.0) - 0.5 * np.log(np.pi) - special.gammaln(alpha + 0.5)
            + (alpha - beta - 1.0) * (lcx + lcy + lcr) - 2.0 * alpha * (lsx + lsy + lsr)
            + (2.0 * alpha + 1.0) * lsr + (2.0 * beta + 1.0) * lcr)
    hyp = special.hyp2f1(alpha + beta, alpha - beta, alpha + 0.5, 0.5 * (1.0 - B))
    endpoint = (1.0 - u * u) ** a
    # (1 - B^2) / (1 - u^2) is smooth and positive; keep it together for the weights
    dens = np.exp(lead) * one_m_b2**a * hyp
    return r, dens, W * small / endpoint


def _direct_ok(model):
    if model.family == "bessel":
        return True
    return model.family == "jacobi" and model.alpha >= model.beta


# the tapered inverse smears jumps over a few 1/cutoff; sampling this far past
# the support keeps the mass and the product-formula residual near 1e-7
SPILL = 16.0 * np.pi


def _spectral_support(lo, hi, spec):
    pad = SPILL / spec.cutoff
    return max(0.0, lo - pad), min(hi + pad, spec.t_max) if hi <= spec.t_max else hi + pad


def _support_rule(model, lo, hi, cutoff):
    return oscillatory_rule(lo, hi, cutoff, extra=model.atoms)


def product_measure(model, x, y, spec=None, method="auto", nodes=None, window="tukey"):
    """The probability measure ``mu_{x,y} = delta_x * delta_y``.

    Parameters
    ----------
    method : {"auto", "direct", "spectral"}
        ``auto`` uses the explicit kernel when the family has one and spectral
        inversion otherwise; ``spectral`` needs a calibrated ``spec``.
    nodes : int, optional
        Gauss-Jacobi order for the explicit kernels.
    """
    x, y = float(x), float(y)
    if x < 0 or y < 0:
        raise co.DomainError("product_measure needs x, y >= 0")
    if x == 0.0 or y == 0.0:
        return RadialMeasure.dirac(max(x, y))
    lo, hi = abs(x - y), x + y
    if method == "auto":
        method = "direct" if _direct_ok(model) else "spectral"
    if method == "direct":
        if not _direct_ok(model):
            raise ValueError(f"no explicit product kernel for {model.describe()}")
        n = _node_count(x, y, nodes)
        if model.family == "bessel":
            t, dens, w = _bessel_kernel(model.alpha, x, y, n)
        else:
            t, dens, w = _jacobi_kernel(model.alpha, model.beta, x, y, n)
        return RadialMeasure((lo, hi), t, dens, w, (), "hypergroup")
    if method != "spectral":
        raise ValueError(f"unknown method {method!r}")
    if spec is None:
        raise ValueError("spectral product measures need a calibrated Plancherel spec")
    phi = ef.character_matrix(model, spec.lambda_grid, np.array([x, y]))
    sym = SpectralSymbol(spec.lambda_grid, phi[:, 0] * phi[:, 1], "TransformOfMeasure", "hypergroup",
                         f"phi({x:g})phi({y:g})", 1.0)
    lo, hi = _spectral_support(lo, hi, spec)
    return inverse_transform(sym, spec, model, _support_rule(model, lo, hi, spec.cutoff), window,
                             support=(lo, hi))


# ----------------------------------------------------------------------------
# algebra
# ----------------------------------------------------------------------------

def add_measures(parts, coordinate="hypergroup"):
    """Sum of ``(coefficient, measure)`` pairs, resampled on the union grid."""
    parts = [(c, m) for c, m in parts if c != 0]
    if not parts:
        return RadialMeasure((0.0, 0.0), np.zeros(0), np.zeros(0), np.zeros(0), (), coordinate)
    for _, m in parts:
        if m.coordinate != coordinate:
            raise CoordinateError("add_measures needs one coordinate")
    atoms = {}
    for c, m in parts:
        for a, w in m.atoms:
            atoms[a] = atoms.get(a, 0.0) + c * w
    dense = [(c, m) for c, m in parts if m.grid.size]
    lo = min(m.support[0] for _, m in parts)
    hi = max(m.support[1] for _, m in parts)
    if len(dense) == 1:
        c, m = dense[0]
        return RadialMeasure((lo, hi), m.grid, c * m.density, m.weights, tuple(atoms.items()), coordinate)
    if not dense:
        return RadialMeasure((lo, hi), np.zeros(0), np.zeros(0), np.zeros(0), tuple(atoms.items()), coordinate)
    g0, w0 = dense[0][1].grid, dense[0][1].weights
    scale = max(1.0, float(np.max(np.abs(g0))))
    if all(m.grid.shape == g0.shape and np.allclose(m.grid, g0, rtol=0, atol=1e-9 * scale)
           and np.allclose(m.weights, w0, rtol=1e-9, atol=0) for _, m in dense[1:]):
        # shared nodes (e.g. recentred iterates): keep the original quadrature
        dens = sum(c * m.density for c, m in dense)
        return RadialMeasure((lo, hi), g0, dens, w0, tuple(atoms.items()), coordinate)
    from .quadrature import trapezoid_weights

    # support edges and repeated nodes are jumps: they enter the grid twice,
    # carrying the left and the right limit, so no trapezoid cell straddles one
    jumps = np.unique(np.concatenate([np.array(m.support) for _, m in dense]
                                     + [m.grid[1:][np.diff(m.grid) == 0] for _, m in dense]))
    nodes = np.unique(np.concatenate([m.grid for _, m in dense] + [jumps]))
    left = sum(c * _resample(m, nodes, "left") for c, m in dense)
    right = sum(c * _resample(m, nodes, "right") for c, m in dense)
    twice = np.isin(nodes, jumps)
    grid = np.repeat(nodes, np.where(twice, 2, 1))
    pos = np.cumsum(np.where(twice, 2, 1)) - 1
    dens = np.zeros(grid.size, dtype=np.result_type(left, right))
    dens[pos] = right
    dens[pos - twice] = left
    return RadialMeasure((lo, hi), grid, dens, trapezoid_weights(grid), tuple(atoms.items()), coordinate)


def _resample(mu, x, side="right"):
    """Density at ``x`` by shape-preserving cubics, zero outside the support.

    Repeated grid nodes mark jumps; the density is continued from the
    nearest segment up to the support edges.  ``side`` picks the one-sided
    limit at jumps and at the support edges.
    """
    lo, hi = mu.support
    x = np.asarray(x, dtype=float)
    inside = (x > lo) & (x < hi)
    inside |= (x == hi) if side == "left" else (x == lo)
    if lo == hi:
        inside = np.zeros_like(inside)
    g, d = mu.grid, mu.density
    val = np.zeros(x.shape, dtype=complex if np.iscomplexobj(d) else float)
    if g.size == 0:
        return val
    cuts = np.nonzero(np.diff(g) == 0)[0] + 1
    segs = [(s[0], s[-1] + 1) for s in np.split(np.arange(g.size), cuts)]
    order = segs[::-1] if side == "left" else segs
    for k, (i, j) in enumerate(order):
        first = (i == 0)
        last = (j == g.size)
        a = -np.inf if first else g[i]
        b = np.inf if last else g[j - 1]
        sel = (x >= a) & (x <= b)
        if not sel.any():
            continue
        gs, ds = g[i:j], d[i:j]
        if gs.size >= 3:
            fit = (lambda v, gs=gs, ds=ds: interpolate.PchipInterpolator(gs, v)(x[sel]))
            val[sel] = fit(ds.real) + 1j * fit(ds.imag) if np.iscomplexobj(ds) else fit(ds)
        elif gs.size == 2:
            t = (x[sel] - gs[0]) / (gs[1] - gs[0])
            val[sel] = ds[0] + t * (ds[1] - ds[0])
        else:
            val[sel] = ds[0]
    return np.where(inside, val, 0.0)


def _split_identity(mu, atol=1e-14):
    m0 = sum(m for a, m in mu.atoms if abs(a) <= atol)
    rest = RadialMeasure(mu.support, mu.grid, mu.density, mu.weights,
                         tuple((a, m) for a, m in mu.atoms if abs(a) > atol), mu.coordinate)
    return m0, rest


def _is_empty(mu):
    return mu.grid.size == 0 and not mu.atoms


def convolve(mu, rho, model, spec=None, method="spectral", x_grid=None, window="tukey"):
    """Hypergroup convolution ``mu * rho``.

    Atoms at the origin are split off and handled exactly (``delta_0`` is the
    identity).  The remainder is computed on the spectral side (multiply the
    symbols and invert) or, with ``method="direct"``, by summing product
    measures when both remainders are purely atomic.
    """
    if mu.coordinate != "hypergroup" or rho.coordinate != "hypergroup":
        raise CoordinateError("convolve expects both measures in the hypergroup coordinate")
    m0, mu1 = _split_identity(mu)
    r0, rho1 = _split_identity(rho)
    parts = [(m0, rho), (r0, mu1)]
    if not _is_empty(mu1) and not _is_empty(rho1):
        if method == "direct":
            if mu1.grid.size or rho1.grid.size:
                raise ValueError("direct convolution needs purely atomic measures")
            for a, p in mu1.atoms:
                for b, q in rho1.atoms:
                    parts.append((p * q, product_measure(model, a, b, spec)))
        elif method == "spectral":
            if spec is None:
                raise ValueError("spectral convolution needs a calibrated Plancherel spec")
            lo1, hi1 = mu1.support
            lo2, hi2 = rho1.support
            lo, hi = _spectral_support(max(0.0, lo1 - hi2, lo2 - hi1), hi1 + hi2, spec)
            sym = forward_transform(mu1, model, spec) * forward_transform(rho1, model, spec)
            grid = x_grid if x_grid is not None else _support_rule(model, lo, hi, spec.cutoff)
            parts.append((1.0, inverse_transform(sym, spec, model, grid, window, support=(lo, hi))))
        else:
            raise ValueError(f"unknown method {method!r}")
    return add_measures(parts)
