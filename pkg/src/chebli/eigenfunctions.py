"""Jost solutions and normalised characters.

The Jost solution of ``v'' + (k^2 - Q) v = 0`` is written
``f(x) = exp(-i k (x - x0)) m(x, k)`` with ``m -> 1`` at infinity.  ``m`` solves
the Volterra equation

    m(x) = 1 + int_x^inf K(x, t) Q(t) m(t) dt,
    K(x, t) = (1 - exp(-2ik(t - x))) / (2ik)     (t - x at k = 0),

which is solved by Neumann iteration.  When the operator bound
``T = int min(1/|k|, t - a) |Q|`` of a piece exceeds one half, the half-line is
cut into pieces that are solved right to left, each with the free term carried
over from its right neighbour.  Steps of ``A`` enter through the flux
interface conditions.

Characters ``phi_k`` (``phi_k(0) = 1``, eigenvalue ``k^2 + q_inf``) come from
closed forms (Bessel, Jacobi with ``alpha = beta = 1/2``), from a fourth-order
Magnus integration started on the hypergeometric series near the origin
(Jacobi), or from the Jost solution matched to the regular solution across the
steps (perturbed Bessel).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import coefficients as co
from ._accel import magnus_gauss_points, magnus_sweep, volterra_apply, volterra_neumann

_GEOM = 0.005         # relative node spacing of the Jost grid
_OSC_STEP = 0.5       # node spacing times |k| in the oscillatory zone
_MAGNUS_GEOM = 0.01   # relative Magnus step near the origin
_MAGNUS_STEP = 0.02   # absolute Magnus step cap
_MAGNUS_OSC = 0.5     # Magnus step times max |k|
_SERIES_TERMS = 6
_X_LIMIT = 1e12


class JostError(RuntimeError):
    """The Jost construction could not be completed."""


class CharacterError(RuntimeError):
    """Character evaluation failed (overflow guard or invalid input)."""


@dataclass(frozen=True)
class JostSolution:
    """Jost correction ``m(x, k)`` sampled on ``grid``.

    ``v``/``dv`` hold the Liouville-form Jost solution and its derivative
    (right limits at steps).  ``operator_bound`` is ``T`` of the outermost
    piece and ``error_bound = T/(1-T)`` bounds ``|m - 1|`` there.
    """

    lam: float
    grid: np.ndarray
    m_values: np.ndarray
    sup_deviation: float
    iterations: int
    residual: float
    operator_bound: float
    error_bound: float
    pieces: int
    x_inf: float
    v: np.ndarray = field(repr=False)
    dv: np.ndarray = field(repr=False)
    atom_left: tuple = field(default=(), repr=False)

    def m_at(self, x):
        """Linear interpolation of ``m`` (right-continuous at steps)."""
        x = np.asarray(x, dtype=float)
        return np.interp(x, self.grid, self.m_values.real) + 1j * np.interp(x, self.grid, self.m_values.imag)


@dataclass(frozen=True)
class JostBatch:
    lams: np.ndarray
    grid: np.ndarray
    m: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    iterations: int
    residual: float
    operator_bound: float
    pieces: int
    x_inf: float
    atom_left: dict


@dataclass(frozen=True)
class Character:
    lam: float
    model: co.CoefficientModel = field(repr=False)
    source: str = "ClosedForm"

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        method = "jost" if self.source == "JostAssembled" else "auto"
        out = character_matrix(self.model, np.array([self.lam]), np.atleast_1d(x), method=method)[0]
        return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)

    __call__ = evaluate


# ----------------------------------------------------------------------------
# Jost solver
# ----------------------------------------------------------------------------

def _zero_energy_ok(model):
    if model.family == "jacobi":
        return True
    return abs(model.alpha - 0.5) < 1e-15


def truncation_point(model, tol, start):
    """Smallest convenient ``X`` with ``tail_bv(X) < tol/10`` (doubling scan)."""
    start = max(float(start), model.domain_floor)
    target = tol / 10.0
    if co.tail_bv(model, start) < target:
        return start
    if model.family == "bessel":
        return max(start, 10.0 * abs(model.alpha**2 - 0.25) / tol * (1.0 + 1e-9))
    x = max(start, max(model.atoms, default=start)) * 2.0 + 1.0
    while co.tail_bv(model, x) >= target:
        x *= 2.0
        if x > _X_LIMIT:
            raise JostError(f"tail variation does not fall below {target:.1e} before x = {_X_LIMIT:g}")
    return x


def _build_grid(model, x0, x_inf, kmax, extra):
    atoms = [a for a in model.atoms if x0 < a < x_inf]
    hi_osc = max(4.0 * max([x0] + atoms), 10.0)
    cap_osc = _OSC_STEP / kmax if kmax > 0 else np.inf
    cap_abs = 0.025 if model.family == "jacobi" else np.inf
    nodes = [x0]
    t = x0
    while t < x_inf:
        step = min(_GEOM * t, cap_abs)
        if t < hi_osc:
            step = min(step, cap_osc)
        t = min(t + max(step, 1e-12), x_inf)
        nodes.append(t)
    fixed = list(atoms) + [e for e in extra if x0 <= e <= x_inf]
    return _merge_nodes(np.array(nodes), fixed)


def _merge_nodes(base, fixed):
    """Union of generated and required nodes; generated nodes yield to nearby required ones."""
    fixed = np.unique(np.asarray(fixed, dtype=float))
    base = np.asarray(base, dtype=float)
    if fixed.size:
        j = np.clip(np.searchsorted(fixed, base), 1, fixed.size) if fixed.size > 1 else np.zeros(base.size, int)
        near = np.minimum(np.abs(base - fixed[np.clip(j - 1, 0, fixed.size - 1)]),
                          np.abs(base - fixed[np.clip(j, 0, fixed.size - 1)]))
        base = base[near > 1e-11 * np.maximum(1.0, np.abs(base))]
    pts = np.unique(np.concatenate([base, fixed]))
    return pts


def _potential_piece(model, t):
    """Potential on a piece; the last node takes the left limit (steps sit at piece ends)."""
    q = np.asarray(co.effective_potential(model, t), dtype=float)
    if model.steps and t.size:
        q[-1] = float(co.effective_potential(model, np.nextafter(t[-1], -np.inf)))
    return q


def _piece_bound(t, q, kinv):
    w = np.minimum(kinv, t - t[0]) * np.abs(q)
    return float(np.sum(0.5 * np.diff(t) * (w[:-1] + w[1:]))) if t.size > 1 else 0.0


def _choose_left(t, q_all, ib, lo, kinv, extra_bound, model):
    """Smallest index ``ia`` in [lo, ib) with piece bound at most 1/2."""

    def bound(ia):
        seg = t[ia:ib + 1]
        qs = q_all[ia:ib + 1].copy()
        if model.steps:
            qs[-1] = float(co.effective_potential(model, np.nextafter(seg[-1], -np.inf)))
        return _piece_bound(seg, qs, kinv) + extra_bound

    if bound(lo) <= 0.5:
        return lo, bound(lo)
    a, b = lo, ib - 1
    if bound(b) > 0.5:
        return b, bound(b)
    while b - a > 1:
        mid = (a + b) // 2
        if bound(mid) <= 0.5:
            b = mid
        else:
            a = mid
    return b, bound(b)


def jost_batch(model, lams, x0=None, tol=1e-8, extra_nodes=(), x_max=None, maxiter=200, backend=None):
    """Jost solutions for a batch of spectral parameters on a shared grid."""
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if tol <= 0:
        raise ValueError("tol must be positive")
    x0 = model.domain_floor if x0 is None else float(x0)
    if x0 < model.domain_floor:
        raise co.DomainError(f"x0 = {x0} lies below the domain floor")
    absl = np.abs(lams)
    has_zero = bool(np.any(absl < 1e-12))
    if has_zero and not _zero_energy_ok(model):
        raise JostError("k = 0: the degenerate kernel t - x is unbounded against this potential")
    nz = absl[absl >= 1e-12]
    kmin = float(nz.min()) if nz.size else 0.0
    kmax = float(absl.max()) if absl.size else 0.0
    kinv = np.inf if has_zero else 1.0 / kmin

    far = max([x0] + [float(e) for e in extra_nodes] + ([float(x_max)] if x_max else []))
    x_inf = max(truncation_point(model, tol, x0), far)
    grid = _build_grid(model, x0, x_inf, kmax, list(extra_nodes) + ([x_max] if x_max else []))
    n = grid.size
    q_all = np.asarray(co.effective_potential(model, grid), dtype=float)
    atom_idx = {int(np.searchsorted(grid, a)) for a in model.atoms if x0 < a < x_inf}

    nl = lams.size
    m_out = np.empty((nl, n), dtype=complex)
    v_out = np.empty((nl, n), dtype=complex)
    dv_out = np.empty((nl, n), dtype=complex)
    atom_left = {}
    lam_c = lams[:, None]
    safe = np.where(absl < 1e-12, 1.0, lams)[:, None]
    zero_col = (absl < 1e-12)[:, None]

    ib = n - 1
    vb = dvb = None
    total_iter = 0
    worst_res = 0.0
    outer_bound = None
    pieces = 0
    tail_extra = co.tail_bv(model, x_inf) * (kinv if np.isfinite(kinv) else x_inf)
    while True:
        lo = max([i for i in atom_idx if i < ib], default=0)
        extra = tail_extra if vb is None else 0.0
        ia, T = _choose_left(grid, q_all, ib, lo, kinv, extra, model) if ib > lo else (lo, 0.0)
        t = grid[ia:ib + 1]
        q = _potential_piece(model, t) if ib in atom_idx else np.asarray(q_all[ia:ib + 1])
        ph = np.exp(1j * lam_c * (t[None, :] - x0))
        if vb is None:
            mh = np.ones((nl, t.size), dtype=complex)
            hv = 1.0 / ph
            dh = -1j * lam_c * hv
            outer_bound = T
        else:
            arg = lam_c * (t[-1] - t[None, :])
            sinc_term = np.where(zero_col, (t[-1] - t[None, :]), np.sin(arg) / safe)
            hv = vb[:, None] * np.cos(arg) - dvb[:, None] * sinc_term
            dh = vb[:, None] * lam_c * np.sin(arg) + dvb[:, None] * np.cos(arg)
            mh = ph * hv
        scale = max(1.0, float(np.max(np.abs(mh))))
        if np.any(q != 0.0) and t.size > 1:
            m, it, delta = volterra_neumann(t, q, lams, mh, tol * scale * (1.0 - min(T, 0.99)), maxiter, backend)
            if not delta < tol * scale:
                raise JostError(f"Neumann iteration stalled on [{t[0]:.4g}, {t[-1]:.4g}] with increment {delta:.3e}")
            tm, i0, i1 = volterra_apply(t, q, lams, m)
            worst_res = max(worst_res, float(np.max(np.abs(m - mh - tm))) / scale)
            total_iter += it
        else:
            m = mh
            i0 = i1 = np.zeros_like(mh)
        v = m / ph
        dv = dh - 0.5 / ph * (i0 + np.exp(2j * lam_c * t[None, :]) * i1)
        sl = slice(ia, ib + 1) if ib not in atom_idx else slice(ia, ib)
        w = sl.stop - sl.start
        m_out[:, sl] = m[:, :w]
        v_out[:, sl] = v[:, :w]
        dv_out[:, sl] = dv[:, :w]
        if ib in atom_idx:
            atom_left[float(grid[ib])] = (v[:, -1].copy(), dv[:, -1].copy())
        pieces += 1
        if ia == 0:
            break
        vb, dvb = v[:, 0].copy(), dv[:, 0].copy()
        if ia in atom_idx:
            minv = np.linalg.inv(co.interface_matrix(model, float(grid[ia])))
            vb, dvb = minv[0, 0] * vb + minv[0, 1] * dvb, minv[1, 0] * vb + minv[1, 1] * dvb
            # left-limit data now live at the atom node of the next piece
        ib = ia
    return JostBatch(lams, grid, m_out, v_out, dv_out, total_iter, worst_res,
                     float(outer_bound), pieces, float(x_inf), atom_left)


def solve_jost(model, lam, x0=None, tol=1e-8, extra_nodes=(), x_max=None, maxiter=200, backend=None):
    """Jost correction ``m(., lam)`` on [x0, X_inf] with its error diagnostics."""
    b = jost_batch(model, [lam], x0, tol, extra_nodes, x_max, maxiter, backend)
    m = b.m[0]
    T = b.operator_bound
    return JostSolution(
        lam=float(lam), grid=b.grid, m_values=m, sup_deviation=float(np.max(np.abs(m - 1.0))),
        iterations=b.iterations, residual=b.residual, operator_bound=T,
        error_bound=T / (1.0 - T) if T < 1 else np.inf, pieces=b.pieces, x_inf=b.x_inf,
        v=b.v[0], dv=b.dv[0],
        atom_left=tuple((a, vl[0], dl[0]) for a, (vl, dl) in sorted(b.atom_left.items())),
    )


# ----------------------------------------------------------------------------
# closed forms
# ----------------------------------------------------------------------------

def bessel_character(alpha, z):
    """``Gamma(alpha+1) (2/z)^alpha J_alpha(z)``, even in ``z``, equal to 1 at 0."""
    z = np.abs(np.asarray(z, dtype=float))
    small = z < 1e-3
    zs = np.where(small, 1.0, z)
    with np.errstate(over="ignore", invalid="ignore"):
        big = special.gamma(alpha + 1.0) * np.power(2.0 / zs, alpha) * special.jv(alpha, zs)
    z2 = 0.25 * z * z
    ser = 1.0 - z2 / (alpha + 1.0) + z2 * z2 / (2.0 * (alpha + 1.0) * (alpha + 2.0)) \
        - z2**3 / (6.0 * (alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0))
    return np.where(small, ser, big)


def _bessel_state(alpha, k, x):
    """``(phi, phi')`` of the Bessel character at ``x`` (arrays broadcast)."""
    phi = bessel_character(alpha, k * x)
    dphi = -(k * k) * x / (2.0 * (alpha + 1.0)) * bessel_character(alpha + 1.0, k * x)
    return phi, dphi


def jacobi_series(alpha, beta, k, x, terms=_SERIES_TERMS):
    """Jacobi function and derivative from the tanh^2 hypergeometric series.

    ``phi = cosh(x)^(-2a) 2F1(a, b; alpha+1; tanh^2 x)`` with
    ``a = (rho + ik)/2``, ``b = (alpha - beta + 1 + ik)/2``; accurate for small ``x``.
    """
    k = np.asarray(k, dtype=float)
    rho = alpha + beta + 1.0
    a = 0.5 * (rho + 1j * k)
    b = 0.5 * (alpha - beta + 1.0 + 1j * k)
    c = alpha + 1.0
    th = np.tanh(x)
    z = th * th
    f = np.ones_like(a)
    df = np.zeros_like(a)
    coef = np.ones_like(a)
    for n in range(terms - 1):
        coef = coef * (a + n) * (b + n) / ((c + n) * (n + 1.0))
        f = f + coef * z ** (n + 1)
        df = df + coef * (n + 1.0) * z**n
    ch = np.cosh(x)
    pref = ch ** (-2.0 * a)
    phi = pref * f
    dphi = -2.0 * a * th * pref * f + pref * df * 2.0 * th / (ch * ch)
    return phi.real, dphi.real


def jacobi_c_function(alpha, beta, k):
    """Harish-Chandra ``c(k)`` for the Jacobi family (complex loggamma, k != 0)."""
    k = np.asarray(k, dtype=complex)
    rho = alpha + beta + 1.0
    lg = special.loggamma
    logc = ((rho - 1j * k) * np.log(2.0) + lg(alpha + 1.0) + lg(1j * k)
            - lg(0.5 * (1j * k + rho)) - lg(0.5 * (1j * k + alpha - beta + 1.0)))
    return np.exp(logc)


def _is_jacobi_half(model):
    return model.family == "jacobi" and abs(model.alpha - 0.5) < 1e-15 and abs(model.beta - 0.5) < 1e-15


# ----------------------------------------------------------------------------
# regular solution by Magnus integration
# ----------------------------------------------------------------------------

def _magnus_nodes(model, start, stop, kmax, extra, breaks=()):
    nodes = [start]
    t = start
    cap = min(_MAGNUS_STEP, _MAGNUS_OSC / kmax if kmax > 0 else np.inf)
    while t < stop:
        t = min(t + min(_MAGNUS_GEOM * t, cap) if t < 1.0 else t + cap, stop)
        nodes.append(t)
    return _merge_nodes(np.array(nodes), [e for e in extra if start <= e <= stop] + list(breaks))


def _magnus_segment(model, lams, start, stop, v0, dv0, outs):
    """Propagate ``(v, v')`` from ``start`` to ``stop``; record at sorted ``outs``."""
    kmax = float(np.max(np.abs(lams))) if lams.size else 0.0
    nodes = _magnus_nodes(model, start, stop, kmax, outs)
    g1, g2 = magnus_gauss_points(nodes)
    q1 = co.effective_potential(model, g1)
    q2 = co.effective_potential(model, g2)
    idx = np.searchsorted(nodes, outs)
    idx = np.minimum(idx, nodes.size - 1)
    want = np.concatenate([idx, [nodes.size - 1]])
    order = np.argsort(want, kind="stable")
    V, dV = magnus_sweep(nodes, q1, q2, lams**2, v0, dv0, want[order])
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    V, dV = V[:, inv], dV[:, inv]
    return V[:, :-1], dV[:, :-1], V[:, -1], dV[:, -1]


def _regular_ode(model, lams, t):
    """Regular solution in Liouville form at sorted ``t`` (all right of the start point)."""
    lams = np.abs(lams)
    if model.family == "jacobi":
        xs = model.domain_floor
        phi, dphi = jacobi_series(model.alpha, model.beta, lams, xs)
        s, ds = co.sqrtA_and_derivative(model, xs)
    else:
        # closed form up to the first step, then the flux interface
        xs = model.atoms[0]
        phi, dphi = _bessel_state(model.alpha, lams, xs)
        s, ds = co.sqrtA_and_derivative(model, np.nextafter(xs, -np.inf))
    v = s * phi
    dv = ds * phi + s * dphi
    tmax = max(float(t.max()), xs)
    steps = [a for a in model.atoms if a <= tmax]
    V = np.zeros((lams.size, t.size))
    dV = np.zeros((lams.size, t.size))
    edges = steps + [tmax] if steps else [xs, tmax]
    for j in range(len(edges) - 1 if steps else 1):
        cur, stop = edges[j], edges[j + 1]
        if steps:
            M = co.interface_matrix(model, cur)
            v, dv = M[0, 0] * v + M[0, 1] * dv, M[1, 0] * v + M[1, 1] * dv
        last = j + 2 == len(edges)
        sel = (t >= cur) & ((t < stop) | last)
        ov, odv, v, dv = _magnus_segment(model, lams, cur, stop, v, dv, t[sel])
        V[:, sel], dV[:, sel] = ov, odv
    return V, dV


# ----------------------------------------------------------------------------
# characters
# ----------------------------------------------------------------------------

def regular_state(model, lams, x):
    """``(v, v')`` of the regular Liouville solution ``sqrt(A) phi`` at one point ``x``.

    Steps at ``x`` itself are taken from the right.
    """
    lams = np.abs(np.atleast_1d(np.asarray(lams, dtype=float)))
    s, ds = co.sqrtA_and_derivative(model, x)
    fam = model.family
    if fam == "bessel" or (fam == "perturbed_bessel" and (not model.atoms or x < model.atoms[0])):
        phi, dphi = _bessel_state(model.alpha, lams, x)
        return s * phi, ds * phi + s * dphi
    if _is_jacobi_half(model):
        phi, dphi = _jacobi_half_state(lams, x)
        return s * phi, ds * phi + s * dphi
    if fam == "jacobi" and x <= model.domain_floor:
        phi, dphi = jacobi_series(model.alpha, model.beta, lams, x)
        return s * phi, ds * phi + s * dphi
    V, dV = _regular_ode(model, lams, np.array([float(x)]))
    return V[:, 0], dV[:, 0]


def _jacobi_half_state(k, x):
    k = np.asarray(k, dtype=float)
    s2 = np.sinh(2.0 * x)
    c2 = np.cosh(2.0 * x)
    kx = k * x
    small = np.abs(k) < 1e-8
    ks = np.where(small, 1.0, k)
    sinc = np.where(small, x, np.sin(kx) / ks)
    phi = 2.0 * sinc / s2
    dphi = 2.0 * np.cos(kx) / s2 - 4.0 * sinc * c2 / (s2 * s2)
    return phi, dphi


def jacobi_half_character(k, t):
    """Closed form for ``alpha = beta = 1/2``: ``2 sin(kt) / (k sinh 2t)``."""
    k = np.abs(np.asarray(k, dtype=float))[:, None]
    t = np.asarray(t, dtype=float)[None, :]
    small_t = t < 1e-6
    ts = np.where(small_t, 1.0, t)
    small_k = k < 1e-12
    ks = np.where(small_k, 1.0, k)
    s = np.where(small_k, ts, np.sin(k * ts) / ks)
    out = 2.0 * s / np.sinh(2.0 * ts)
    return np.where(small_t, 1.0 - (k * k + 4.0) * t * t / 6.0, out)


def jost_amplitude(model, lams, tol=1e-10, method="jost"):
    """Complex amplitude ``gamma(k)`` with ``sqrt(A) phi_k = 2 Re(gamma f_k)``.

    ``method="closed"`` uses the Bessel closed form or the Jacobi c-function
    (``|gamma| = 2^-rho |c|``); ``"jost"`` matches the regular solution to the
    Jost solution through the Wronskian ``W(v_reg, conj f) / (2ik)``.
    """
    lams = np.abs(np.atleast_1d(np.asarray(lams, dtype=float)))
    if np.any(lams < 1e-12):
        raise JostError("the amplitude is not defined at k = 0")
    if method == "closed":
        if model.family == "bessel":
            a = model.alpha
            amp = special.gamma(a + 1.0) * 2.0 ** (a + 0.5) / (np.sqrt(np.pi) * lams ** (a + 0.5))
            return 0.5 * amp + 0j
        if model.family == "jacobi":
            return 2.0 ** (-model.rho) * jacobi_c_function(model.alpha, model.beta, lams)
        raise ValueError("closed-form amplitude only exists for the Bessel and Jacobi families")
    xm = model.atoms[0] if model.atoms else 1.0
    v, dv = regular_state(model, lams, xm)
    b = jost_batch(model, lams, x0=xm, tol=tol)
    f, df = b.v[:, 0], b.dv[:, 0]
    return (v * np.conj(df) - dv * np.conj(f)) / (2j * lams)


def _chunks(n, size):
    for s in range(0, n, size):
        yield slice(s, min(n, s + size))


def character_matrix(model, lams, t, method="auto", tol=1e-10, chunk=256):
    """``phi_k(t)`` for every ``k`` in ``lams`` and ``t`` in ``t``; shape (len(lams), len(t)).

    ``method`` selects the perturbed-Bessel path right of the first step:
    ``"jost"`` (matched Jost solution) or ``"ode"`` (Magnus propagation
    through the interfaces); ``"auto"`` picks the Magnus path, which is an
    order of magnitude faster for large batches.  The two agree to the Jost
    discretisation error (about 1e-6).
    """
    lams = np.abs(np.atleast_1d(np.asarray(lams, dtype=float)))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise co.DomainError("characters are evaluated on t >= 0")
    fam = model.family
    out = np.ones((lams.size, t.size))
    if fam == "bessel":
        return bessel_character(model.alpha, lams[:, None] * t[None, :])
    if _is_jacobi_half(model):
        return jacobi_half_character(lams, t)
    if fam == "jacobi":
        xs = model.domain_floor
        near = t <= xs
        if np.any(near):
            for j in np.nonzero(near)[0]:
                out[:, j] = jacobi_series(model.alpha, model.beta, lams, t[j])[0]
        far = ~near
        if np.any(far):
            order = np.argsort(t[far])
            tf = t[far][order]
            V = np.empty((lams.size, tf.size))
            for sl in _chunks(lams.size, 4 * chunk):
                V[sl], _ = _regular_ode(model, lams[sl], tf)
            s = np.exp(0.5 * co.log_A(model, tf))
            res = np.empty_like(V)
            res[:, order] = V / s[None, :]
            out[:, far] = res
        _guard(out, model)
        return out
    # perturbed Bessel
    a1 = model.atoms[0]
    left = t < a1
    out[:, left] = bessel_character(model.alpha, lams[:, None] * t[None, left])
    right = ~left
    if not np.any(right):
        return out
    tr = t[right]
    pos = lams >= 1e-12
    res = np.ones((lams.size, tr.size))
    if method in ("ode", "auto"):
        order = np.argsort(tr)
        for sl in _chunks(lams.size, 4 * chunk):
            V, _ = _regular_ode(model, lams[sl], tr[order])
            tmp = np.empty_like(V)
            tmp[:, order] = V
            res[sl] = tmp
        res /= np.sqrt(co.A_unchecked(model, tr))[None, :]
    else:
        idx = np.nonzero(pos)[0]
        for sl in _chunks(idx.size, chunk):
            ks = lams[idx[sl]]
            v, dv = regular_state(model, ks, a1)
            b = jost_batch(model, ks, x0=a1, tol=tol, extra_nodes=tuple(tr))
            f, df = b.v[:, 0], b.dv[:, 0]
            gamma = (v * np.conj(df) - dv * np.conj(f)) / (2j * ks)
            cols = np.searchsorted(b.grid, tr)
            vals = 2.0 * np.real(gamma[:, None] * b.v[:, cols])
            res[idx[sl]] = vals / np.sqrt(co.A_unchecked(model, tr))[None, :]
    res[~pos] = 1.0
    out[:, right] = res
    _guard(out, model)
    return out


def _guard(out, model):
    bad = ~np.isfinite(out)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise CharacterError(f"non-finite character value for {model.describe()} at entry ({i}, {j})")


def character(model, lam):
    """Normalised character ``phi_lam`` of the hypergroup generated by ``model``."""
    fam = model.family
    if fam == "bessel" or _is_jacobi_half(model) or (abs(lam) < 1e-12 and fam != "jacobi"):
        src = "ClosedForm"
    elif fam == "jacobi":
        src = "Integrated"
    else:
        src = "JostAssembled"
    return Character(float(lam), model, src)
