"""Hot numerical kernels with an optional numba backend.

Two kernels dominate the runtime of the library:

* ``magnus_sweep`` propagates the regular solution of ``v'' + (k^2 - Q) v = 0``
  for a whole batch of spectral parameters with a fourth-order Magnus
  integrator;
* ``volterra_neumann`` solves the Jost-type Volterra equation by Neumann
  iteration with Filon cell weights.

Each kernel exists twice: a loop form compiled with ``numba.njit`` and a
vectorised numpy form.  The numba path is used unless the environment
variable ``CHEBLI_NUMBA`` is set to ``0``/``off``/``false`` (or numba cannot be
imported).  Both paths are tested against each other.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("CHEBLI_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "off", "false", "no")

try:
    if not _WANT_NUMBA:
        raise ImportError
    import numba

    HAVE_NUMBA = True
    njit = numba.njit(cache=True, fastmath=False)
except ImportError:  # pragma: no cover - exercised with CHEBLI_NUMBA=0
    HAVE_NUMBA = False

    def njit(fn):
        return fn


BACKEND = "numba" if HAVE_NUMBA else "numpy"

_SQ3 = np.sqrt(3.0)
# Filon series switch: below this |theta| the closed forms cancel badly
_THETA_SERIES = 0.05
_KERNEL_SERIES = 0.5
_KERNEL_TERMS = 18


# --------------------------------------------------------------------------
# Magnus propagator
# --------------------------------------------------------------------------

def magnus_gauss_points(nodes):
    """Return the two Gauss-Legendre abscissae inside every step of ``nodes``."""
    h = np.diff(nodes)
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    off = h * _SQ3 / 6.0
    return mid - off, mid + off


def _magnus_sweep_numpy(nodes, q1, q2, k2, v0, dv0, out_idx):
    nl = k2.shape[0]
    out_v = np.empty((nl, out_idx.shape[0]))
    out_dv = np.empty((nl, out_idx.shape[0]))
    v = v0.astype(float).copy()
    dv = dv0.astype(float).copy()
    j = 0
    if out_idx.shape[0] and out_idx[0] == 0:
        out_v[:, 0] = v
        out_dv[:, 0] = dv
        j = 1
    h_all = np.diff(nodes)
    for n in range(h_all.shape[0]):
        h = h_all[n]
        p1 = q1[n] - k2
        p2 = q2[n] - k2
        c = (_SQ3 / 12.0) * h * h * (p1 - p2)
        b = 0.5 * h * (p1 + p2)
        th2 = c * c + h * b
        s = np.sqrt(np.abs(th2))
        neg = th2 < 0.0
        small = s < 1e-8
        with np.errstate(invalid="ignore", divide="ignore"):
            cc = np.where(neg, np.cos(s), np.cosh(s))
            ss = np.where(neg, np.sin(s), np.sinh(s)) / np.where(small, 1.0, s)
        ss = np.where(small, 1.0 + th2 / 6.0, ss)
        cc = np.where(small, 1.0 + 0.5 * th2, cc)
        nv = (cc + ss * c) * v + ss * h * dv
        ndv = ss * b * v + (cc - ss * c) * dv
        v, dv = nv, ndv
        while j < out_idx.shape[0] and out_idx[j] == n + 1:
            out_v[:, j] = v
            out_dv[:, j] = dv
            j += 1
    return out_v, out_dv


@njit
def _magnus_sweep_numba(nodes, q1, q2, k2, v0, dv0, out_idx):  # pragma: no cover - jitted
    nl = k2.shape[0]
    nout = out_idx.shape[0]
    out_v = np.empty((nl, nout))
    out_dv = np.empty((nl, nout))
    sq3 = np.sqrt(3.0)
    nsteps = nodes.shape[0] - 1
    for l in range(nl):
        v = v0[l]
        dv = dv0[l]
        j = 0
        if nout > 0 and out_idx[0] == 0:
            out_v[l, 0] = v
            out_dv[l, 0] = dv
            j = 1
        for n in range(nsteps):
            h = nodes[n + 1] - nodes[n]
            p1 = q1[n] - k2[l]
            p2 = q2[n] - k2[l]
            c = (sq3 / 12.0) * h * h * (p1 - p2)
            b = 0.5 * h * (p1 + p2)
            th2 = c * c + h * b
            s = np.sqrt(abs(th2))
            if s < 1e-8:
                cc = 1.0 + 0.5 * th2
                ss = 1.0 + th2 / 6.0
            elif th2 < 0.0:
                cc = np.cos(s)
                ss = np.sin(s) / s
            else:
                cc = np.cosh(s)
                ss = np.sinh(s) / s
            nv = (cc + ss * c) * v + ss * h * dv
            ndv = ss * b * v + (cc - ss * c) * dv
            v = nv
            dv = ndv
            while j < nout and out_idx[j] == n + 1:
                out_v[l, j] = v
                out_dv[l, j] = dv
                j += 1
    return out_v, out_dv


def magnus_sweep(nodes, q1, q2, k2, v0, dv0, out_idx, backend=None):
    """Propagate ``(v, v')`` across ``nodes`` for every ``k2`` in the batch.

    ``q1``/``q2`` hold the potential at the two Gauss points of each step and
    ``out_idx`` (sorted, node indices) selects where the state is recorded.
    Returns two ``(len(k2), len(out_idx))`` arrays.
    """
    args = (
        np.ascontiguousarray(nodes, dtype=float),
        np.ascontiguousarray(q1, dtype=float),
        np.ascontiguousarray(q2, dtype=float),
        np.ascontiguousarray(k2, dtype=float),
        np.ascontiguousarray(v0, dtype=float),
        np.ascontiguousarray(dv0, dtype=float),
        np.ascontiguousarray(out_idx, dtype=np.int64),
    )
    if (backend or BACKEND) == "numba" and HAVE_NUMBA:
        return _magnus_sweep_numba(*args)
    return _magnus_sweep_numpy(*args)


# --------------------------------------------------------------------------
# Filon cell weights and the Volterra/Neumann solver
# --------------------------------------------------------------------------

def _series(it, terms, coef):
    """``sum_n it^n coef(n)`` by Horner's rule."""
    out = np.full(it.shape, coef(terms - 1), dtype=complex)
    for n in range(terms - 2, -1, -1):
        out = out * it + coef(n)
    return out


_FACT = [float(np.prod(np.arange(1, n + 1))) for n in range(30)]


def filon_factors(theta):
    """Return ``(f0, f1)`` with f0 = int_0^1 e^{i theta s} ds, f1 = int_0^1 s e^{i theta s} ds."""
    theta = np.asarray(theta, dtype=float)
    f0 = np.empty(theta.shape, dtype=complex)
    f1 = np.empty(theta.shape, dtype=complex)
    small = np.abs(theta) < _THETA_SERIES
    th = theta[~small]
    e = np.exp(1j * th)
    f0[~small] = (e - 1.0) / (1j * th)
    f1[~small] = e / (1j * th) + (e - 1.0) / (th * th)
    # series: f0 = sum (i t)^n/(n+1)!,  f1 = sum (i t)^n/(n! (n+2))
    it = 1j * theta[small]
    f0[small] = _series(it, 9, lambda n: 1.0 / _FACT[n + 1])
    f1[small] = _series(it, 9, lambda n: 1.0 / (_FACT[n] * (n + 2)))
    return f0, f1


def kernel_factors(theta):
    """Cell moments of the Jost kernel, free of cancellation as ``theta -> 0``.

    With ``E(z) = (e^z - 1)/z`` returns ``(a0, a1)`` where
    ``a0 = int_0^1 s (1-s) E(i theta s) ds`` and ``a1 = int_0^1 s^2 E(i theta s) ds``.
    """
    theta = np.asarray(theta, dtype=float)
    a0 = np.empty(theta.shape, dtype=complex)
    a1 = np.empty(theta.shape, dtype=complex)
    small = np.abs(theta) < _KERNEL_SERIES
    th = theta[~small]
    f0, f1 = filon_factors(th)
    a0[~small] = (f0 - f1 - 0.5) / (1j * th)
    a1[~small] = (f1 - 0.5) / (1j * th)
    it = 1j * theta[small]
    a0[small] = _series(it, _KERNEL_TERMS, lambda n: 1.0 / (_FACT[n + 1] * (n + 2) * (n + 3)))
    a1[small] = _series(it, _KERNEL_TERMS, lambda n: 1.0 / (_FACT[n + 1] * (n + 3)))
    return a0, a1


def _filon_weights(t, lam):
    h = np.diff(t)
    lam_col = lam[:, None]
    th = -2.0 * lam_col * h[None, :]
    f0, f1 = filon_factors(th)
    a0, a1 = kernel_factors(th)
    ph = np.exp(-2j * lam_col * t[None, :-1])
    return ph * h * (f0 - f1), ph * h * f1, h * f0, h * h * a0, h * h * a1


def _tail_sums(c, n):
    out = np.zeros((c.shape[0], n), dtype=complex)
    out[:, :-1] = np.cumsum(c[:, ::-1], axis=1)[:, ::-1]
    return out


def _apply(t, q, lam, m, wts):
    # T m(t_j) = cell_j + e^{-2i lam h_j} T m(t_{j+1}) + E_j I0(t_{j+1}); unrolled with unit phases
    wl, wr, ek, kl, kr = wts
    n = t.shape[0]
    g = q[None, :] * m
    i1 = _tail_sums(wl * g[:, :-1] + wr * g[:, 1:], n)
    i0 = _tail_sums(0.5 * np.diff(t) * (g[:, :-1] + g[:, 1:]), n)
    c = kl * g[:, :-1] + kr * g[:, 1:] + ek * i0[:, 1:]
    ph = np.exp(-2j * lam[:, None] * t[None, :])
    tm = np.conj(ph) * _tail_sums(ph[:, :-1] * c, n)
    return tm, i0, i1


def volterra_apply(t, q, lam, m):
    """One application of the Jost integral operator (numpy, vectorised over ``lam``).

    Returns ``(T m, I0, I1)`` with ``I0(x) = int_x q m`` and
    ``I1(x) = int_x e^{-2i lam s} q m ds``, the two moments that also give
    the derivative of the solution.
    """
    t = np.asarray(t, dtype=float)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    if t.shape[0] < 2:
        z = np.zeros_like(m)
        return z, z.copy(), z.copy()
    return _apply(t, np.asarray(q, dtype=float), lam, m, _filon_weights(t, lam))


def _neumann_numpy(t, q, lam, mh, tol, maxiter):
    wts = _filon_weights(t, lam)
    m = mh.copy()
    iters = 0
    delta = np.inf
    for iters in range(1, maxiter + 1):
        tm, _, _ = _apply(t, q, lam, m, wts)
        new = mh + tm
        delta = np.max(np.abs(new - m)) if new.size else 0.0
        m = new
        if delta < tol:
            break
    return m, iters, delta


@njit
def _kernel_pair_numba(th):  # pragma: no cover - jitted
    it = 1j * th
    if abs(th) < _KERNEL_SERIES:
        s0 = 0j
        s1 = 0j
        term = 1.0 + 0j
        fact = 1.0
        for k in range(_KERNEL_TERMS):
            if k > 0:
                term = term * it
            fact *= k + 1
            s0 += term / (fact * (k + 2) * (k + 3))
            s1 += term / (fact * (k + 3))
        return s0, s1
    e = np.exp(it)
    f0 = (e - 1.0) / it
    f1 = e / it + (e - 1.0) / (th * th)
    return (f0 - f1 - 0.5) / it, (f1 - 0.5) / it


@njit
def _f0_numba(th):  # pragma: no cover - jitted
    it = 1j * th
    if abs(th) < _THETA_SERIES:
        s0 = 0j
        term = 1.0 + 0j
        fact = 1.0
        for k in range(9):
            if k > 0:
                term = term * it
                fact *= k
            s0 += term / (fact * (k + 1))
        return s0
    return (np.exp(it) - 1.0) / it


@njit
def _neumann_numba(t, q, lam, mh, tol, maxiter):  # pragma: no cover - jitted
    nl, n = mh.shape
    m = mh.copy()
    ek = np.empty(n - 1, dtype=np.complex128)
    kl = np.empty(n - 1, dtype=np.complex128)
    kr = np.empty(n - 1, dtype=np.complex128)
    rot = np.empty(n - 1, dtype=np.complex128)
    g = np.empty(n, dtype=np.complex128)
    new = np.empty(n, dtype=np.complex128)
    worst_iter = 0
    worst_delta = 0.0
    for l in range(nl):
        lm = lam[l]
        for j in range(n - 1):
            hj = t[j + 1] - t[j]
            th = -2.0 * lm * hj
            a0, a1 = _kernel_pair_numba(th)
            ek[j] = hj * _f0_numba(th)
            kl[j] = hj * hj * a0
            kr[j] = hj * hj * a1
            rot[j] = np.exp(1j * th)
        delta = np.inf
        it_count = 0
        for it_count in range(1, maxiter + 1):
            for j in range(n):
                g[j] = q[j] * m[l, j]
            i0 = 0j
            acc = 0j
            new[n - 1] = mh[l, n - 1]
            for j in range(n - 2, -1, -1):
                # T m(t_j) = cell_j + e^{-2i lam h_j} T m(t_{j+1}) + E_j I0(t_{j+1})
                acc = kl[j] * g[j] + kr[j] * g[j + 1] + ek[j] * i0 + rot[j] * acc
                i0 += 0.5 * (t[j + 1] - t[j]) * (g[j] + g[j + 1])
                new[j] = mh[l, j] + acc
            delta = 0.0
            for j in range(n):
                d = abs(new[j] - m[l, j])
                if d > delta:
                    delta = d
                m[l, j] = new[j]
            if delta < tol:
                break
        if it_count > worst_iter:
            worst_iter = it_count
        if delta > worst_delta:
            worst_delta = delta
    return m, worst_iter, worst_delta


def volterra_neumann(t, q, lam, mh, tol, maxiter=200, backend=None):
    """Solve ``m = mh + T m`` on the grid ``t`` for a batch of ``lam``.

    ``(T m)(x) = int_x^{t[-1]} K(x,s) q(s) m(s) ds`` with the Jost kernel
    ``K(x,s) = (1 - exp(-2i lam (s-x)))/(2i lam)`` (``s - x`` at ``lam = 0``).
    The product ``q m`` is taken piecewise linear; the oscillatory factor is
    integrated exactly per cell.  Returns ``(m, iterations, last_increment)``.
    """
    t = np.ascontiguousarray(t, dtype=float)
    q = np.ascontiguousarray(q, dtype=float)
    lam = np.ascontiguousarray(np.atleast_1d(lam), dtype=float)
    mh = np.ascontiguousarray(mh, dtype=complex)
    if t.shape[0] < 2:
        return mh.copy(), 0, 0.0
    if (backend or BACKEND) == "numba" and HAVE_NUMBA:
        m, it, d = _neumann_numba(t, q, lam, mh, float(tol), int(maxiter))
        return m, int(it), float(d)
    return _neumann_numpy(t, q, lam, mh, float(tol), int(maxiter))
