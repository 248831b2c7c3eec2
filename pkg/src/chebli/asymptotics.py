"""Recentred convolution families and their L1 limits.

``nu_left(x, y)`` is ``mu_{x,y}`` translated by ``-y`` onto the line and
``nu_right`` its reflection.  ``asymptotic_measure`` scans ``y`` and returns
``nu_x`` with a Cauchy report; ``limit_measure`` repeats the scan in ``x``.
Neither function ever invents a limit: when the Cauchy test fails the
verdict is ``NotConverged`` and the distance trace is returned as evidence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .convolution import add_measures, l1_distance, product_measure, recentre, reflect, total_variation
from .measures import RadialMeasure

CONVERGED = "Converged"
NOT_CONVERGED = "NotConverged"


@dataclass(frozen=True)
class ConvergenceReport:
    """Cauchy diagnostics of a measure family.

    ``pairwise`` are distances between consecutive iterates and
    ``to_limit`` distances of each iterate to the returned limit.  ``rate`` is
    the fitted exponent ``p`` of ``d ~ C s^-p`` (``nan`` when undefined).
    """

    parameter: str
    schedule: tuple
    pairwise: tuple
    to_limit: tuple
    verdict: str
    rate: float
    tolerance: float
    truncation_radius: float
    tail_mass: float
    notes: tuple = field(default=())

    @property
    def converged(self):
        return self.verdict == CONVERGED

    def to_dict(self):
        return {
            "parameter": self.parameter,
            "schedule": list(self.schedule),
            "pairwise_distances": list(self.pairwise),
            "distances_to_limit": list(self.to_limit),
            "verdict": self.verdict,
            "rate_estimate": self.rate,
            "tolerance": self.tolerance,
            "truncation_radius": self.truncation_radius,
            "tail_mass": self.tail_mass,
            "notes": list(self.notes),
        }


def nu_left(model, spec, x, y, **kw):
    """``tau_{-y} mu_{x,y}`` on the line."""
    if not y > x >= 0:
        raise ValueError(f"nu_left needs y > x >= 0, got x={x}, y={y}")
    return recentre(product_measure(model, x, y, spec, **kw), y)


def nu_right(model, spec, x, y, **kw):
    """Reflection of ``nu_left``."""
    return reflect(nu_left(model, spec, x, y, **kw))


# L1 distances between unit-mass iterates below this are rounding, not a trend
NOISE_FLOOR = 1e-12


def _cauchy_verdict(pairwise, tol):
    if not pairwise:
        return CONVERGED
    last_ok = pairwise[-1] < tol
    tail = pairwise[-3:]
    monotone = all(b <= max(a * (1 + 1e-9), NOISE_FLOOR) for a, b in zip(tail[:-1], tail[1:]))
    return CONVERGED if (last_ok and monotone) else NOT_CONVERGED


def _fit_rate(sched, dists):
    """Exponent ``p`` of ``d_k = C |s_k^-p - s_{k+1}^-p|`` by least squares in log space.

    ``sched`` has one more entry than ``dists``.
    """
    s = np.asarray(sched, dtype=float)
    d = np.asarray(dists, dtype=float)
    ok = (d > NOISE_FLOOR) & np.isfinite(d) & (s[:-1] > 0) & (s[1:] > s[:-1])
    if ok.sum() < 2:
        return float("nan")
    lo, hi, ld = s[:-1][ok], s[1:][ok], np.log(d[ok])

    def resid(p):
        model = np.log(lo**-p - hi**-p)
        r = ld - model
        return float(np.sum((r - r.mean()) ** 2))

    res = optimize.minimize_scalar(resid, bounds=(0.05, 8.0), method="bounded", options={"xatol": 1e-6})
    return float(res.x)


def _extrapolate(m_prev, m_last, s_prev, s_last, p):
    """Richardson step assuming ``nu_s = nu + C s^-p``."""
    if not np.isfinite(p) or p <= 0 or s_prev == s_last:
        return m_last
    a, b = s_last**p, s_prev**p
    return add_measures([(a / (a - b), m_last), (-b / (a - b), m_prev)], m_last.coordinate)


def _polynomial_limit(its, sched, order):
    """Value at ``1/s = 0`` of the polynomial in ``1/s`` through the last iterates."""
    h = [1.0 / v for v in sched[-(order + 1):]]
    w = [float(np.prod([h[j] / (h[j] - h[i]) for j in range(len(h)) if j != i])) for i in range(len(h))]
    return add_measures(list(zip(w, its[-(order + 1):])), its[-1].coordinate)


EXTRAPOLATIONS = ("polynomial", "power", "none")
DEFAULT_ORDER = 3


def _tail(measures, tol):
    """Smallest radius with all iterates' mass outside below tol/3."""
    radius = 0.0
    worst = 0.0
    for m in measures:
        lo, hi = m.support
        radius = max(radius, abs(lo), abs(hi), max((abs(a) for a, _ in m.atoms), default=0.0))
    for m in measures:
        if m.grid.size:
            out = np.abs(m.grid) > radius
            worst = max(worst, float(np.sum(m.weights[out] * np.abs(m.density[out]))))
    return radius, worst


def asymptotic_measure(model, spec, x, schedule, tol=1e-2, extrapolate="polynomial", order=DEFAULT_ORDER,
                       **kw):
    """``nu_x = lim_y tau_{-y} mu_{x,y}`` with its convergence report.

    Parameters
    ----------
    extrapolate : {"polynomial", "power", "none"}
        ``polynomial`` evaluates at ``1/y = 0`` the polynomial in ``1/y``
        through the last ``order + 1`` iterates; ``power`` is a two-point
        Richardson step with the fitted rate; ``none`` returns the last
        iterate.

    Distances to the limit are reported alongside the pairwise Cauchy
    distances; the verdict uses the pairwise ones only.
    """
    if extrapolate is True:
        extrapolate = "polynomial"
    elif extrapolate is False:
        extrapolate = "none"
    if extrapolate not in EXTRAPOLATIONS:
        raise ValueError(f"unknown extrapolation {extrapolate!r}; expected one of {EXTRAPOLATIONS}")
    sched = tuple(float(y) for y in schedule)
    if len(sched) < 4:
        raise ValueError("schedule needs at least 4 points")
    if any(b <= a for a, b in zip(sched[:-1], sched[1:])):
        raise ValueError("schedule must be strictly increasing")
    if x == 0:
        d0 = RadialMeasure.dirac(0.0, coordinate="recentered")
        zeros = tuple(0.0 for _ in sched)
        return d0, ConvergenceReport("y", sched, zeros[1:], zeros, CONVERGED, float("nan"), tol, 0.0, 0.0)
    its = [nu_left(model, spec, x, y, **kw) for y in sched]
    pair = tuple(l1_distance(a, b) for a, b in zip(its[:-1], its[1:]))
    verdict = _cauchy_verdict(pair, tol)
    rate = _fit_rate(sched, pair)
    if extrapolate == "polynomial":
        limit = _polynomial_limit(its, sched, max(1, min(int(order), len(its) - 1)))
    elif extrapolate == "power":
        limit = _extrapolate(its[-2], its[-1], sched[-2], sched[-1], rate)
    else:
        limit = its[-1]
    to_lim = tuple(l1_distance(m, limit) for m in its)
    radius, tail_mass = _tail(its, tol)
    notes = ()
    if verdict == CONVERGED and tail_mass >= tol / 3:
        verdict = NOT_CONVERGED
        notes = ("tail mass outside the truncation radius exceeds tol/3",)
    return limit, ConvergenceReport("y", sched, pair, to_lim, verdict, rate, tol, radius, tail_mass, notes)


def limit_measure(model, spec, x_schedule, y_schedule, tol=1e-2, **kw):
    """Cauchy scan of ``nu_x`` over ``x_schedule``.

    Returns ``(nu_inf or None, report)``; ``None`` stands for NotConverged.
    ``y_schedule`` is either one schedule used for every ``x`` or a callable
    ``x -> schedule``.
    """
    xs = tuple(float(v) for v in x_schedule)
    if any(b < a for a, b in zip(xs[:-1], xs[1:])):
        raise ValueError("x_schedule must be nondecreasing")
    notes = []
    nus = []
    for xv in xs:
        ys = y_schedule(xv) if callable(y_schedule) else y_schedule
        nu, rep = asymptotic_measure(model, spec, xv, ys, tol, **kw)
        if not rep.converged:
            notes.append(f"nu_x at x={xv:g} did not converge in y (last distance {rep.pairwise[-1]:.3e})")
        nus.append(nu)
    pair = tuple(l1_distance(a, b) for a, b in zip(nus[:-1], nus[1:]))
    verdict = _cauchy_verdict(pair, tol)
    if notes:
        verdict = NOT_CONVERGED
    radius, tail_mass = _tail(nus, tol)
    rate = _fit_rate(xs, pair) if len(set(xs)) > 1 else float("nan")
    limit = nus[-1] if verdict == CONVERGED else None
    to_lim = tuple(l1_distance(m, limit) for m in nus) if limit is not None else ()
    rep = ConvergenceReport("x", xs, pair, to_lim, verdict, rate, tol, radius, tail_mass, tuple(notes))
    return limit, rep


__all__ = ["ConvergenceReport", "EXTRAPOLATIONS", "nu_left", "nu_right", "asymptotic_measure", "limit_measure",
           "CONVERGED", "NOT_CONVERGED", "total_variation"]
