"""Spectral decision procedures: zero sets of symbols, weights and centres.

Every procedure returns a report value; none raises on a negative or
undecided outcome.  Verdicts are only as strong as the numerics behind them:
an upstream ``NotConverged`` always forces ``Inconclusive``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from . import eigenfunctions as ef
from .asymptotics import CONVERGED, asymptotic_measure, limit_measure
from .convolution import product_measure, reflect, weighted_norm
from .spectral import SpectralSymbol, line_transform

STRONG = "StronglyIrregular"
NOT_STRONG = "NotStronglyIrregular"
INCONCLUSIVE = "Inconclusive"
EXCLUDED = "AsymptoticFamilyExcluded"

EQUAL = "Equal"
DIFFERENT = "Different"

DEFAULT_WINDOW = (0.0, 10.0)
EPS_FRACTION = 1e-3
DELTA_FRACTION = 1e-3
DIVERGENCE_SLOPE = 2.0
REFINE = 64  # spline samples per spectral cell when hunting near-zeros

ISOLATED_ZERO_NOTE = (
    "near-zero set is an eps-neighbourhood of isolated zeros; its positive measure "
    "is a property of the eps policy, not of the exact zero set"
)


# ----------------------------------------------------------------------------
# weights
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class WeightSpec:
    """A weight ``omega >= 1``: constant 1, ``(1+t)^s`` or ``exp(a t)``."""

    kind: str = "constant"
    s: float = 0.0
    a: float = 0.0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("constant", "polynomial", "exponential"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "polynomial" and not self.s >= 0:
            raise ValueError("polynomial weight needs s >= 0")
        if kind == "exponential" and not self.a > 0:
            raise ValueError("exponential weight needs a > 0")

    @classmethod
    def constant(cls):
        return cls("constant")

    @classmethod
    def polynomial(cls, s):
        return cls("polynomial", s=float(s))

    @classmethod
    def exponential(cls, a):
        return cls("exponential", a=float(a))

    def evaluate(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        if self.kind == "polynomial":
            return (1.0 + t) ** self.s
        if self.kind == "exponential":
            return np.exp(self.a * t)
        return np.ones_like(t)

    def describe(self):
        if self.kind == "polynomial":
            return f"(1+t)^{self.s:g}"
        if self.kind == "exponential":
            return f"exp({self.a:g} t)"
        return "1"

    def to_dict(self):
        return {"kind": self.kind, "s": self.s, "a": self.a}

    @classmethod
    def from_dict(cls, d):
        return cls(str(d.get("kind", "constant")), float(d.get("s", 0.0)), float(d.get("a", 0.0)))


# ----------------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class DecisionReport:
    verdict: str
    min_abs: float
    near_zero_intervals: tuple
    near_zero_mass: float
    eps: float
    delta: float
    window: tuple
    provenance: str
    label: str = ""
    upstream: tuple = ()
    notes: tuple = ()
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "evidence": {
                "min_abs_symbol": self.min_abs,
                "near_zero_intervals": [list(iv) for iv in self.near_zero_intervals],
                "near_zero_plancherel_mass": self.near_zero_mass,
                "idempotent_indicator_mass": self.near_zero_mass,
            },
            "thresholds": {"eps": self.eps, "delta": self.delta, "window": list(self.window)},
            "symbol": {"provenance": self.provenance, "label": self.label},
            "upstream": list(self.upstream),
            "notes": list(self.notes),
            **({"extra": self.extra} if self.extra else {}),
        }


@dataclass(frozen=True)
class CentreComparison:
    verdict: str
    discrepancy: float
    symmetry_defect: float
    per_x: tuple
    tol: float
    upstream: tuple = ()

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "max_symbol_discrepancy": self.discrepancy,
            "symmetry_defect": self.symmetry_defect,
            "tolerance": self.tol,
            "per_x": [dict(r) for r in self.per_x],
            "upstream": list(self.upstream),
        }


# ----------------------------------------------------------------------------
# injected symbols
# ----------------------------------------------------------------------------

def jacobi_c_symbol(alpha, beta, lams):
    """``1 / (i k c(k))``: the Jacobi c-function with its pole at 0 removed.

    Continuous, bounded for ``alpha = 1/2`` and nowhere zero, since it is an
    exponential of log-gamma terms.
    """
    k = np.asarray(lams, dtype=complex)
    rho = alpha + beta + 1.0
    lg = special.loggamma
    # i k Gamma(i k) = Gamma(1 + i k) keeps k = 0 regular
    log_kc = ((rho - 1j * k) * np.log(2.0) + lg(alpha + 1.0) + lg(1.0 + 1j * k)
              - lg(0.5 * (1j * k + rho)) - lg(0.5 * (1j * k + alpha - beta + 1.0)))
    return np.exp(-log_kc)


INJECTIONS = ("constant", "jacobi-c", "bessel-char")


def injected_symbol(kind, grid, alpha=0.5, beta=0.5, x=1.0, value=1.0):
    """Closed-form symbol on ``grid`` (an array or a spec)."""
    lams = grid.lambda_grid if hasattr(grid, "lambda_grid") else np.asarray(grid, dtype=float)
    if kind == "constant":
        vals, label = np.full(lams.shape, value), f"constant {value}"
    elif kind == "jacobi-c":
        vals, label = jacobi_c_symbol(alpha, beta, lams), f"1/(ik c(k)) alpha={alpha:g} beta={beta:g}"
    elif kind == "bessel-char":
        vals, label = ef.bessel_character(alpha, lams * x), f"phi_k({x:g}) bessel alpha={alpha:g}"
    else:
        raise ValueError(f"unknown injected symbol {kind!r}; expected one of {INJECTIONS}")
    return SpectralSymbol(lams, vals, "Injected", "line", label)


# ----------------------------------------------------------------------------
# zero-set decision
# ----------------------------------------------------------------------------

def _refine(lams, vals, density):
    """Spline |symbol| and density onto a grid REFINE times finer."""
    n = (lams.size - 1) * REFINE + 1
    fine = np.interp(np.linspace(0, lams.size - 1, n), np.arange(lams.size), lams)
    if lams.size < 4:
        absv = np.abs(np.interp(fine, lams, np.abs(vals)))
    else:
        re = CubicSpline(lams, np.real(vals))(fine)
        im = CubicSpline(lams, np.imag(vals))(fine) if np.iscomplexobj(vals) else 0.0
        absv = np.hypot(re, im)
    dens = np.interp(fine, lams, density)
    return fine, absv, dens


def _intervals(fine, mask):
    out = []
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return out
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate([[idx[0]], idx[breaks + 1]])
    ends = np.concatenate([idx[breaks], [idx[-1]]])
    for s, e in zip(starts, ends):
        out.append((float(fine[s]), float(fine[e])))
    return out


def _window_mass(fine, dens, mask=None):
    w = dens if mask is None else np.where(mask, dens, 0.0)
    return float(integrate.trapezoid(w, fine))


def decide_irregularity(symbol, spec, eps=None, delta=None, window=DEFAULT_WINDOW, upstream=()):
    """Classify a symbol by the Plancherel size of its near-zero set.

    Parameters
    ----------
    symbol : SpectralSymbol
        Must live on ``spec.lambda_grid``.
    eps, delta : float, optional
        Defaults are ``1e-3 * sup|symbol|`` and ``1e-3`` times the Plancherel
        mass of the window.
    window : (float, float)
        Spectral range scanned.
    upstream : sequence of str
        Convergence verdicts consumed; any ``NotConverged`` forces
        ``Inconclusive``.
    """
    if not np.array_equal(symbol.lambda_grid, spec.lambda_grid):
        raise ValueError("symbol and Plancherel spec must share one spectral grid")
    lo, hi = float(window[0]), float(min(window[1], spec.lambda_grid[-1]))
    sel = (spec.lambda_grid >= lo) & (spec.lambda_grid <= hi)
    lams, vals, dens = spec.lambda_grid[sel], symbol.values[sel], spec.density[sel]
    fine, absv, fdens = _refine(lams, vals, dens)
    sup = float(np.max(absv)) if absv.size else 0.0
    if eps is None:
        eps = EPS_FRACTION * sup if sup > 0 else EPS_FRACTION
    eps = float(eps)
    delta = DELTA_FRACTION * _window_mass(fine, fdens) if delta is None else float(delta)
    if not (eps > 0 and delta > 0):
        raise ValueError("eps and delta must be positive")
    mask = absv < eps
    ivs = _intervals(fine, mask)
    mass = _window_mass(fine, fdens, mask)
    # single-point dips have no trapezoid width; give them one fine cell
    if ivs and mass == 0.0:
        mass = float(np.sum(fdens[mask]) * (fine[1] - fine[0]))
    min_abs = float(np.min(absv)) if absv.size else float("nan")
    notes = []
    upstream = tuple(upstream)
    if any(u != CONVERGED for u in upstream):
        verdict = INCONCLUSIVE
        notes.append("an upstream convergence report is NotConverged")
    elif min_abs >= eps:
        verdict = STRONG
    elif mass > delta:
        verdict = NOT_STRONG
        if all(b - a < 0.1 * (hi - lo) for a, b in ivs):
            notes.append(ISOLATED_ZERO_NOTE)
    else:
        verdict = INCONCLUSIVE
        notes.append("near-zero set below the delta threshold")
    return DecisionReport(verdict, min_abs, tuple(ivs), mass, eps, delta, (lo, hi), symbol.provenance,
                          symbol.label, upstream, tuple(notes))


# ----------------------------------------------------------------------------
# weights
# ----------------------------------------------------------------------------

class BeurlingError(RuntimeError):
    """A product measure failed while checking the weight inequality."""


def check_beurling(model, spec, w, xy_grid, cap=np.inf, **kw):
    """Largest ``int omega dmu_{x,y} / (omega(x) omega(y))`` over the pairs.

    Returns ``(C_estimate, violations)``; violations are the pairs whose
    ratio exceeds ``cap``, as ``(x, y, ratio)``.
    """
    best = 0.0
    bad = []
    for x, y in xy_grid:
        try:
            mu = product_measure(model, x, y, spec, **kw)
        except Exception as exc:  # annotate, then propagate
            raise BeurlingError(f"product measure at (x={x:g}, y={y:g}) failed: {exc}") from exc
        ratio = float(np.real(mu.integrate(w.evaluate))) / float(w.evaluate(x) * w.evaluate(y))
        best = max(best, ratio)
        if ratio > cap:
            bad.append((float(x), float(y), ratio))
    return best, bad


def _default_y(x):
    base = max(1.0, float(x))
    return [base * c for c in (20.0, 40.0, 80.0, 160.0)]


def weighted_admissibility(model, spec, w, x_compact, y_schedule=_default_y, tol=1e-2,
                           slope_threshold=DIVERGENCE_SLOPE, measures=None, **kw):
    """Weighted norms of ``nu_x`` over a compact and the growth at infinity.

    ``admissible`` means every ``nu_x`` converged and has a finite weighted
    norm.  ``excluded`` flags super-polynomial growth: the log-log slope of
    ``||nu_x||_omega`` against ``x`` over the last doubling exceeds
    ``slope_threshold``.
    """
    xs = [float(v) for v in x_compact]
    norms, verdicts = [], []
    for i, xv in enumerate(xs):
        if measures is not None:
            nu, verdict = measures[i], CONVERGED
        else:
            ys = y_schedule(xv) if callable(y_schedule) else y_schedule
            nu, rep = asymptotic_measure(model, spec, xv, ys, tol, **kw)
            verdict = rep.verdict
        norms.append(weighted_norm(nu, w))
        verdicts.append(verdict)
    inconclusive = any(v != CONVERGED for v in verdicts)
    finite = all(np.isfinite(n) for n in norms)
    slope = float("nan")
    pos = [(x, n) for x, n in zip(xs, norms) if x > 0 and n > 0]
    if len(pos) >= 2 and pos[-1][0] > pos[-2][0]:
        (x1, n1), (x2, n2) = pos[-2], pos[-1]
        slope = float(np.log(n2 / n1) / np.log(x2 / x1))
    excluded = bool(np.isfinite(slope) and slope > slope_threshold) or not finite
    return {
        "admissible": bool(finite and not inconclusive),
        "sup_weighted_norm": float(max(norms)) if norms else float("nan"),
        "excluded": excluded,
        "inconclusive": inconclusive,
        "x": xs,
        "weighted_norms": norms,
        "growth_slope": slope,
        "slope_threshold": slope_threshold,
        "upstream": verdicts,
        "weight": w.describe(),
    }


def decide_weighted(model, spec, w, symbol, admissibility=None, x_compact=(1.0, 2.0, 4.0, 8.0),
                    beurling=None, eps=None, delta=None, window=DEFAULT_WINDOW, upstream=(), **kw):
    """Weighted decision: exclusion first, then the zero-set criterion.

    ``admissibility`` may be supplied (e.g. granted for an injected symbol);
    otherwise it is computed on ``x_compact``.  ``beurling`` is an optional
    ``(C, violations)`` pair recorded in the report; an infinite ``C`` makes
    the run inconclusive.
    """
    if w.kind == "constant":
        return decide_irregularity(symbol, spec, eps, delta, window, upstream)
    if admissibility is None:
        admissibility = weighted_admissibility(model, spec, w, x_compact, **kw)
    extra = {"weight": w.to_dict(), "admissibility": admissibility}
    if beurling is not None:
        extra["beurling_constant"] = beurling[0]
        extra["beurling_violations"] = [list(v) for v in beurling[1]]
    if admissibility.get("excluded"):
        return DecisionReport(EXCLUDED, float("nan"), (), float("nan"), float("nan"), float("nan"),
                              tuple(window), symbol.provenance, symbol.label, tuple(upstream),
                              ("weighted norms of nu_x grow too fast for nu_inf to lie in the weighted space",),
                              extra)
    ups = tuple(upstream) + tuple(admissibility.get("upstream", ()))
    rep = decide_irregularity(symbol, spec, eps, delta, window, ups)
    notes = rep.notes
    if beurling is not None and not np.isfinite(beurling[0]):
        notes = notes + ("weight inequality constant is not finite",)
        rep = DecisionReport(INCONCLUSIVE, rep.min_abs, rep.near_zero_intervals, rep.near_zero_mass, rep.eps,
                             rep.delta, rep.window, rep.provenance, rep.label, rep.upstream, notes, extra)
        return rep
    return DecisionReport(rep.verdict, rep.min_abs, rep.near_zero_intervals, rep.near_zero_mass, rep.eps,
                          rep.delta, rep.window, rep.provenance, rep.label, rep.upstream, notes, extra)


def decide_limit(model, spec, x_schedule, y_schedule, tol=1e-2, eps=None, delta=None, window=DEFAULT_WINDOW,
                 **kw):
    """Run ``limit_measure`` and decide on the line transform of ``nu_inf``.

    Returns ``(DecisionReport, ConvergenceReport)``.  Without a limit the
    report is ``Inconclusive`` and carries an identically zero placeholder
    symbol.
    """
    nu_inf, rep = limit_measure(model, spec, x_schedule, y_schedule, tol, **kw)
    if nu_inf is None:
        sym = SpectralSymbol(spec.lambda_grid, np.zeros(spec.lambda_grid.size), "TransformOfMeasure", "line",
                             "nu_inf (not available)")
    else:
        sym = line_transform(nu_inf, spec.lambda_grid)
    return decide_irregularity(sym, spec, eps, delta, window, (rep.verdict,)), rep


# ----------------------------------------------------------------------------
# centres
# ----------------------------------------------------------------------------

def centre_discrepancy(nu_left, lams):
    """``(sup|L^ - R^|, sup|Im L^|)`` with ``R = reflect(L)``."""
    a = line_transform(nu_left, lams).values
    b = line_transform(reflect(nu_left), lams).values
    return float(np.max(np.abs(a - b))), float(np.max(np.abs(np.imag(a))))


def compare_centres(model, spec, x_list, y_schedule=_default_y, tol=1e-3, lams=None, cauchy_tol=1e-2,
                    measures=None, **kw):
    """Compare the line symbols of the left and right asymptotic measures.

    ``measures`` (one left measure per ``x``) bypasses the asymptotic scan.
    """
    lams = np.linspace(0.0, DEFAULT_WINDOW[1], 401) if lams is None else np.asarray(lams, dtype=float)
    rows, ups = [], []
    for i, xv in enumerate(x_list):
        if measures is not None:
            nu, verdict, pair = measures[i], CONVERGED, ()
        else:
            ys = y_schedule(xv) if callable(y_schedule) else y_schedule
            nu, rep = asymptotic_measure(model, spec, xv, ys, cauchy_tol, **kw)
            verdict, pair = rep.verdict, rep.pairwise
        disc, sym = centre_discrepancy(nu, lams)
        rows.append({"x": float(xv), "discrepancy": disc, "symmetry_defect": sym, "verdict": verdict,
                     "pairwise_distances": list(pair)})
        ups.append(verdict)
    disc = max(r["discrepancy"] for r in rows)
    sym = max(r["symmetry_defect"] for r in rows)
    if any(u != CONVERGED for u in ups):
        verdict = INCONCLUSIVE
    elif disc <= tol:
        verdict = EQUAL
    elif disc > 10.0 * tol:
        verdict = DIFFERENT
    else:
        verdict = INCONCLUSIVE
    return CentreComparison(verdict, disc, sym, tuple(rows), tol, tuple(ups))


__all__ = [
    "WeightSpec", "DecisionReport", "CentreComparison", "BeurlingError", "decide_irregularity",
    "check_beurling", "weighted_admissibility", "decide_weighted", "decide_limit", "compare_centres",
    "centre_discrepancy", "injected_symbol", "jacobi_c_symbol", "INJECTIONS", "STRONG", "NOT_STRONG",
    "INCONCLUSIVE", "EXCLUDED", "EQUAL", "DIFFERENT", "DEFAULT_WINDOW",
]
