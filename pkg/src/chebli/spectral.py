"""Spectral transform against the characters and its Plancherel measure.

Forward transform of a finite measure: ``mu^(k) = int phi_k dmu``.  Inverse
transform of a symbol ``s``: the measure with density
``A(t) int phi_k(t) s(k) W(k) dnu(k)`` where ``W`` is an optional taper.  The
Plancherel density comes from the Jost amplitude, ``1 / (2 pi |gamma(k)|^2)``,
and its overall scale is then fitted so that Gaussian test functions survive
a forward/inverse round trip.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from . import coefficients as co
from . import eigenfunctions as ef
from .measures import CoordinateError, RadialMeasure, total_variation
from .quadrature import lambda_rule, oscillatory_rule

SPEC_VERSION = 1
DEFAULT_CUTOFF = 240.0
DEFAULT_TMAX = 10.0
DEFAULT_UNITARITY_TOL = 1e-3
WINDOWS = ("none", "tukey", "hann")


class ResolutionError(ValueError):
    """Requested sample points lie beyond what the spectral grid resolves."""


class CalibrationError(RuntimeError):
    """A Plancherel spec failed its round-trip check and cannot be used."""


@dataclass(frozen=True, eq=False)
class PlancherelSpec:
    """Spectral grid, quadrature weights and calibrated Plancherel density.

    Attributes
    ----------
    lambda_grid, weights : ndarray
        Quadrature rule on [0, cutoff].
    density : ndarray
        Plancherel density (with respect to ``dk``) at the grid nodes.
    calibration_error : float
        Largest relative L2 round-trip error over the test battery.
    scale : float
        Fitted factor applied to the amplitude-based density (ideally 1).
    t_max : float
        Largest radius the grid resolves.
    """

    lambda_grid: np.ndarray
    weights: np.ndarray
    density: np.ndarray
    calibration_error: float
    model: dict
    cutoff: float
    t_max: float
    scale: float = 1.0
    tolerance: float = DEFAULT_UNITARITY_TOL
    method: str = "jost"
    plancherel_error: float = float("nan")

    @property
    def usable(self):
        return bool(np.isfinite(self.calibration_error) and self.calibration_error <= self.tolerance)

    def require_usable(self):
        if not self.usable:
            raise CalibrationError(
                f"Plancherel spec unusable: round-trip error {self.calibration_error:.3e} "
                f"exceeds tolerance {self.tolerance:.1e}"
            )

    def coefficient_model(self):
        return co.CoefficientModel.from_dict(self.model)

    def mass(self, lo=0.0, hi=np.inf):
        """Plancherel mass of the window [lo, hi]."""
        sel = (self.lambda_grid >= lo) & (self.lambda_grid <= hi)
        return float(np.sum(self.weights[sel] * self.density[sel]))

    def to_dict(self):
        return {
            "version": SPEC_VERSION,
            "model": self.model,
            "cutoff": self.cutoff,
            "t_max": self.t_max,
            "scale": self.scale,
            "tolerance": self.tolerance,
            "method": self.method,
            "calibration_error": self.calibration_error,
            "plancherel_error": self.plancherel_error,
            "usable": self.usable,
            "lambda_grid": self.lambda_grid.tolist(),
            "weights": self.weights.tolist(),
            "density": self.density.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        if int(d.get("version", 0)) != SPEC_VERSION:
            raise ValueError(f"unsupported Plancherel artifact version {d.get('version')!r}")
        return cls(
            np.asarray(d["lambda_grid"], dtype=float),
            np.asarray(d["weights"], dtype=float),
            np.asarray(d["density"], dtype=float),
            float(d["calibration_error"]),
            dict(d["model"]),
            float(d["cutoff"]),
            float(d["t_max"]),
            float(d.get("scale", 1.0)),
            float(d.get("tolerance", DEFAULT_UNITARITY_TOL)),
            str(d.get("method", "jost")),
            float(d.get("plancherel_error", float("nan"))),
        )

    def to_json(self, path):
        from .io import dump_json

        return dump_json(self.to_dict(), path)

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def digest(self):
        from .io import canonical_json

        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class SpectralSymbol:
    """Samples of a symbol on a spectral grid.

    ``kind`` is ``"hypergroup"`` (integrated against the characters) or
    ``"line"`` (integrated against ``exp(ikt)``).  ``source_tv`` is the total
    variation of the measure the symbol came from, when known.
    """

    lambda_grid: np.ndarray
    values: np.ndarray
    provenance: str = "TransformOfMeasure"
    kind: str = "hypergroup"
    label: str = ""
    source_tv: float = field(default=float("nan"))

    def __post_init__(self):
        if self.provenance not in ("TransformOfMeasure", "Injected"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "lambda_grid", np.asarray(self.lambda_grid, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values))

    def scaled(self, c):
        return SpectralSymbol(self.lambda_grid, c * self.values, self.provenance, self.kind,
                              self.label, abs(c) * self.source_tv)

    def __mul__(self, other):
        if isinstance(other, SpectralSymbol):
            if not np.array_equal(self.lambda_grid, other.lambda_grid):
                raise ValueError("symbols live on different grids")
            return SpectralSymbol(self.lambda_grid, self.values * other.values, "TransformOfMeasure",
                                  self.kind, f"{self.label}*{other.label}", self.source_tv * other.source_tv)
        return self.scaled(other)


# ----------------------------------------------------------------------------
# Plancherel density
# ----------------------------------------------------------------------------

def bessel_plancherel(alpha, lams):
    """``k^(2 alpha+1) / (2^(2 alpha) Gamma(alpha+1)^2)`` for the measure ``t^(2 alpha+1) dt``."""
    lams = np.asarray(lams, dtype=float)
    return np.abs(lams) ** (2.0 * alpha + 1.0) / (2.0 ** (2.0 * alpha) * special.gamma(alpha + 1.0) ** 2)


def plancherel_density(model, lams, method="jost", chunk=256):
    """Unscaled Plancherel density ``1 / (2 pi |gamma(k)|^2)``; zero at ``k = 0``."""
    lams = np.abs(np.asarray(lams, dtype=float))
    out = np.zeros_like(lams)
    pos = lams > 1e-12
    if method == "closed" and model.family == "bessel":
        return np.where(pos, bessel_plancherel(model.alpha, lams), 0.0)
    if method == "closed":
        gam = ef.jost_amplitude(model, lams[pos], method="closed")
        out[pos] = 1.0 / (2.0 * np.pi * np.abs(gam) ** 2)
        return out
    if method != "jost":
        raise ValueError(f"unknown density method {method!r}")
    idx = np.nonzero(pos)[0]
    for s in range(0, idx.size, chunk):
        sel = idx[s:s + chunk]
        gam = ef.jost_amplitude(model, lams[sel])
        out[sel] = 1.0 / (2.0 * np.pi * np.abs(gam) ** 2)
    return out


# ----------------------------------------------------------------------------
# transforms
# ----------------------------------------------------------------------------

def _grid_of(grid):
    if isinstance(grid, PlancherelSpec):
        return grid.lambda_grid
    return np.atleast_1d(np.asarray(grid, dtype=float))


def forward_transform(measure, model, grid, chunk=512):
    """Symbol ``k -> int phi_k dmeasure`` (hypergroup coordinate)."""
    if measure.coordinate != "hypergroup":
        raise CoordinateError("forward_transform expects the hypergroup coordinate; use line_transform")
    lams = _grid_of(grid)
    if lams.size == 0:
        raise ValueError("empty spectral grid")
    vals = np.zeros(lams.size, dtype=complex if measure.is_complex else float)
    pts = list(measure.grid) + [a for a, _ in measure.atoms]
    wts = list(measure.weights * measure.density) + [m for _, m in measure.atoms]
    pts = np.asarray(pts, dtype=float)
    wts = np.asarray(wts)
    for s in range(0, lams.size, chunk):
        sl = slice(s, s + chunk)
        try:
            phi = ef.character_matrix(model, lams[sl], pts)
        except ef.CharacterError as exc:
            raise ef.CharacterError(f"{exc} (spectral parameters {lams[sl][0]:.4g}..{lams[sl][-1]:.4g})") from exc
        vals[sl] = phi @ wts
    return SpectralSymbol(lams, vals, "TransformOfMeasure", "hypergroup", source_tv=total_variation(measure))


def line_transform(measure, grid):
    """Symbol ``k -> int exp(ikt) dmeasure(t)`` for a measure on the line."""
    if measure.coordinate != "recentered":
        raise CoordinateError("line_transform expects the recentered coordinate")
    lams = _grid_of(grid)
    pts = np.concatenate([measure.grid, [a for a, _ in measure.atoms]])
    wts = np.concatenate([measure.weights * measure.density, [m for _, m in measure.atoms]])
    vals = np.exp(1j * lams[:, None] * pts[None, :]) @ wts
    return SpectralSymbol(lams, vals, "TransformOfMeasure", "line", source_tv=total_variation(measure))


def window_weights(lams, cutoff, window="tukey"):
    """Spectral taper: ``tukey`` is flat on [0, cutoff/2] then a cos^2 roll-off."""
    x = np.asarray(lams, dtype=float) / cutoff
    if window == "none":
        return np.ones_like(x)
    if window == "tukey":
        return np.where(x <= 0.5, 1.0, np.cos(np.pi * (x - 0.5)) ** 2)
    if window == "hann":
        return np.cos(0.5 * np.pi * np.clip(x, 0.0, 1.0)) ** 2
    raise ValueError(f"unknown window {window!r}; expected one of {WINDOWS}")


def _nodes_and_weights(x_grid):
    if isinstance(x_grid, tuple) and len(x_grid) == 2:
        return np.asarray(x_grid[0], dtype=float), np.asarray(x_grid[1], dtype=float)
    from .quadrature import trapezoid_weights

    x = np.asarray(x_grid, dtype=float)
    return x, trapezoid_weights(x)


def inverse_transform(symbol, spec, model, x_grid, window="tukey", support=None, chunk=512):
    """Measure whose forward transform is ``symbol`` (sampled on ``x_grid``).

    ``x_grid`` is an array (trapezoid weights) or a ``(nodes, weights)`` pair.
    Raises ``ResolutionError`` when the grid reaches beyond ``spec.t_max``.
    """
    spec.require_usable()
    if symbol.kind != "hypergroup":
        raise ValueError("inverse_transform inverts hypergroup symbols")
    if symbol.lambda_grid.shape != spec.lambda_grid.shape or not np.allclose(symbol.lambda_grid, spec.lambda_grid):
        raise ValueError("symbol and spec must share the spectral grid")
    x, w = _nodes_and_weights(x_grid)
    if x.size and (x.max() > spec.t_max * (1 + 1e-9) or x.min() < 0):
        raise ResolutionError(
            f"sample radius {x.max():.4g} exceeds the resolved range {spec.t_max:.4g} of the spectral grid "
            f"(cutoff {spec.cutoff:g}); recalibrate with a larger t_max"
        )
    lams = spec.lambda_grid
    coef = spec.weights * spec.density * window_weights(lams, spec.cutoff, window) * symbol.values
    dens = np.zeros(x.size, dtype=complex if np.iscomplexobj(coef) else float)
    for s in range(0, lams.size, chunk):
        sl = slice(s, s + chunk)
        dens = dens + coef[sl] @ ef.character_matrix(model, lams[sl], x)
    dens = dens * co.A_unchecked(model, x)
    if support is None:
        support = (float(x.min()), float(x.max())) if x.size else (0.0, 0.0)
    return RadialMeasure(support, x, dens, w, (), "hypergroup")


# ----------------------------------------------------------------------------
# calibration
# ----------------------------------------------------------------------------

def gaussian_battery():
    """Radial test functions: centred Gaussians and two off-centre bumps."""
    fns = [(f"gauss(s={s:g})", (lambda t, s=s: np.exp(-(t / s) ** 2))) for s in (0.5, 1.0, 1.5)]
    fns += [(f"bump(c={c:g})", (lambda t, c=c: np.exp(-4.0 * (t - c) ** 2))) for c in (1.0, 2.5)]
    return fns


def round_trip_errors(model, lams, weights, density, battery=None, t_f=8.0, cutoff=None, chunk=512):
    """Return ``(errs, fits, plancherel)`` per test function.

    ``errs`` are relative L2(A dt) errors of inverse(forward(f)), ``fits``
    the per-function least-squares scales, ``plancherel`` the relative defects
    of ``||f||^2 = ||f^||^2``.
    """
    battery = battery or gaussian_battery()
    cutoff = cutoff or float(lams.max())
    t, wt = oscillatory_rule(0.0, t_f, cutoff, extra=model.atoms)
    A = co.A_unchecked(model, t)
    F = np.array([f(t) for _, f in battery])              # (nf, nt)
    fhat = np.zeros((len(battery), lams.size))
    back = np.zeros_like(F)
    mu = weights * density
    for s in range(0, lams.size, chunk):
        sl = slice(s, s + chunk)
        phi = ef.character_matrix(model, lams[sl], t)
        fhat[:, sl] = (F * (wt * A)) @ phi.T
        back += (fhat[:, sl] * mu[sl]) @ phi
    norm2 = np.sum(F * F * wt * A, axis=1)
    inner = np.sum(back * F * wt * A, axis=1)
    bnorm2 = np.sum(back * back * wt * A, axis=1)
    fits = inner / bnorm2
    pl = np.abs(np.sum(fhat**2 * mu, axis=1) / norm2 - 1.0)
    return back, F, wt * A, norm2, inner, bnorm2, fits, pl


def calibrate_plancherel(model, cutoff=DEFAULT_CUTOFF, t_max=DEFAULT_TMAX, tol=DEFAULT_UNITARITY_TOL,
                         method=None, battery=None):
    """Build and calibrate the Plancherel spec of ``model``.

    The density is ``1/(2 pi |gamma|^2)`` (closed form for Bessel, Jost
    amplitude otherwise) times a scale fitted by least squares over the test
    battery; ``calibration_error`` is the worst relative round-trip error with
    that scale.
    """
    if method is None:
        method = "closed" if model.family == "bessel" else "jost"
    lams, w = lambda_rule(cutoff, t_max)
    dens = plancherel_density(model, lams, method)
    back, F, wA, norm2, inner, bnorm2, fits, pl = round_trip_errors(model, lams, w, dens, battery, cutoff=cutoff)
    scale = float(np.sum(inner) / np.sum(bnorm2))
    err = np.sqrt(np.sum((scale * back - F) ** 2 * wA, axis=1) / norm2)
    # the Plancherel identity defect scales with the fitted factor too
    pl_scaled = np.abs((pl + 1.0) * scale - 1.0) if np.all(np.isfinite(pl)) else pl
    return PlancherelSpec(lams, w, scale * dens, float(np.max(err)), model.to_dict(), float(cutoff),
                          float(t_max), scale, float(tol), method, float(np.max(pl_scaled)))


def round_trip_error(spec, model, fn, t_f=8.0):
    """Relative L2(A dt) error of inverse(forward(fn)) without a window."""
    back, F, wA, norm2, *_ = round_trip_errors(model, spec.lambda_grid, spec.weights, spec.density,
                                              [("f", fn)], t_f, cutoff=spec.cutoff)
    return float(np.sqrt(np.sum((back - F) ** 2 * wA, axis=1) / norm2)[0])


def function_measure(model, fn, t_hi, cutoff=DEFAULT_CUTOFF):
    """The measure ``fn(t) A(t) dt`` on [0, t_hi] sampled on an oscillation-resolving rule."""
    t, w = oscillatory_rule(0.0, t_hi, cutoff, extra=model.atoms)
    return RadialMeasure((0.0, t_hi), t, fn(t) * co.A_unchecked(model, t), w, (), "hypergroup")


__all__ = [
    "PlancherelSpec", "SpectralSymbol", "ResolutionError", "CalibrationError", "calibrate_plancherel",
    "forward_transform", "inverse_transform", "line_transform", "plancherel_density", "window_weights",
    "gaussian_battery", "round_trip_error", "function_measure", "bessel_plancherel",
]
