"""Discretised finite measures on an interval: sampled density plus atoms."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .quadrature import trapezoid_weights

COORDINATES = ("hypergroup", "recentered")


class CoordinateError(ValueError):
    """Operation applied to a measure in the wrong coordinate."""


@dataclass(frozen=True, eq=False)
class RadialMeasure:
    """A finite signed measure ``density(t) dt + sum m_k delta_{a_k}``.

    ``weights`` integrate against ``density``: ``int g dmu`` is approximated by
    ``sum(weights * density * g(grid))`` plus the atoms.  Weights need not be
    trapezoidal; product measures carry Gauss-Jacobi weights that absorb
    endpoint singularities of the density.
    """

    support: tuple
    grid: np.ndarray
    density: np.ndarray
    weights: np.ndarray
    atoms: tuple = ()
    coordinate: str = "hypergroup"

    def __post_init__(self):
        if self.coordinate not in COORDINATES:
            raise CoordinateError(f"unknown coordinate {self.coordinate!r}")
        g = np.asarray(self.grid, dtype=float)
        d = np.asarray(self.density)
        w = np.asarray(self.weights, dtype=float)
        if not (g.shape == d.shape == w.shape):
            raise ValueError("grid, density and weights must share one shape")
        if g.size > 1 and np.any(np.diff(g) < 0):
            raise ValueError("grid must be nondecreasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "density", d)
        object.__setattr__(self, "weights", w)
        atoms = tuple(sorted((float(a), complex(m) if np.iscomplexobj(m) else float(m)) for a, m in self.atoms))
        object.__setattr__(self, "atoms", atoms)
        lo, hi = self.support
        object.__setattr__(self, "support", (float(lo), float(hi)))

    # -- constructors ---------------------------------------------------------
    @classmethod
    def dirac(cls, at=0.0, mass=1.0, coordinate="hypergroup"):
        return cls((at, at), np.zeros(0), np.zeros(0), np.zeros(0), ((at, mass),), coordinate)

    @classmethod
    def from_samples(cls, grid, density, coordinate="hypergroup", atoms=(), weights=None, support=None):
        grid = np.asarray(grid, dtype=float)
        w = trapezoid_weights(grid) if weights is None else np.asarray(weights, dtype=float)
        if support is None:
            locs = [a for a, _ in atoms]
            support = (min([grid[0]] + locs), max([grid[-1]] + locs)) if grid.size else (min(locs), max(locs))
        return cls(support, grid, np.asarray(density), w, tuple(atoms), coordinate)

    # -- basic functionals ----------------------------------------------------
    @property
    def is_complex(self):
        return np.iscomplexobj(self.density) or any(isinstance(m, complex) for _, m in self.atoms)

    def integrate(self, fn):
        """``int fn dmu`` for a vectorised ``fn``."""
        val = np.sum(self.weights * self.density * fn(self.grid)) if self.grid.size else 0.0
        for a, m in self.atoms:
            val = val + m * fn(np.array([a]))[0]
        return val

    def atom_mass(self):
        return sum(m for _, m in self.atoms)

    def with_density(self, density):
        return RadialMeasure(self.support, self.grid, density, self.weights, self.atoms, self.coordinate)


def total_mass(mu):
    """Signed total mass ``mu(R)``."""
    return mu.integrate(np.ones_like)


def total_variation(mu):
    dens = np.sum(mu.weights * np.abs(mu.density)) if mu.grid.size else 0.0
    return float(dens + sum(abs(m) for _, m in mu.atoms))


def recentre(mu, y):
    """Translate a hypergroup-coordinate measure by ``-y`` onto the line."""
    if mu.coordinate != "hypergroup":
        raise CoordinateError("recentre expects a measure in the hypergroup coordinate")
    lo, hi = mu.support
    return RadialMeasure((lo - y, hi - y), mu.grid - y, mu.density, mu.weights,
                         tuple((a - y, m) for a, m in mu.atoms), "recentered")


def reflect(mu):
    """Image under ``t -> -t`` (recentered coordinate only)."""
    if mu.coordinate != "recentered":
        raise CoordinateError("reflection is defined on the line (recentered coordinate)")
    lo, hi = mu.support
    return RadialMeasure((-hi, -lo), -mu.grid[::-1], mu.density[::-1], mu.weights[::-1],
                         tuple((-a, m) for a, m in mu.atoms), "recentered")


def _segment_abs(h, d0, d1):
    """Exact integral of |linear| over cells with end values d0, d1 (may be complex)."""
    if np.iscomplexobj(d0) or np.iscomplexobj(d1):
        # Simpson on the modulus; complex measures are internal only
        mid = np.abs(0.5 * (d0 + d1))
        return h * (np.abs(d0) + 4.0 * mid + np.abs(d1)) / 6.0
    a0, a1 = np.abs(d0), np.abs(d1)
    same = d0 * d1 >= 0
    tot = a0 + a1
    safe = np.where(tot > 0, tot, 1.0)
    return np.where(same, 0.5 * h * tot, 0.5 * h * (d0 * d0 + d1 * d1) / safe)


def _interp(mu, x):
    """Density extended flat to the support edges and by zero outside."""
    if mu.grid.size == 0:
        return np.zeros_like(x)
    lo, hi = mu.support
    inside = (x >= lo) & (x <= hi)
    if np.iscomplexobj(mu.density):
        val = np.interp(x, mu.grid, mu.density.real) + 1j * np.interp(x, mu.grid, mu.density.imag)
    else:
        val = np.interp(x, mu.grid, mu.density)
    return np.where(inside, val, 0.0)


def l1_distance(mu, rho, atol=1e-12):
    """``||mu - rho||_1`` on the union grid (linear interpolation) plus atom mismatch."""
    if mu.coordinate != rho.coordinate:
        raise CoordinateError("l1_distance needs both measures in one coordinate")
    pts = [mu.grid, rho.grid]
    for m in (mu, rho):
        if m.grid.size:
            lo, hi = m.support
            eps = 1e-12 * max(1.0, abs(lo), abs(hi))
            pts.append(np.array([lo - eps, lo, hi, hi + eps]))
    x = np.unique(np.concatenate(pts)) if pts else np.zeros(0)
    dist = 0.0
    if x.size > 1:
        d = _interp(mu, x) - _interp(rho, x)
        dist = float(np.sum(_segment_abs(np.diff(x), d[:-1], d[1:])))
    left = list(rho.atoms)
    for a, m in mu.atoms:
        hit = next((i for i, (b, _) in enumerate(left) if abs(a - b) <= atol * max(1.0, abs(a))), None)
        if hit is None:
            dist += abs(m)
        else:
            dist += abs(m - left.pop(hit)[1])
    dist += sum(abs(m) for _, m in left)
    return dist


def weighted_norm(mu, w):
    """``int omega d|mu|``; on the line the weight is evaluated at ``|t|``."""
    ev = w.evaluate if hasattr(w, "evaluate") else w
    arg = np.abs if mu.coordinate == "recentered" else (lambda t: t)
    dens = np.sum(mu.weights * np.abs(mu.density) * ev(arg(mu.grid))) if mu.grid.size else 0.0
    return float(dens + sum(abs(m) * float(ev(arg(np.array([a])))[0]) for a, m in mu.atoms))


def write_measure_csv(mu, path):
    """Write ``(coordinate, t, density)`` rows and a ``(t, mass)`` atoms sidecar.

    Returns the two paths.  Complex densities are written by their real part.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["coordinate", "t", "density"])
        for t, d in zip(mu.grid, np.real(mu.density)):
            wr.writerow([mu.coordinate, f"{t:.12e}", f"{d:.12e}"])
    side = path.with_name(path.stem + "_atoms.csv")
    with side.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", "mass"])
        for a, m in mu.atoms:
            wr.writerow([f"{a:.12e}", f"{np.real(m):.12e}"])
    return path, side


def read_measure_csv(path):
    path = Path(path)
    rows = list(csv.DictReader(path.open()))
    coord = rows[0]["coordinate"] if rows else "hypergroup"
    grid = np.array([float(r["t"]) for r in rows])
    dens = np.array([float(r["density"]) for r in rows])
    side = path.with_name(path.stem + "_atoms.csv")
    atoms = ()
    if side.exists():
        atoms = tuple((float(r["t"]), float(r["mass"])) for r in csv.DictReader(side.open()))
    return RadialMeasure.from_samples(grid, dens, coord, atoms)
