"""Sturm-Liouville coefficients for Chebli-Trimeche hypergroups.

A coefficient ``A`` generates the operator ``L f = -(A f')'/A`` on (0, inf).
The catalog holds the Bessel-Kingman family ``A = x^(2a+1)``, the Jacobi
family ``A = sinh^(2a+1) cosh^(2b+1)`` and Bessel coefficients with finitely
many upward steps ``c_k 1_[a_k, inf)``.

The solvers work in Liouville normal form: with ``u = A^(-1/2) v`` the
eigenvalue equation ``L u = (k^2 + q_inf) u`` becomes ``v'' + (k^2 - Q) v = 0``
where ``Q = (sqrt A)''/sqrt A - q_inf`` on every smooth piece and
``q_inf = lim q`` (``rho^2`` for Jacobi, zero otherwise).  At a step of ``A``
the solution obeys the flux conditions ``u`` and ``A u'`` continuous, which in
the ``v`` variables is the unimodular matrix returned by ``interface_matrix``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from .quadrature import QuadratureError, adaptive_quad

FAMILIES = ("bessel", "jacobi", "perturbed_bessel")
DEFAULT_FLOOR = 1e-3


class DomainError(ValueError):
    """Evaluation requested left of the model's domain floor."""


@dataclass(frozen=True)
class CoefficientModel:
    family: str
    alpha: float
    beta: float = 0.0
    steps: tuple = ()
    domain_floor: float = DEFAULT_FLOOR

    def __post_init__(self):
        fam = self.family.lower().replace("-", "_")
        if fam == "perturbedbessel":
            fam = "perturbed_bessel"
        if fam not in FAMILIES:
            raise ValueError(f"family: unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "family", fam)
        if not self.alpha > -0.5:
            raise ValueError(f"alpha: must exceed -1/2, got {self.alpha}")
        if fam == "jacobi" and not self.beta > -0.5:
            raise ValueError(f"beta: must exceed -1/2, got {self.beta}")
        if not self.domain_floor > 0:
            raise ValueError("domain_floor: must be positive")
        steps = tuple(sorted((float(a), float(c)) for a, c in self.steps))
        if steps and fam != "perturbed_bessel":
            raise ValueError("steps: only the perturbed_bessel family carries steps")
        for a, c in steps:
            if not a > self.domain_floor:
                raise ValueError(f"steps: location {a} must lie right of the domain floor")
            if not c > 0:
                # downward steps would break monotonicity of A
                raise ValueError(f"steps: height {c} must be positive")
        if len({a for a, _ in steps}) != len(steps):
            raise ValueError("steps: locations must be distinct")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta) if fam == "jacobi" else 0.0)

    # -- convenience constructors -------------------------------------------------
    @classmethod
    def bessel(cls, alpha, domain_floor=DEFAULT_FLOOR):
        return cls("bessel", alpha, domain_floor=domain_floor)

    @classmethod
    def jacobi(cls, alpha, beta, domain_floor=DEFAULT_FLOOR):
        return cls("jacobi", alpha, beta, domain_floor=domain_floor)

    @classmethod
    def perturbed_bessel(cls, alpha, steps, domain_floor=DEFAULT_FLOOR):
        return cls("perturbed_bessel", alpha, steps=tuple(steps), domain_floor=domain_floor)

    @property
    def rho(self):
        """Half the exponential growth rate of ``A`` (Jacobi only)."""
        return self.alpha + self.beta + 1.0 if self.family == "jacobi" else 0.0

    @property
    def spectral_shift(self):
        """``q_inf``: the eigenvalue of the character ``phi_k`` is ``k^2 + q_inf``."""
        return self.rho**2

    @property
    def atoms(self):
        return tuple(a for a, _ in self.steps)

    def describe(self):
        if self.family == "bessel":
            return f"Bessel(alpha={self.alpha:g})"
        if self.family == "jacobi":
            return f"Jacobi(alpha={self.alpha:g}, beta={self.beta:g})"
        st = ", ".join(f"({a:g}, {c:g})" for a, c in self.steps)
        return f"PerturbedBessel(alpha={self.alpha:g}, steps=[{st}])"

    def to_dict(self):
        return {
            "family": self.family,
            "alpha": self.alpha,
            "beta": self.beta,
            "steps": [list(s) for s in self.steps],
            "domain_floor": self.domain_floor,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            d["family"],
            float(d["alpha"]),
            float(d.get("beta", 0.0)),
            tuple(tuple(s) for s in d.get("steps", ())),
            float(d.get("domain_floor", DEFAULT_FLOOR)),
        )


@dataclass(frozen=True)
class BVDerivative:
    """Lebesgue decomposition of ``A'``: a density plus point masses."""

    ac_density: Callable
    atoms: tuple
    tail_variation: Callable = field(repr=False)


# ----------------------------------------------------------------------------
# evaluation
# ----------------------------------------------------------------------------

def _step_sum(model, x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for a, c in model.steps:
        out = out + np.where(x >= a, c, 0.0)
    return out


def log_A(model, x):
    """``log A(x)`` for ``x > 0`` without the domain check (overflow-safe)."""
    x = np.asarray(x, dtype=float)
    p = 2.0 * model.alpha + 1.0
    with np.errstate(divide="ignore"):
        if model.family == "jacobi":
            r = 2.0 * model.beta + 1.0
            # log sinh x = x + log1p(-e^{-2x}) - log 2
            ax = np.abs(x)
            lsinh = ax + np.log1p(-np.exp(-2.0 * ax)) - np.log(2.0)
            lcosh = ax + np.log1p(np.exp(-2.0 * ax)) - np.log(2.0)
            return p * lsinh + r * lcosh
        base = p * np.log(x)
        if model.steps:
            return np.log(np.exp(base) + _step_sum(model, x))
        return base


def A_unchecked(model, x):
    """``A(x)`` for any ``x >= 0`` (``A(0) = 0`` for the catalog)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        if model.family == "jacobi":
            return np.where(x > 0, np.exp(log_A(model, np.maximum(x, 1e-300))), 0.0)
        return np.power(np.maximum(x, 0.0), 2.0 * model.alpha + 1.0) + _step_sum(model, x)


def eval_A(model, x):
    """Evaluate ``A`` at ``x >= domain_floor`` (scalar or array)."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < model.domain_floor):
        raise DomainError(
            f"A evaluated at {float(np.min(xa))} below the domain floor {model.domain_floor}"
        )
    out = A_unchecked(model, xa)
    return float(out) if np.ndim(x) == 0 else out


def A_prime(model, x):
    """Absolutely continuous part of ``A'`` (right-continuous at steps)."""
    x = np.asarray(x, dtype=float)
    p = 2.0 * model.alpha + 1.0
    if model.family == "jacobi":
        r = 2.0 * model.beta + 1.0
        return A_unchecked(model, x) * (p / np.tanh(x) + r * np.tanh(x))
    return p * np.power(x, p - 1.0)


def bv_derivative(model):
    atoms = tuple((a, c) for a, c in model.steps)
    return BVDerivative(partial(A_prime, model), atoms, partial(tail_bv, model))


def effective_potential(model, x):
    """Liouville potential ``Q = (sqrt A)''/sqrt A - q_inf`` on the smooth pieces."""
    x = np.asarray(x, dtype=float)
    a, b = model.alpha, model.beta
    if model.family == "bessel":
        return (a * a - 0.25) / (x * x)
    if model.family == "jacobi":
        e = np.exp(-2.0 * np.abs(x))
        # 1/sinh^2 and 1/cosh^2 written without overflow
        return 4.0 * e * ((a * a - 0.25) / (1.0 - e) ** 2 - (b * b - 0.25) / (1.0 + e) ** 2)
    p = 2.0 * a + 1.0
    xp = np.power(x, p)
    big = xp + _step_sum(model, x)
    d1 = p * xp / x
    d2 = p * (p - 1.0) * xp / (x * x)
    return d2 / (2.0 * big) - d1 * d1 / (4.0 * big * big)


def sqrtA_and_derivative(model, x):
    """``(sqrt A, (sqrt A)')`` from the smooth piece containing ``x`` (right limits at steps)."""
    x = np.asarray(x, dtype=float)
    s = np.exp(0.5 * log_A(model, x))
    return s, 0.5 * A_prime(model, x) / s


def interface_matrix(model, a):
    """Map ``(v, v')`` at ``a-0`` to ``a+0`` across the step at ``a``.

    Derived from continuity of ``u`` and of the flux ``A u'``; unimodular, so
    Wronskians of ``v``-solutions are preserved.
    """
    p = 2.0 * model.alpha + 1.0
    base = a**p
    below = base + sum(c for b, c in model.steps if b < a)
    above = below + sum(c for b, c in model.steps if b == a)
    dA = p * a ** (p - 1.0)
    sm, sp = np.sqrt(below), np.sqrt(above)
    dsm, dsp = 0.5 * dA / sm, 0.5 * dA / sp
    return np.array([[sp / sm, 0.0], [dsp / sm - dsm / sp, sm / sp]])


def atom_strength(model, a):
    """Normalised size of the step at ``a``: ``c / A(a-0)``."""
    p = 2.0 * model.alpha + 1.0
    below = a**p + sum(c for b, c in model.steps if b < a)
    return sum(c for b, c in model.steps if b == a) / below


# ----------------------------------------------------------------------------
# phase and tail variation
# ----------------------------------------------------------------------------

def phase(model, x, rtol=1e-10):
    """``int_{x0}^{x} A(t)^(-1/2) dt`` with ``x0`` the model's domain floor."""
    if np.ndim(x):
        return np.array([phase(model, xi, rtol) for xi in np.asarray(x, dtype=float).ravel()]).reshape(
            np.shape(x)
        )
    x = float(x)
    x0 = model.domain_floor
    if x < x0:
        raise DomainError(f"phase evaluated at {x} below the domain floor {x0}")
    if x == x0:
        return 0.0

    def integrand(t):
        return float(np.exp(-0.5 * log_A(model, t)))

    return adaptive_quad(integrand, x0, x, rtol=rtol, points=model.atoms)


def tail_bv(model, x0, rtol=1e-10):
    """Total variation of the Liouville potential measure on [x0, inf).

    Absolutely continuous part ``int |Q|`` plus ``c_k / A(a_k - 0)`` for every
    step at ``a_k >= x0``.  Returns ``inf`` when the tail integral cannot be
    converged.
    """
    x0 = float(x0)
    if x0 < model.domain_floor:
        raise DomainError(f"tail_bv requested at {x0} below the domain floor")
    a = model.alpha
    if model.family == "bessel":
        return abs(a * a - 0.25) / x0
    atoms = sum(atom_strength(model, s) for s, _ in model.steps if s >= x0)

    def integrand(t):
        return float(abs(effective_potential(model, t)))

    try:
        if model.family == "jacobi" and abs(a * a - 0.25) < 1e-15 and abs(model.beta**2 - 0.25) < 1e-15:
            return 0.0
        cuts = [s for s in model.atoms if s > x0]
        edges = [x0] + cuts + [np.inf]
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += adaptive_quad(integrand, lo, hi, rtol=rtol)
    except QuadratureError:
        return np.inf
    return total + atoms
