import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chebli import coefficients as co

from .conftest import CATALOG

# frozen from a 30-digit mpmath evaluation
SINH_COSH_SQUARED_AT_1 = 3.2885291045020608
STEP_TAIL_AT_3 = 0.026149947019518154  # int_3^inf 3/(t^2+3)^2 dt
STEP_PHASE_AT_5 = 8.396267920765988


def test_eval_a_bessel_half():
    assert co.eval_A(co.CoefficientModel.bessel(0.5), 2.0) == pytest.approx(4.0, rel=1e-15)


def test_eval_a_jacobi_half_half():
    m = co.CoefficientModel.jacobi(0.5, 0.5)
    assert co.eval_A(m, 1.0) == pytest.approx(SINH_COSH_SQUARED_AT_1, rel=1e-14)


def test_eval_a_step_jump():
    m = co.CoefficientModel.perturbed_bessel(0.5, [(2.0, 3.0)])
    assert co.eval_A(m, 2.0 - 1e-9) == pytest.approx(4.0, abs=1e-8)
    assert co.eval_A(m, 2.0) == 7.0


def test_eval_a_domain_error():
    m = co.CoefficientModel.bessel(0.0)
    with pytest.raises(co.DomainError):
        co.eval_A(m, 1e-4)


def test_jacobi_large_argument_is_finite():
    m = co.CoefficientModel.jacobi(1.0, 0.0)
    assert np.isfinite(co.log_A(m, 800.0))
    assert np.isfinite(co.effective_potential(m, 800.0))


@pytest.mark.parametrize("bad", [
    dict(family="bessel", alpha=-0.6),
    dict(family="jacobi", alpha=0.5, beta=-0.7),
    dict(family="laguerre", alpha=0.5),
    dict(family="perturbed_bessel", alpha=0.5, steps=((2.0, -1.0),)),
    dict(family="bessel", alpha=0.5, steps=((2.0, 1.0),)),
    dict(family="bessel", alpha=0.5, domain_floor=0.0),
])
def test_invalid_models_rejected(bad):
    with pytest.raises(ValueError):
        co.CoefficientModel(**bad)


def test_phase_examples():
    assert co.phase(co.CoefficientModel.bessel(0.5, domain_floor=1.0), np.e) == pytest.approx(1.0, rel=1e-10)
    assert co.phase(co.CoefficientModel.bessel(0.0, domain_floor=1.0), 4.0) == pytest.approx(2.0, rel=1e-10)
    m = co.CoefficientModel.jacobi(1.0, 0.0)
    assert co.phase(m, m.domain_floor) == 0.0


def test_phase_across_step():
    m = co.CoefficientModel.perturbed_bessel(0.5, [(2.0, 3.0)])
    assert co.phase(m, 5.0) == pytest.approx(STEP_PHASE_AT_5, rel=1e-9)


def test_tail_bv_examples():
    assert co.tail_bv(co.CoefficientModel.bessel(0.5), 1.0) == 0.0
    assert co.tail_bv(co.CoefficientModel.bessel(0.5), 37.0) == 0.0
    assert co.tail_bv(co.CoefficientModel.bessel(0.0), 10.0) == pytest.approx(0.025, rel=1e-12)


def test_tail_bv_step_model_keeps_the_tail_of_its_potential():
    # with A = t^2 + 3 right of the step the Liouville potential is 3/(t^2+3)^2, not zero
    m = co.CoefficientModel.perturbed_bessel(0.5, [(2.0, 3.0)])
    assert co.tail_bv(m, 3.0) == pytest.approx(STEP_TAIL_AT_3, rel=1e-8)
    # the atom at 2 contributes c / A(2-) = 3/4 only when it lies in the tail
    assert co.tail_bv(m, 1.0) - co.tail_bv(m, 2.0 + 1e-12) == pytest.approx(0.75, rel=1e-6)


def test_bv_derivative_atoms_match_steps():
    m = co.CoefficientModel.perturbed_bessel(1.0, [(1.5, 1.0), (3.0, 2.0)])
    bv = co.bv_derivative(m)
    assert bv.atoms == m.steps
    assert bv.tail_variation(2.0) == co.tail_bv(m, 2.0)


def test_interface_matrix_is_unimodular():
    m = co.CoefficientModel.perturbed_bessel(1.0, [(1.5, 1.0), (3.0, 2.0)])
    for a in m.atoms:
        assert np.linalg.det(co.interface_matrix(m, a)) == pytest.approx(1.0, abs=1e-14)


def test_model_round_trip():
    m = co.CoefficientModel.perturbed_bessel(1.0, [(1.5, 1.0), (3.0, 2.0)])
    assert co.CoefficientModel.from_dict(m.to_dict()) == m


@pytest.mark.parametrize("model", CATALOG, ids=lambda m: m.describe())
def test_monotone_and_positive(model):
    x = np.sort(np.concatenate([np.geomspace(model.domain_floor, 100.0, 400), list(model.atoms)]))
    A = co.eval_A(model, x)
    assert np.all(A > 0)
    assert np.all(np.diff(A) >= 0)


@pytest.mark.parametrize("model", CATALOG, ids=lambda m: m.describe())
def test_tail_bv_nonincreasing_and_vanishing(model):
    xs = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0]
    tb = [co.tail_bv(model, x) for x in xs]
    assert all(b <= a * (1 + 1e-9) for a, b in zip(tb[:-1], tb[1:]))
    assert tb[-1] <= 0.01 * tb[0]


@pytest.mark.parametrize("model", CATALOG, ids=lambda m: m.describe())
def test_phase_increasing(model):
    xs = np.linspace(0.01, 6.0, 25)
    ph = co.phase(model, xs)
    assert np.all(np.diff(ph) > 0)


@given(st.floats(0.01, 10.0), st.floats(0.05, 5.0), st.floats(1e-12, 1e-7))
def test_jump_reconstruction(a, c, h):
    m = co.CoefficientModel.perturbed_bessel(0.5, [(a, c)])
    jump = co.eval_A(m, a) - co.eval_A(m, a - h)
    # A is x^2 plus the step: the smooth part moves by at most 2 a h + h^2
    assert jump == pytest.approx(c, abs=2 * a * h + h * h + 1e-12 * (1 + a * a))


@given(st.floats(-0.45, 3.0), st.floats(0.01, 50.0), st.floats(0.01, 50.0))
def test_bessel_monotone_property(alpha, x1, x2):
    m = co.CoefficientModel.bessel(alpha)
    lo, hi = sorted((x1, x2))
    assert co.eval_A(m, lo) <= co.eval_A(m, hi)
