import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from chebli import coefficients as co
from chebli import eigenfunctions as ef

from .conftest import CATALOG, STEP_MODEL

# Jost corrections m(x, k) = sqrt(pi k x / 2) exp(-i(alpha pi/2 + pi/4)) exp(ikx) H2_alpha(kx),
# frozen from 30-digit mpmath: (alpha, k) -> {x: m}
HANKEL_M = {
    (0, 1.0): {2.0: 0.9862158212188928 + 0.056477699679325055j,
               10.0: 0.99930756968279207 + 0.012428876274834411j,
               30.0: 0.99992201268313489 + 0.0041639632612725974j},
    (0, 3.0): {2.0: 0.99812366099551483 + 0.020518853281320041j,
               10.0: 0.99992201268313489 + 0.0041639632612725974j},
    (1, 1.0): {2.0: 1.0242079304770633 - 0.17865574043613843j,
               10.0: 1.0011580729198518 - 0.037400059954399901j,
               30.0: 1.0001300312319459 - 0.01249621359004124j},
}

# Gamma(a+1) (2/z)^a J_a(z), mpmath
BESSEL_CHAR = {
    0.0: {0.1: 0.99750156206604003, 1.0: 0.76519768655796655, 7.3: 0.2882169476350144, 50.0: 0.055812327669251815},
    1.0: {0.1: 0.99875052072484001, 1.0: 0.88010117148986703, 7.3: 0.022622035751577487,
          50.0: -0.0039004731250070056},
    2.5: {0.1: 0.99928591266835318, 1.0: 0.93052578017060798, 7.3: -0.039281968455917702,
          50.0: 2.4499445060394875e-5},
}

# 2F1((rho+ik)/2, (rho-ik)/2; alpha+1; -sinh^2 t), mpmath: (alpha, beta, k) -> values at t = 0.3, 1.5, 4
JACOBI_PHI = {
    (1.0, 0.0, 0.5): (0.9536273393884777, 0.35124691174243137, 0.0048750388146325761),
    (1.0, 0.0, 2.0): (0.91392013464378268, 0.083526072739154065, 0.00066077646648481232),
    (1.0, 0.0, 7.0): (0.51757802827238191, -0.0059132956779724239, 9.8785216217871906e-5),
    (1.5, 0.5, 0.5): (0.92083662590633964, 0.17427113356820945, 0.00026386250067218025),
    (1.5, 0.5, 7.0): (0.57449066518922655, 0.0018941399977639705, 2.9541435983029191e-6),
    (0.0, 0.0, 0.5): (0.97248030951756923, 0.54401388308676771, 0.037576653650128268),
    (0.0, 0.0, 7.0): (0.16562603718359804, -0.13042332715783923, -0.0050544170787512089),
}
J0_AT_2 = 0.22389077914123567


def test_bessel_half_jost_is_identity():
    js = ef.solve_jost(co.CoefficientModel.bessel(0.5), 1.7)
    assert np.max(np.abs(js.m_values - 1.0)) <= 1e-10
    assert js.iterations == 0


def test_bessel_zero_first_order_asymptotics():
    js = ef.solve_jost(co.CoefficientModel.bessel(0.0), 1.0)
    x = np.linspace(20.0, 40.0, 81)
    ref = 1.0 + 1j / (8.0 * x)
    assert np.max(np.abs(js.m_at(x) - ref) / np.abs(ref)) <= 5e-3


@pytest.mark.parametrize("key", sorted(HANKEL_M), ids=str)
def test_jost_against_hankel(key):
    alpha, k = key
    js = ef.solve_jost(co.CoefficientModel.bessel(alpha), k, tol=1e-10)
    for x, ref in HANKEL_M[key].items():
        assert abs(js.m_at(x) - ref) <= 2e-5


def test_jost_residual_and_outer_bound():
    js = ef.solve_jost(co.CoefficientModel.bessel(1.0), 2.0, x0=1.0, tol=1e-9)
    assert js.residual <= 1e-9
    if js.pieces == 1:
        assert js.sup_deviation <= js.error_bound
    # at the truncation point the correction is within the tail bound
    assert abs(js.m_values[-1] - 1.0) <= co.tail_bv(co.CoefficientModel.bessel(1.0), js.grid[-1]) / 2.0 + 1e-9


@pytest.mark.parametrize("model", [m for m in CATALOG if co.tail_bv(m, 1.0) > 0], ids=lambda m: m.describe())
@pytest.mark.parametrize("lam", [0.5, 2.0, 5.0])
def test_jost_bound_linear_in_tail_variation(model, lam):
    # one catalog-wide constant C = 1 in sup|m - 1| <= C tail_bv(x0) max(1, 1/lam), in the
    # perturbative range where that product is at most 1; steps rescale v by
    # sqrt(A+/A-), an O(1) effect in lam, hence max(1, 1/lam) rather than 1/lam
    checked = 0
    for x0 in (0.5, 1.0, 2.5, 5.0, 10.0, 20.0, 40.0, 80.0):
        bound = co.tail_bv(model, x0) * max(1.0, 1.0 / lam)
        if bound > 1.0:
            continue
        js = ef.solve_jost(model, lam, x0=x0, tol=1e-9)
        assert js.sup_deviation <= bound
        checked += 1
    assert checked >= 2


def test_zero_energy():
    for model in (co.CoefficientModel.bessel(0.5), co.CoefficientModel.jacobi(1.0, 0.0)):
        js = ef.solve_jost(model, 0.0, x0=0.5)
        assert np.all(np.isfinite(js.m_values))
    with pytest.raises(ef.JostError):
        ef.solve_jost(co.CoefficientModel.bessel(0.0), 0.0)


@pytest.mark.parametrize("model", [m for m in CATALOG if m.family != "jacobi"], ids=lambda m: m.describe())
def test_phi_zero_is_one(model):
    t = np.array([0.0, 0.3, 1.0, 2.0, 2.5, 7.0])
    assert np.allclose(ef.character(model, 0.0).evaluate(t), 1.0, atol=1e-12)


# 2F1(rho/2, rho/2; alpha+1; -sinh^2 t) at t = 1 and 3, mpmath
JACOBI_GROUND = {(1.0, 0.0): (0.62816813722977249, 0.046021895437560668),
                 (0.0, 0.0): (0.79565169560597404, 0.2341121025472522)}


@pytest.mark.parametrize("key", sorted(JACOBI_GROUND), ids=str)
def test_jacobi_zero_parameter_is_ground_spherical_function(key):
    # k is measured from the bottom of the spectrum rho^2, so phi_0 decays instead of being 1
    got = ef.character(co.CoefficientModel.jacobi(*key), 0.0).evaluate(np.array([1.0, 3.0]))
    assert np.allclose(got, JACOBI_GROUND[key], rtol=1e-6)
    assert ef.character(co.CoefficientModel.jacobi(*key), 0.0).source == "Integrated"


@pytest.mark.parametrize("model", CATALOG, ids=lambda m: m.describe())
def test_normalised_at_origin(model):
    phi = ef.character_matrix(model, np.array([0.5, 3.0, 20.0]), np.array([0.0, model.domain_floor]))
    assert np.allclose(phi[:, 0], 1.0, atol=1e-12)
    assert np.allclose(phi[:, 1], 1.0, atol=1e-3)


def test_bessel_half_sinc():
    z = np.linspace(0.1, 50.0, 300)
    assert np.allclose(ef.bessel_character(0.5, z), np.sin(z) / z, rtol=1e-12, atol=1e-15)


def test_bessel_j0_at_two():
    assert ef.character(co.CoefficientModel.bessel(0.0), 1.0).evaluate(2.0) == pytest.approx(J0_AT_2, rel=1e-12)


@pytest.mark.parametrize("alpha", sorted(BESSEL_CHAR))
def test_bessel_character_against_series_oracle(alpha):
    for z, ref in BESSEL_CHAR[alpha].items():
        assert ef.bessel_character(alpha, z) == pytest.approx(ref, rel=1e-6, abs=1e-12)


@pytest.mark.parametrize("key", sorted(JACOBI_PHI), ids=str)
def test_jacobi_character_against_hypergeometric(key):
    a, b, k = key
    got = ef.character_matrix(co.CoefficientModel.jacobi(a, b), [k], np.array([0.3, 1.5, 4.0]))[0]
    ref = np.array(JACOBI_PHI[key])
    assert np.allclose(got, ref, rtol=1e-6, atol=1e-9)


def test_jacobi_half_half_closed_form():
    k, t = 2.3, np.linspace(0.05, 5.0, 40)
    got = ef.character_matrix(co.CoefficientModel.jacobi(0.5, 0.5), [k], t)[0]
    assert np.allclose(got, 2.0 * np.sin(k * t) / (k * np.sinh(2.0 * t)), rtol=1e-12)


def _step_oracle(k, ts):
    """Integrate (A u')' + k^2 A u = 0 through the step with solve_ivp."""
    a = 2.0
    u0 = np.sin(k * a) / (k * a)
    du0 = (np.cos(k * a) * k * a - np.sin(k * a)) / (k * a * a)
    # u and A u' are continuous: A(2-) = 4, A(2+) = 7
    y0 = [u0, 4.0 * du0]

    def rhs(t, y):
        A = t * t + 3.0
        return [y[1] / A, -k * k * A * y[0]]

    sol = integrate.solve_ivp(rhs, (a, max(ts)), y0, t_eval=ts, rtol=1e-12, atol=1e-13, method="DOP853")
    return sol.y[0]


@pytest.mark.parametrize("k", [0.7, 3.0, 11.0])
@pytest.mark.parametrize("method", ["ode", "jost"])
def test_step_character_against_ivp(k, method):
    ts = np.array([2.5, 4.0, 7.5, 9.0])
    got = ef.character_matrix(STEP_MODEL, [k], ts, method=method)[0]
    assert np.allclose(got, _step_oracle(k, ts), atol=2e-6)


def test_step_matching_conditions():
    # u and the flux A u' are continuous across the step; v = sqrt(A) u jumps by sqrt(7/4)
    k, a, h = 2.2, 2.0, 1e-6
    phi = ef.character_matrix(STEP_MODEL, [k], np.array([a - 2 * h, a - h, a, a + h]), method="jost")[0]
    assert phi[1] == pytest.approx(phi[2], abs=1e-5)
    left_flux = 4.0 * (phi[1] - phi[0]) / h
    right_flux = 7.0 * (phi[3] - phi[2]) / h
    assert left_flux == pytest.approx(right_flux, rel=1e-3, abs=1e-4)


@pytest.mark.parametrize("model", [co.CoefficientModel.bessel(1.0), co.CoefficientModel.jacobi(1.0, 0.0), STEP_MODEL],
                         ids=lambda m: m.describe())
def test_normal_form_residual(model):
    k = 1.9
    h = 1e-3
    x = np.array([0.7, 1.3, 3.1, 4.4])
    t = np.sort(np.concatenate([x - h, x, x + h]))
    phi = ef.character_matrix(model, [k], t)[0].reshape(-1, 3)
    v = np.sqrt(co.A_unchecked(model, t)).reshape(-1, 3) * phi
    d2 = (v[:, 0] - 2 * v[:, 1] + v[:, 2]) / h**2
    q = co.effective_potential(model, x)
    res = d2 + (k * k + model.spectral_shift - model.spectral_shift - q) * v[:, 1]
    assert np.max(np.abs(res)) <= 1e-4


@given(st.floats(0.1, 50.0), st.floats(-0.4, 3.0))
def test_bessel_character_matches_scipy(z, alpha):
    ref = special.gamma(alpha + 1) * (2.0 / z) ** alpha * special.jv(alpha, z)
    assert ef.bessel_character(alpha, z) == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_character_sources():
    assert ef.character(co.CoefficientModel.bessel(1.0), 2.0).source == "ClosedForm"
    assert ef.character(co.CoefficientModel.jacobi(1.0, 0.0), 2.0).source == "Integrated"
    assert ef.character(STEP_MODEL, 2.0).source == "JostAssembled"
