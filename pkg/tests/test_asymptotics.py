import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chebli import asymptotics as asy
from chebli import coefficients as co
from chebli import convolution as cv
from chebli import measures as ms
from chebli import spectral as sp
from chebli.decision import WeightSpec

from .conftest import BESSEL_HALF

JACOBI_HALF = co.CoefficientModel.jacobi(0.5, 0.5)


def _uniform(x, n=4001):
    t = np.linspace(-x, x, n)
    return ms.RadialMeasure.from_samples(t, np.full(n, 0.5 / x), "recentered")


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("y", [10.0, 20.0, 40.0, 80.0])
def test_recentred_distance_rate(x, y):
    # nu_{x,y} has density (s + y)/(2 x y) on [-x, x]; its L1 distance to the
    # uniform law is int |s|/(2 x y) ds = x/(2y)
    d = ms.l1_distance(asy.nu_left(BESSEL_HALF, None, x, y), _uniform(x))
    assert d == pytest.approx(x / (2.0 * y), rel=1e-6)


def test_asymptotic_measure_bessel_half():
    nu, rep = asy.asymptotic_measure(BESSEL_HALF, None, 1.0, [10, 20, 40, 80])
    assert rep.converged
    assert rep.rate == pytest.approx(1.0, abs=1e-6)
    assert np.allclose(rep.pairwise, [1 / 40, 1 / 80, 1 / 160], rtol=1e-6)
    # the iterates are affine in 1/y, so extrapolation lands on the uniform law
    assert ms.l1_distance(nu, _uniform(1.0)) < 1e-9
    assert rep.truncation_radius == pytest.approx(1.0)
    assert rep.tail_mass == 0.0


def test_extrapolation_modes():
    sched = [10, 20, 40, 80]
    last, rep = asy.asymptotic_measure(BESSEL_HALF, None, 1.0, sched, extrapolate="none")
    assert ms.l1_distance(last, _uniform(1.0)) == pytest.approx(1 / 160, rel=1e-6)
    pw, _ = asy.asymptotic_measure(BESSEL_HALF, None, 1.0, sched, extrapolate="power")
    assert ms.l1_distance(pw, _uniform(1.0)) < 1e-6
    with pytest.raises(ValueError, match="extrapolation"):
        asy.asymptotic_measure(BESSEL_HALF, None, 1.0, sched, extrapolate="cubic")


def test_continuity_in_x():
    nu1, _ = asy.asymptotic_measure(BESSEL_HALF, None, 1.0, [10, 20, 40, 80])
    nu2, _ = asy.asymptotic_measure(BESSEL_HALF, None, 1.01, [10, 20, 40, 80])
    # uniform laws on [-1, 1] and [-1.01, 1.01] differ by 2 * 0.01/1.01 in L1
    assert ms.l1_distance(nu1, nu2) == pytest.approx(0.02 / 1.01, rel=1e-3)


def test_origin_gives_dirac():
    nu, rep = asy.asymptotic_measure(BESSEL_HALF, None, 0.0, [1, 2, 3, 4])
    assert nu.atoms == ((0.0, 1.0),) and nu.coordinate == "recentered"
    assert rep.converged and all(d == 0 for d in rep.pairwise)


def test_schedule_validation():
    with pytest.raises(ValueError, match="4 points"):
        asy.asymptotic_measure(BESSEL_HALF, None, 1.0, [10, 20, 40])
    with pytest.raises(ValueError, match="increasing"):
        asy.asymptotic_measure(BESSEL_HALF, None, 1.0, [10, 20, 20, 40])
    with pytest.raises(ValueError, match="y > x"):
        asy.nu_left(BESSEL_HALF, None, 2.0, 1.0)
    with pytest.raises(ValueError, match="nondecreasing"):
        asy.limit_measure(BESSEL_HALF, None, [2, 1], [10, 20, 40, 80])


@given(st.floats(0.1, 3.0), st.floats(4.0, 50.0))
def test_right_family_is_reflection(x, y):
    left = asy.nu_left(BESSEL_HALF, None, x, y)
    right = asy.nu_right(BESSEL_HALF, None, x, y)
    assert right.support == (-left.support[1], -left.support[0])
    assert ms.l1_distance(ms.reflect(right), left) == 0.0
    assert ms.total_mass(right) == pytest.approx(1.0, abs=1e-12)


def test_cauchy_verdict_ignores_rounding_noise():
    assert asy._cauchy_verdict((4e-15, 0.0, 1e-14), 1e-2) == asy.CONVERGED
    assert asy._cauchy_verdict((1e-3, 2e-3, 5e-3), 1e-2) == asy.NOT_CONVERGED
    assert asy._cauchy_verdict((0.5, 0.2, 0.05), 1e-2) == asy.NOT_CONVERGED


@given(st.floats(0.3, 3.0), st.floats(0.05, 5.0))
def test_rate_fit_recovers_exponent(p, c):
    s = np.array([10.0, 20.0, 40.0, 80.0, 160.0])
    d = c * np.abs(s[:-1] ** -p - s[1:] ** -p)
    assert asy._fit_rate(s, d) == pytest.approx(p, abs=1e-4)


def test_limit_bessel_half_not_converged():
    lim, rep = asy.limit_measure(BESSEL_HALF, None, [1, 2, 4, 8], lambda x: [x * v for v in (10, 20, 40, 80)])
    assert lim is None
    assert rep.verdict == asy.NOT_CONVERGED
    # uniform laws on [-x, x] and [-2x, 2x] are at L1 distance exactly 1
    assert np.allclose(rep.pairwise, 1.0, atol=1e-6)
    assert rep.to_limit == ()


def test_limit_constant_schedule_converges():
    lim, rep = asy.limit_measure(BESSEL_HALF, None, [1, 1, 1, 1], [10, 20, 40, 80])
    assert rep.converged and lim is not None
    assert max(rep.pairwise) == 0.0
    assert np.isnan(rep.rate)


def test_jacobi_half_families():
    nu, rep = asy.asymptotic_measure(JACOBI_HALF, None, 1.0, [10, 20, 30, 40])
    assert rep.converged
    assert ms.total_mass(nu) == pytest.approx(1.0, abs=1e-6)
    lim, rep = asy.limit_measure(JACOBI_HALF, None, [1, 2, 4, 8], lambda x: [max(1, x) * v for v in (5, 10, 15, 20)])
    assert lim is None and rep.verdict == asy.NOT_CONVERGED
    assert min(rep.pairwise) > 1.0


def test_report_serialisation():
    _, rep = asy.asymptotic_measure(BESSEL_HALF, None, 1.0, [10, 20, 40, 80])
    d = rep.to_dict()
    assert set(d) == {"parameter", "schedule", "pairwise_distances", "distances_to_limit", "verdict",
                      "rate_estimate", "tolerance", "truncation_radius", "tail_mass", "notes"}
    assert d["verdict"] == "Converged" and d["schedule"] == [10.0, 20.0, 40.0, 80.0]


@pytest.mark.xfail(strict=True, reason="the distance is x/(2y); it equals 1/(2y) only at x = 1")
@pytest.mark.parametrize("x", [0.5, 2.0])
def test_recentred_distance_independent_of_x(x):
    for y in (10.0, 20.0, 40.0):
        d = ms.l1_distance(asy.nu_left(BESSEL_HALF, None, x, y), _uniform(x))
        assert d == pytest.approx(1.0 / (2.0 * y), rel=0.1)


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_line_symbol_of_nu_x_is_character(x):
    nu, _ = asy.asymptotic_measure(BESSEL_HALF, None, x, [10, 20, 40, 80])
    lams = np.linspace(0.0, 10.0, 201)
    sym = sp.line_transform(nu, lams).values
    phi = np.sinc(lams * x / np.pi)
    assert np.max(np.abs(sym - phi)) <= 2e-2


def test_weighted_distances_follow_unweighted():
    w = WeightSpec.polynomial(1.0)
    nu, _ = asy.asymptotic_measure(BESSEL_HALF, None, 1.0, [10, 20, 40, 80])
    dists = []
    for y in (10.0, 20.0, 40.0, 80.0):
        diff = cv.add_measures([(1.0, asy.nu_left(BESSEL_HALF, None, 1.0, y)), (-1.0, nu)], "recentered")
        dists.append(ms.weighted_norm(diff, w))
    # int (1+|s|)|s|/(2y) ds over [-1, 1] = 5/(6y)
    assert np.allclose(dists, [5.0 / (6.0 * y) for y in (10, 20, 40, 80)], rtol=1e-3)
