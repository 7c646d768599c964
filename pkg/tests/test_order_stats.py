import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from outdated_relay import order_stats as os_
from outdated_relay.errors import InvalidInputError

sigmas = st.floats(0.05, 50.0)
relays = st.integers(1, 8)


def test_single_relay_table():
    t = os_.build_coefficient_table(1.0, 1.0, 1)
    assert t.chi[0] == 2.0
    assert tuple(t.kappa[0, :, 0]) == (1.0, 0.0)
    assert tuple(t.alpha[0, :, 0]) == (1.0, -1.0, 0.0)
    assert tuple(t.beta[0, :, 0]) == (0.0, 1.0, 2.0)


def test_two_relay_kappas():
    t = os_.build_coefficient_table(1.0, 1.0, 2)
    assert tuple(t.chi) == (2.0, 4.0)
    assert t.kappa[0, 0, 1] == pytest.approx(1 / 3, abs=1e-15)
    assert t.kappa[0, 1, 1] == pytest.approx(-1 / 6, abs=1e-15)


@settings(max_examples=60)
@given(sigmas, sigmas, relays)
def test_normalization_identities(s1, s2, R):
    t = os_.build_coefficient_table(s1, s2, R)
    for q in (1, 2):
        mass, at_zero = t.normalization_residuals(q)
        assert abs(mass) < 1e-10
        assert abs(at_zero) < 1e-10


def test_outdated_cdf_single_relay():
    t = os_.build_coefficient_table(1.0, 3.0, 1)
    assert os_.cdf_outdated_eq(1, math.log(2.0), t) == pytest.approx(0.5, abs=1e-15)
    assert os_.cdf_outdated_eq(1, 0.0, t) == 0.0
    assert os_.pdf_outdated_eq(1, 0.0, t) == pytest.approx(1.0, abs=1e-15)
    assert os_.mean_outdated_eq(1, t) == pytest.approx(1.0, abs=1e-14)


def test_outdated_pdf_integrates_to_one():
    t = os_.build_coefficient_table(2.0, 1.0, 3)
    mass, _ = integrate.quad(lambda x: os_.pdf_outdated_eq(1, x, t), 0, np.inf, epsabs=1e-13)
    assert mass == pytest.approx(1.0, abs=1e-10)


def test_outdated_pdf_is_derivative_of_cdf():
    t = os_.build_coefficient_table(1.0, 1.0, 2)
    h = 1e-5
    fd = (os_.cdf_outdated_eq(1, 0.5 + h, t) - os_.cdf_outdated_eq(1, 0.5 - h, t)) / (2 * h)
    assert os_.pdf_outdated_eq(1, 0.5, t) == pytest.approx(fd, abs=1e-6)


def test_two_relay_mean_from_order_statistics():
    # selected relay's hop-1 gain: w.p. 1/2 the larger-min relay's min (mean 3/4)
    # plus, w.p. 1/2, min + an Exp(1) excess: 3/4 + 1/2
    t = os_.build_coefficient_table(1.0, 1.0, 2)
    m = os_.mean_outdated_eq(1, t)
    assert m == pytest.approx(1.25, abs=1e-12)
    assert 1.0 < m < 1.5


def _brute_selected_cdf(s1, s2, R, x, n=400_000, seed=5):
    rng = np.random.default_rng(seed)
    g1 = rng.exponential(s1, (n, R))
    g2 = rng.exponential(s2, (n, R))
    k = np.argmax(np.minimum(g1, g2), axis=1)
    return np.mean(g1[np.arange(n), k] < x)


def test_outdated_cdf_matches_brute_force_selection():
    t = os_.build_coefficient_table(2.0, 1.0, 3)
    p = _brute_selected_cdf(2.0, 1.0, 3, 1.0)
    se = math.sqrt(p * (1 - p) / 400_000)
    assert abs(os_.cdf_outdated_eq(1, 1.0, t) - p) < 4 * se


@settings(max_examples=40)
@given(sigmas, sigmas, relays, st.floats(0.0, 1.0))
def test_current_cdf_is_a_cdf(s1, s2, R, rho):
    t = os_.build_coefficient_table(s1, s2, R)
    x = np.concatenate([[0.0], np.logspace(-4, 4, 60) * s1])
    f = os_.cdf_current_eq(1, x, t, rho)
    assert f[0] == 0.0
    assert np.all(np.diff(f) >= -1e-12)
    assert np.all((f >= -1e-12) & (f <= 1 + 1e-12))


@settings(max_examples=40)
@given(sigmas, sigmas, relays)
def test_current_gain_reductions(s1, s2, R):
    t = os_.build_coefficient_table(s1, s2, R)
    x = np.logspace(-3, 2, 30) * s2
    np.testing.assert_allclose(os_.cdf_current_eq(2, x, t, 0.0), -np.expm1(-x / s2),
                               rtol=0, atol=1e-12)
    np.testing.assert_allclose(os_.cdf_current_eq(2, x, t, 1.0), os_.cdf_outdated_eq(2, x, t),
                               rtol=0, atol=1e-12)


def test_current_pdf_derivative():
    t = os_.build_coefficient_table(1.0, 1.0, 2)
    h = 1e-5
    fd = (os_.cdf_current_eq(1, 1.0 + h, t, 0.7) - os_.cdf_current_eq(1, 1.0 - h, t, 0.7)) / (2 * h)
    assert os_.pdf_current_eq(1, 1.0, t, 0.7) == pytest.approx(fd, abs=1e-8)


def test_joint_pdf_independent_limit():
    t = os_.build_coefficient_table(2.0, 1.0, 3)
    y, x = 0.7, 1.3
    expected = os_.pdf_outdated_eq(1, y, t) * math.exp(-x / 2.0) / 2.0
    assert os_.joint_pdf_eq(1, y, x, t, 0.0) == pytest.approx(expected, rel=1e-13)


def test_joint_pdf_normalized_and_marginal():
    t = os_.build_coefficient_table(1.0, 1.0, 2)
    rho = 0.7
    mass, _ = integrate.dblquad(lambda x, y: os_.joint_pdf_eq(1, y, x, t, rho),
                                0, 60, 0, 60, epsabs=1e-11, epsrel=1e-10)
    assert mass == pytest.approx(1.0, abs=1e-8)
    marg, _ = integrate.quad(lambda y: os_.joint_pdf_eq(1, y, 1.0, t, rho), 0, np.inf)
    assert marg == pytest.approx(os_.pdf_current_eq(1, 1.0, t, rho), rel=1e-9)


def test_joint_pdf_rejects_full_correlation():
    t = os_.build_coefficient_table(1.0, 1.0, 1)
    with pytest.raises(InvalidInputError):
        os_.joint_pdf_eq(1, 1.0, 1.0, t, 1.0)


def test_term_set_single_relay_full_correlation():
    t = os_.build_coefficient_table(1.0, 1.0, 1)
    ts = os_.build_term_set(t, 1.0, 1.0)
    assert len(ts) == 4
    live = ts.weight != 0
    assert live.sum() == 1
    assert ts.weight[live][0] == 1.0
    assert ts.theta1[live][0] == 1.0 and ts.theta2[live][0] == 1.0


@settings(max_examples=60)
@given(sigmas, sigmas, relays, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_term_weights_sum_to_one(s1, s2, R, r1, r2):
    t = os_.build_coefficient_table(s1, s2, R)
    ts = os_.build_term_set(t, r1, r2)
    assert len(ts) == (2 * R) ** 2
    assert abs(math.fsum(ts.weight) - 1.0) < 1e-10


@pytest.mark.parametrize("R", [1, 3, 5])
def test_uncorrelated_rates_are_hop_means(R):
    ts = os_.build_term_set(os_.build_coefficient_table(4.0, 0.5, R), 0.0, 0.0)
    np.testing.assert_allclose(ts.theta1, 0.25, rtol=1e-15)
    np.testing.assert_allclose(ts.theta2, 2.0, rtol=1e-15)


def test_full_grid_normalization():
    for R, d1 in itertools.product(range(1, 6), (0.1, 0.3, 0.5, 0.7, 0.9)):
        t = os_.build_coefficient_table(d1 ** -3, (1 - d1) ** -3, R)
        for q in (1, 2):
            assert max(abs(v) for v in t.normalization_residuals(q)) < 1e-12


@pytest.mark.parametrize("args", [(1.0, 1.0, 0), (1.0, 1.0, 1.5), (0.0, 1.0, 2),
                                  (1.0, -1.0, 2), (1.0, 1.0, 65)])
def test_table_rejects_invalid(args):
    with pytest.raises(InvalidInputError):
        os_.build_coefficient_table(*args)


def test_rejects_bad_hop_and_argument():
    t = os_.build_coefficient_table(1.0, 1.0, 2)
    with pytest.raises(InvalidInputError):
        os_.cdf_outdated_eq(3, 1.0, t)
    with pytest.raises(InvalidInputError):
        os_.cdf_outdated_eq(1, -1.0, t)
    with pytest.raises(InvalidInputError):
        os_.cdf_current_eq(1, 1.0, t, 1.2)
