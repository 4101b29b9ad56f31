import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdmvl.specfun import DomainError, digamma, log_gamma, trigamma

EULER = 0.5772156649015329


def test_log_gamma_examples():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-12)
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), abs=1e-12)
    assert log_gamma(10.0) == pytest.approx(math.log(math.factorial(9)), abs=1e-12)


@pytest.mark.parametrize("n", range(1, 21))
def test_log_gamma_integers_against_exact_factorial(n):
    assert abs(log_gamma(float(n)) - math.log(math.factorial(n - 1))) <= 1e-12 * max(1.0, math.log(math.factorial(n - 1)))


def test_log_gamma_accuracy_range():
    # reference only; the implementation does not touch scipy
    from scipy.special import gammaln

    x = np.geomspace(1e-3, 1e6, 5001)
    ref = gammaln(x)
    err = np.abs(log_gamma(x) - ref)
    # absolute below 1e-12 where the value is O(1); relative beyond that,
    # since lnΓ(1e6) ~ 1.3e7 has a float64 spacing of ~2e-9
    assert np.all(err <= 1e-12 * np.maximum(1.0, np.abs(ref)))


def test_digamma_examples():
    assert digamma(1.0) == pytest.approx(-EULER, abs=1e-14)
    assert digamma(2.0) == pytest.approx(1.0 - EULER, abs=1e-14)
    # central difference of log_gamma at h=1e-5
    h = 1e-5
    fd = (log_gamma(5.5 + h) - log_gamma(5.5 - h)) / (2 * h)
    assert fd == pytest.approx(1.6110931486, abs=1e-8)
    assert digamma(5.5) == pytest.approx(1.6110931486, abs=1e-10)


def test_digamma_accuracy_range():
    from scipy.special import digamma as ref_digamma

    x = np.geomspace(1e-3, 1e6, 5001)
    assert np.max(np.abs(digamma(x) - ref_digamma(x))) <= 1e-10


def test_trigamma_examples():
    assert trigamma(1.0) == pytest.approx(math.pi**2 / 6, abs=1e-14)
    assert trigamma(2.0) == pytest.approx(math.pi**2 / 6 - 1.0, abs=1e-14)
    h = 1e-5
    fd = (digamma(3.7 + h) - digamma(3.7 - h)) / (2 * h)
    assert fd == pytest.approx(0.3100378577, abs=1e-8)
    assert trigamma(3.7) == pytest.approx(0.3100378577, abs=1e-10)


def test_recurrences_on_random_points():
    x = np.random.default_rng(0).uniform(0.01, 100.0, 1000)
    assert np.max(np.abs(digamma(x + 1) - digamma(x) - 1 / x)) <= 1e-12
    assert np.max(np.abs(trigamma(x + 1) - trigamma(x) + 1 / x**2)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.01, max_value=1e4))
def test_digamma_matches_finite_difference_of_log_gamma(x):
    h = 1e-6 * max(1.0, abs(x))
    fd = (log_gamma(x + h) - log_gamma(x - h)) / (2 * h)
    d = digamma(x)
    assert abs(fd - d) <= 1e-6 * max(abs(d), 1e-2)


def test_vectorized_shape_and_scalar_type():
    x = np.array([[0.5, 1.0], [2.0, 30.0]])
    assert log_gamma(x).shape == (2, 2)
    assert isinstance(digamma(3.0), float)


@pytest.mark.parametrize("f", [log_gamma, digamma, trigamma])
@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_domain_errors(f, bad):
    with pytest.raises(DomainError):
        f(bad)
