import math

import pytest
from hypothesis import given
import hypothesis.strategies as st

from randprio.bounds import (BoundConstants, OutsideValidityWindow, berry_esseen_bound, dkw_epsilon,
                             lambda_iid, lambda_non_iid, tail_bound_iid, tail_bound_non_iid,
                             theorem2_finite_bound, theorem4_finite_bound, validity_deviation)
from randprio.distributions import Beta, Discrete, Uniform

SIGMA_U = math.sqrt(1 / 12)


def test_lambda_iid_values():
    assert lambda_iid(2, 0.5, SIGMA_U) == 1.0
    # hand evaluation with ln 100 = 4.605170186
    hand = 1 + 0.5 * 98 - SIGMA_U * math.sqrt(2 * 98 * 4.605170186 / 100)
    assert lambda_iid(100, 0.5, SIGMA_U) == pytest.approx(hand, abs=1e-8)
    assert lambda_iid(100, 0.5, SIGMA_U) == pytest.approx(49.133, abs=1e-3)
    assert 0.4999 < lambda_iid(10**6, 0.5, 0.2887) / 10**6 < 0.5001


def test_tail_bound_iid_values():
    first = 1 / (200 * math.sqrt(math.pi * math.log(100)))
    second = 0.475 / (SIGMA_U ** 3 * math.sqrt(9800))
    assert first == pytest.approx(0.001315, abs=1e-6)
    assert tail_bound_iid(100, SIGMA_U) == pytest.approx(first + second, rel=1e-14)
    assert tail_bound_iid(100, 0.288675) == pytest.approx(0.2007, abs=1e-3)
    values = [tail_bound_iid(n, SIGMA_U) for n in (10, 100, 10**4, 10**6)]
    assert values == sorted(values, reverse=True) and values[-1] < 1e-3


@given(st.integers(3, 10**6), st.floats(0.05, 0.95), st.floats(0.01, 0.5))
def test_non_iid_lambda_reduces_to_iid(n, mu, sigma):
    m = n * (n - 2)
    assert lambda_non_iid(n, mu * m, sigma ** 2 * m) == pytest.approx(lambda_iid(n, mu, sigma), abs=1e-12 * n)


def test_lambda_non_iid_values():
    assert lambda_non_iid(50, 300.0, 0.0) == 1 + 300 / 50
    assert lambda_non_iid(100, 4900, 816.67) == pytest.approx(49.133, abs=1e-3)


def test_tail_bound_non_iid_values():
    assert tail_bound_non_iid(100, 816.67) == pytest.approx(0.001315 + 0.019597, abs=1e-5)
    first = 1 / (200 * math.sqrt(math.pi * math.log(100)))
    assert tail_bound_non_iid(100, 1e30) == pytest.approx(first, rel=1e-12)
    assert tail_bound_non_iid(100, 10.0) > tail_bound_non_iid(100, 20.0)


def test_iid_finite_bound_values():
    n = 100
    lam = lambda_iid(n, 0.5, 0.2887)
    assert n / lam == pytest.approx(2.0353, abs=1e-4)
    assert theorem2_finite_bound(n, 0.5, 0.2887) == pytest.approx(4.04, abs=0.01)
    # approaches 1/mu; sigma must be large enough for the C/sigma^3 term to decay by n = 1e6
    assert 2.0 < theorem2_finite_bound(10**6, 0.5, 0.5) < 2.01


def test_iid_finite_bound_validity_window():
    assert validity_deviation(3, 0.5, SIGMA_U) < 0.5
    with pytest.raises(OutsideValidityWindow):
        theorem2_finite_bound(3, 0.1, 0.3)


@given(st.integers(3, 10**5), st.floats(0.3, 0.9), st.floats(0.05, 0.3))
def test_non_iid_bound_with_matching_constants_equals_iid_bound(n, mu, sigma):
    m = n * (n - 2)
    consts = BoundConstants(C_prime=0.475 / sigma ** 2)
    try:
        t2 = theorem2_finite_bound(n, mu, sigma, consts)
    except OutsideValidityWindow:
        return
    # with C' = C / sigma^2 the two tail terms coincide term by term
    assert theorem4_finite_bound(n, mu * m, sigma ** 2 * m, consts) == pytest.approx(t2, rel=1e-12)


def test_non_iid_bound_limits():
    n = 10**6
    value = theorem4_finite_bound(n, 0.3 * n * (n - 2), n * (n - 2) / 12)
    assert 3.333 < value < 3.35
    # sum_var = n / ln n: the tail term grows instead of vanishing
    excess = [theorem4_finite_bound(k, 0.3 * k * (k - 2), k / math.log(k)) - k / lambda_non_iid(k, 0.3 * k * (k - 2), k / math.log(k))
              for k in (10**2, 10**4, 10**6)]
    assert excess[0] < excess[1] < excess[2]
    assert excess[0] > 1


def test_non_iid_bound_rejects_nonpositive_lambda():
    with pytest.raises(OutsideValidityWindow):
        theorem4_finite_bound(10, 0.0, 1000.0)


def test_berry_esseen_bound():
    # Uniform: E|X-mu|^3 / sigma^3 = (1/32) / (1/12)^1.5
    ratio = (1 / 32) / (1 / 12) ** 1.5
    assert berry_esseen_bound(Uniform(), 100) == pytest.approx(0.475 * ratio / 10, rel=1e-12)
    assert berry_esseen_bound(Discrete((0, 1), (0.5, 0.5)), 4) == pytest.approx(0.475 / 2)
    with pytest.raises(ValueError):
        berry_esseen_bound(Discrete((0.9,), (1.0,)), 10)
    assert berry_esseen_bound(Beta(2, 5), 400) < berry_esseen_bound(Beta(2, 5), 100)


def test_dkw_epsilon():
    assert dkw_epsilon(10**5, 0.999) == pytest.approx(math.sqrt(math.log(2000) / 2e5), rel=1e-12)


def test_constants_validation():
    with pytest.raises(ValueError):
        BoundConstants(C=0.40)
    with pytest.raises(ValueError):
        BoundConstants(C_prime=0)
    c = BoundConstants(C=0.42, C_prime=1.0, c1=2.0)
    assert BoundConstants.from_dict(c.to_dict()) == c
