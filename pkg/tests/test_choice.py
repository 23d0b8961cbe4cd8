import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from housing_abm.choice import (PolicyVector, PricedOut, choice_probabilities, indirect_utility,
                                normalize, reservation_bid, sample_buyer_locations,
                                write_choice_csv)
from housing_abm.geometry import build_city


def test_utility_examples():
    assert indirect_utility(10, 0, 10, 1.0, 0.5) == 0.0
    assert indirect_utility(10, 0.25, 8, 1.0, 0.5) == 0.0  # (1+xi) P = Y
    assert indirect_utility(60, 0, 20, 0.5, 1.0) == 0.5
    assert indirect_utility(60, 0, 40, 0.25, 0.5) == pytest.approx(math.sqrt(20) * 0.5)
    assert indirect_utility(60, 0, 40, 0.25, 0.5) == pytest.approx(2.2361, abs=1e-4)


def test_utility_policy_scales_price():
    assert indirect_utility(30, -0.2, 30, 1.0, 0.5) == pytest.approx(math.sqrt(6))


def test_policy_vector():
    assert PolicyVector.none(3).xi == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        PolicyVector((0.0, -1.0))


def test_choice_probabilities_examples():
    np.testing.assert_allclose(normalize([2.0, 2.0]), [0.5, 0.5])
    pi = choice_probabilities(10, 0, np.array([5.0, 12.0, 1.0]), np.ones(3), 0.5)
    assert pi[1] == 0 and pi.sum() == pytest.approx(1.0)


def test_choice_gaussian_weights_small_city():
    g = build_city(3, 1.0)
    pi = choice_probabilities(50.0, 0.0, np.full(9, 10.0), g.A, 1.0)
    w = {0: 1.0, 1: math.exp(-1 / 9), 2: math.exp(-2 / 9)}
    total = w[0] + 4 * w[1] + 4 * w[2]
    expected = [w[x * x + y * y] / total for x, y in g.locations]
    np.testing.assert_allclose(pi, expected, rtol=1e-14)


def test_priced_out_signalled():
    assert choice_probabilities(5, 0, np.full(4, 6.0), np.ones(4), 0.5).size == 0
    with pytest.raises(PricedOut):
        normalize(np.zeros(3))
    with pytest.raises(FloatingPointError):
        normalize([np.nan, 1.0])


def test_sampling_examples():
    rng = np.random.default_rng(0)
    assert sample_buyer_locations(0, [0.5, 0.5], rng).tolist() == [0, 0]
    assert sample_buyer_locations(7, [1.0, 0.0, 0.0], rng).tolist() == [7, 0, 0]
    assert sample_buyer_locations(7, np.empty(0), rng, 4).tolist() == [0, 0, 0, 0]
    n = 100_000
    c = sample_buyer_locations(n, [0.3, 0.7], rng)
    assert c.sum() == n
    assert abs(c[0] / n - 0.3) < 3 * math.sqrt(0.3 * 0.7 / n)


def test_reservation_bid_examples():
    assert reservation_bid(15) == 15
    assert reservation_bid(15, 1.0, -0.1) == pytest.approx(16.667, abs=1e-3)
    assert reservation_bid(15, 1.0, 0.1) == pytest.approx(13.636, abs=1e-3)
    assert reservation_bid(30, 1.0, -0.2) == pytest.approx(37.5)
    with pytest.raises(ValueError):
        reservation_bid(15, 0.0)


prices = st.lists(st.floats(0, 100), min_size=2, max_size=30)


@given(prices, st.floats(1, 120), st.floats(0, 1), st.floats(0.01, 100))
def test_scale_invariance(P, Y, beta, c):
    P = np.array(P)
    A = np.linspace(1.0, 0.1, len(P))
    a = choice_probabilities(Y, 0.0, P, A, beta)
    b = choice_probabilities(Y, 0.0, P, c * A, beta)
    assert a.size == b.size
    if a.size:
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-15)
        assert np.all(a >= 0) and a.sum() == pytest.approx(1.0)


@given(prices, st.floats(101, 200), st.floats(101, 200))
def test_beta_one_independent_of_income_and_price(P, Y1, Y2):
    P = np.array(P)
    A = np.linspace(1.0, 0.1, len(P))
    a = choice_probabilities(Y1, 0.0, P, A, 1.0)
    b = choice_probabilities(Y2, 0.0, P[::-1], A, 1.0)
    np.testing.assert_allclose(a, b, rtol=1e-12)


@given(prices, st.integers(0, 29), st.floats(0, 50), st.floats(0, 0.99))
def test_raising_price_lowers_probability(P, i, bump, beta):
    P = np.array(P)
    i = i % len(P)
    A = np.linspace(1.0, 0.1, len(P))
    a = choice_probabilities(120.0, 0.0, P, A, beta)
    P2 = P.copy()
    P2[i] += bump
    b = choice_probabilities(120.0, 0.0, P2, A, beta)
    if a.size and b.size:
        assert b[i] <= a[i] + 1e-12


@given(st.floats(1, 100), st.floats(-0.9, 1.0), st.floats(-0.9, 1.0))
def test_bid_monotone_in_rate_linear_in_income(Y, x1, x2):
    if x2 - x1 > 1e-9:
        assert reservation_bid(Y, 1.0, x1) > reservation_bid(Y, 1.0, x2)
    assert reservation_bid(2 * Y, 1.0, x1) == pytest.approx(2 * reservation_bid(Y, 1.0, x1))


def test_choice_csv(tmp_path):
    path = tmp_path / "c.csv"
    xy = np.array([[0, 0], [1, 0]])
    write_choice_csv(path, xy, [np.array([1.0, 0.0])], [np.array([1.0, 0.0])])
    rows = list(csv.DictReader(open(path)))
    assert list(rows[0]) == ["x", "y", "k", "U", "pi"] and len(rows) == 2
