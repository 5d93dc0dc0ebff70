import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats as sps

from birkhoff_limit.params import Params
from birkhoff_limit.rng import uniforms
from birkhoff_limit.stats import (ECDF, InsufficientSamplesError, ks, ks_critical, ks_uniform,
                                  l2_gap, mean_estimate, measure_estimate, wilson)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200), st.floats(-2e6, 2e6))
def test_ecdf_properties(xs, z):
    F = ECDF(xs)
    assert F.n == len(xs)
    assert np.all(np.diff(F.samples) >= 0)
    assert F(z) == sum(x <= z for x in xs) / len(xs)
    assert F(F.samples[-1]) == 1.0 and F(F.samples[0] - 1) == 0.0


def test_ecdf_rejects_bad_input():
    with pytest.raises(ValueError):
        ECDF([])
    with pytest.raises(ValueError):
        ECDF([1.0, float("nan")])


def test_ks_examples():
    A = ECDF([1.0, 2.0, 3.0])
    assert ks(A, ECDF([3.0, 1.0, 2.0])) == 0.0
    assert ks(A, ECDF([10.0, 11.0])) == 1.0
    n = 10**5
    assert ks_uniform(ECDF(uniforms(0, "ks-uniform", n)[:, 0])) <= 1.36 / math.sqrt(n)


@given(st.lists(st.floats(-100, 100), min_size=2, max_size=80),
       st.lists(st.floats(-100, 100), min_size=2, max_size=80))
def test_ks_matches_scipy(a, b):
    assert ks(ECDF(a), ECDF(b)) == pytest.approx(sps.ks_2samp(a, b).statistic, abs=1e-12)


def test_ks_critical():
    assert ks_critical(10**4) == pytest.approx(1.3581 / 100, rel=1e-4)
    assert ks_critical(100, 100) == pytest.approx(1.3581 * math.sqrt(2 / 100), rel=1e-4)


def test_wilson():
    lo, hi = wilson(0, 100)
    assert lo == 0.0 and 0.03 < hi < 0.04
    lo, hi = wilson(50, 100)
    assert lo == pytest.approx(0.4038, abs=1e-4) and hi == pytest.approx(0.5962, abs=1e-4)
    r = sps.binomtest(37, 200).proportion_ci(method="wilson")
    assert wilson(37, 200) == pytest.approx((r.low, r.high), abs=1e-12)


def test_measure_estimate_trivial():
    r = measure_estimate(lambda U: np.zeros(len(U), bool), 1000)
    assert r.estimate == 0.0 and r.lo == 0.0
    r = measure_estimate(lambda U: np.ones(len(U), bool), 1000)
    assert r.estimate == 1.0 and r.hi == 1.0
    r = measure_estimate(lambda U: U[:, 0] < 0.25, 10**5, 3)
    assert r.lo <= 0.25 <= r.hi


def test_mean_estimate():
    r = mean_estimate([1.0, 2.0, 3.0])
    assert r.estimate == 2.0 and r.lo < 2.0 < r.hi


def test_l2_gap_identical_and_symmetric():
    p = Params(0.5, 1000, 0.2)
    assert l2_gap("bar", "bar", p, 500).estimate == 0.0
    ab = l2_gap("delta", "bar", p, 500, rng=4)
    ba = l2_gap("bar", "delta", p, 500, rng=4)
    assert ab.estimate == ba.estimate and ab.estimate > 0


def test_l2_gap_insufficient_samples():
    p = Params(0.5, 10**5, 0.9)  # eps^6 N is large: nearly every alpha is excluded
    with pytest.raises(InsufficientSamplesError):
        l2_gap("delta", "hat", p, 200, exclude=True)
