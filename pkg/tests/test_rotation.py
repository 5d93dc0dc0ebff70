import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from birkhoff_limit.params import Params
from birkhoff_limit.rotation import (DegenerateAlphaWarning, exclusion_cutoff, in_exclusion,
                                     in_exclusion_batch, is_member, resonant_set, signed_frac,
                                     signed_frac_array)
from conftest import SQRT2M1


def test_signed_frac_examples():
    s = signed_frac(3, 0.3)
    assert s.value == pytest.approx(-0.1, abs=1e-15) and s.integer_part == -1
    s = signed_frac(2, 0.25)
    assert s.value == 0.5 and s.integer_part == 0
    s = signed_frac(1, 0.0)
    assert s.value == 0.0 and s.integer_part == 0


@given(st.integers(1, 10**9), st.floats(0, 1, exclude_max=True))
def test_signed_frac_range(k, alpha):
    s = signed_frac(k, alpha)
    assert -0.5 < s.value <= 0.5
    # compare with an exact rational computation of k alpha
    from fractions import Fraction

    ka = Fraction(k) * Fraction(alpha)
    assert float(ka + s.integer_part) == pytest.approx(s.value, abs=1e-15 * k + 1e-15)


def test_signed_frac_array_matches_scalar():
    ks = np.arange(1, 2000)
    v, kp = signed_frac_array(ks, SQRT2M1)
    for k in (1, 7, 500, 1999):
        s = signed_frac(k, SQRT2M1)
        assert v[k - 1] == s.value and kp[k - 1] == s.integer_part


def test_resonant_examples_and_brute_force():
    p = Params(0.5, 100, 0.5)
    S = resonant_set(SQRT2M1, p)
    assert 2 in S and 1 not in S
    assert 2 ** 0.5 * abs(signed_frac(2, SQRT2M1).value) == pytest.approx(0.24264, abs=1e-5)
    brute = [k for k in range(1, 400) if
             k ** 0.5 * abs((k * SQRT2M1 + 0.5) % 1.0 - 0.5) <= 0.4]
    assert list(S.indices) == brute
    assert all(is_member(int(k), SQRT2M1, p) for k in S.indices)


@pytest.mark.parametrize("N,eps", [(10**4, 0.4), (10**5, 0.3)])
def test_hat_is_subset_of_full(N, eps):
    p = Params(0.5, N, eps)
    S = resonant_set(0.2718281828, p)
    H = resonant_set(0.2718281828, p, "hat")
    assert set(H.indices) <= set(S.indices)
    assert set(H.indices) == {k for k in S.indices if k >= p.k_hat_min}


def test_empty_hat_range():
    # eps^(1+2/a+2a) N >= N / eps^(1+2a) cannot hold for eps < 1, so the hat
    # range is empty only through k_hat_min > k_max at tiny N
    p = Params(0.5, 1, 0.9)
    if p.k_hat_min > p.k_max:
        assert len(resonant_set(0.3, p, "hat")) == 0


def test_degenerate_alpha_warns():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        S = resonant_set(0.5, Params(0.5, 100, 0.5))
    assert any(issubclass(x.category, DegenerateAlphaWarning) for x in w)
    assert 2 in S


def test_exclusion_examples():
    p = Params(0.5, 10**6, 0.4)
    assert exclusion_cutoff(p) >= 2
    assert in_exclusion(0.5, p)
    q = Params(0.5, 10**4, 0.1)  # eps^6 N < 1
    assert exclusion_cutoff(q) == 0
    assert not in_exclusion(0.5, q)


def test_exclusion_batch_matches_definition():
    p = Params(0.5, 10**5, 0.4)
    al = np.linspace(0.001, 0.999, 997)
    got = in_exclusion_batch(al, p)
    K = exclusion_cutoff(p)
    want = [any(k ** 0.5 * abs((k * a + 0.5) % 1.0 - 0.5) <= p.res_threshold
                for k in range(1, K + 1)) for a in al]
    assert list(got) == want
