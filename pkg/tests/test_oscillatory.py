import numpy as np
import pytest
from scipy import integrate, special

from birkhoff_limit import oscillatory as osc


def quad_oracle(lo, hi, a):
    if lo == 0:
        # algebraic weight x^-a handles the endpoint singularity
        re, _ = integrate.quad(lambda x: np.cos(2 * np.pi * x), 0, hi, weight="alg",
                               wvar=(-a, 0), epsabs=1e-14)
        im, _ = integrate.quad(lambda x: np.sin(2 * np.pi * x), 0, hi, weight="alg",
                               wvar=(-a, 0), epsabs=1e-14)
        return complex(re, im)
    f = lambda x: x ** (-a)
    re, _ = integrate.quad(f, lo, hi, weight="cos", wvar=2 * np.pi, limit=2000)
    im, _ = integrate.quad(f, lo, hi, weight="sin", wvar=2 * np.pi, limit=2000)
    return complex(re, im)


def test_G_matches_fresnel():
    # x = t^2 / 4 turns the a = 1/2 integral into Fresnel integrals at 2 sqrt(u)
    u = np.array([1e-6, 0.01, 0.3, 1.0, 7.5, 40.0, 333.3])
    S, C = special.fresnel(2 * np.sqrt(u))
    np.testing.assert_allclose(osc.G(u, 0.5), C + 1j * S, atol=1e-11)


@pytest.mark.parametrize("a", [0.3, 0.5, 0.7])
def test_closed_form(a):
    v = quad_oracle(0, 1, a) + quad_oracle(1, np.inf, a)
    assert abs(osc.closed_form(a) - v) < 1e-8


@pytest.mark.parametrize("a", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("lo,hi", [(0.001, 0.7), (0.3, 12.0), (5.0, 80.25)])
def test_integral_vs_quad(a, lo, hi):
    assert abs(complex(osc.integral(np.array([lo]), np.array([hi]), a)[0])
               - quad_oracle(lo, hi, a)) < 1e-10


@pytest.mark.parametrize("a", [0.3, 0.5, 0.7])
def test_tail_integral_vs_quad(a):
    for u in (1e-4, 0.05, 0.9, 3.0, 9.0, 50.0):
        assert abs(complex(osc.tail_integral(np.array([u]), a)[0])
                   - quad_oracle(u, np.inf, a)) < 1e-8


@pytest.mark.parametrize("a", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_table_matches_tail_integral(a):
    table = osc.tail_table(a, 200.0)
    u = np.concatenate([np.geomspace(1e-7, 1.0, 300), np.linspace(1, 200, 700)])
    err = np.abs(osc.table_eval(u, a, table) - osc.tail_integral(u, a))
    assert err.max() < 1e-9


def test_band_fit_accuracy():
    a = 0.5
    edges = 0.004 * np.sqrt(2.0) ** np.arange(31)
    rows = osc.band_fit(a, edges)
    for i in range(edges.size - 1):
        u = np.linspace(edges[i], edges[i + 1], 41)
        mid, ih = rows[i, 0], rows[i, 1]
        t = (np.sqrt(u) - mid) * ih
        d = osc.POLY_DEG + 1
        h = np.polyval(rows[i, 2:2 + d][::-1], t) + 1j * np.polyval(rows[i, 2 + d:][::-1], t)
        want = osc.tail_integral(u, a) * np.exp(-2j * np.pi * u)
        assert np.abs(h - want).max() < 1e-12
