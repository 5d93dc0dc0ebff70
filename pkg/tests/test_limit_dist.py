import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from birkhoff_limit.experiments import box_diamond_residuals, check_gamma_mean
from birkhoff_limit.lattice import (GammaPoint, Lattice2, ReducedFrame, haar_generators,
                                    lattice_of, reduce, reduce_generators)
from birkhoff_limit.limit_dist import (LimitTermParams, _sinc, box_sum, box_sum_batch,
                                       cauchy_gap, d_eps, d_eps_batch, q_term, region_points,
                                       sample_law, sample_values)
from birkhoff_limit.params import Params, Region
from birkhoff_limit.rng import uniforms
from birkhoff_limit.stats import ECDF, ks, ks_critical
from conftest import SQRT2M1

# D_eps at a = 1/2, eps = 0.2 for the first three draws of uniforms(2026, "frozen-d", 3, 5),
# summed term by term with q_term in exact-sum arithmetic
FROZEN = {
    "constant": [-1.9726955714863283, -1.730401880160171, -2.4311190921148413],
    "tail": [-1.0688765640647413, -0.7173213617686315, -1.5287582825581387],
}


def frozen_draws():
    U = uniforms(2026, "frozen-d", 3, 5)
    e, _ = reduce_generators(haar_generators(U[:, :3]))
    return e, np.ascontiguousarray(U[:, 3:])


@pytest.mark.parametrize("coeffs", ["constant", "tail"])
def test_frozen_values_all_paths(coeffs, backend):
    tp = LimitTermParams.make(0.5, 0.2, coeffs)
    e, g = frozen_draws()
    v, cnt = d_eps_batch(e, g, tp, backend=backend)
    np.testing.assert_allclose(v, FROZEN[coeffs], atol=1e-10)
    assert np.all(cnt > 0)
    if backend == "cython":
        vf, _ = d_eps_batch(e, g, tp, fast=True)
        np.testing.assert_allclose(vf, FROZEN[coeffs], atol=1e-10)


@pytest.mark.parametrize("a", [0.3, 0.7])
@pytest.mark.parametrize("coeffs", ["constant", "tail"])
def test_kernel_matches_q_term_sum(a, coeffs):
    tp = LimitTermParams.make(a, 0.3, coeffs)
    U = uniforms(5, "ld-qsum", 3, 5)
    e, _ = reduce_generators(haar_generators(U[:, :3]))
    for i in range(3):
        F = ReducedFrame(e[i][:, 0], e[i][:, 1], None, None)
        g = GammaPoint(*U[i, 3:])
        m1, m2, _, _, total = region_points(F, g, tp)
        want = math.fsum(q_term(F, g, (int(p), int(q)), tp) for p, q in zip(m1, m2))
        assert total == pytest.approx(want, abs=1e-9)
        fast, _ = d_eps_batch(e[i:i + 1], np.ascontiguousarray(U[i:i + 1, 3:]), tp, fast=True)
        assert fast[0] == pytest.approx(want, abs=1e-9)


def test_q_term_nonpositive_X():
    tp = LimitTermParams.make(0.5, 0.2)
    F = reduce(Lattice2(np.eye(2)))
    g = GammaPoint(0.3, 0.7)
    assert q_term(F, g, (0, 1), tp) == 0.0
    assert q_term(F, g, (-1, 4), tp) == 0.0


def test_sinc():
    assert _sinc(0.0) == 1.0
    for z in (9.9e-5, 1.01e-4, 0.3, 2.5, -7.25):
        assert _sinc(z) == pytest.approx(math.sin(math.pi * z) / (math.pi * z), rel=1e-12)


@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True),
       st.integers(10**3, 10**7))
def test_finite_vs_limit_phase(al, x, N):
    tp = LimitTermParams.make(0.5, 0.3)
    F = reduce(lattice_of(N, al))
    from birkhoff_limit.lattice import gamma_of

    g = gamma_of(F, x, N)
    for m in ((1, 0), (0, 1), (2, -1), (1, 3)):
        from birkhoff_limit.lattice import coords

        pc = coords(F, m)
        if pc.X <= 0:
            continue
        q, h = q_term(F, g, m, tp), q_term(F, g, m, tp, phase=N)
        cst = 2 / (0.5 * 0.3**0.5)
        env = (2 * math.sqrt(2) * 0.5 * pc.X**-0.5 + 2 * cst / (2 * math.pi * pc.X)) * abs(_sinc(pc.Z))
        assert abs(h - q) <= math.pi * abs(pc.Z) / N * env + 1e-12


@pytest.mark.parametrize("coeffs", ["constant", "tail"])
def test_frame_sign_invariance(coeffs):
    tp = LimitTermParams.make(0.5, 0.2, coeffs)
    e, g = frozen_draws()
    base, _ = d_eps_batch(e, g, tp)
    for flip in ([-1, 1], [1, -1], [-1, -1]):
        ef = np.ascontiguousarray(e * np.array(flip)[None, None, :])
        gf = np.ascontiguousarray(np.mod(g * np.array(flip)[None, :], 1.0))
        v, _ = d_eps_batch(ef, gf, tp)
        np.testing.assert_allclose(v, base, atol=1e-11)


def test_terms_average_to_zero_over_gamma():
    tp = LimitTermParams.make(0.5, 0.3)
    e, _ = frozen_draws()
    F = ReducedFrame(e[0][:, 0], e[0][:, 1], None, None)
    m1, m2, _, _, _ = region_points(F, GammaPoint(0.0, 0.0), tp)
    M = 101
    grid = (np.arange(M) + 0.25) / M
    # the term is a character in gamma: averaging one coordinate over M points kills it
    for p, q in list(zip(m1, m2))[:12]:
        p, q = int(p), int(q)
        if q % M:
            pts = [GammaPoint(0.37, t) for t in grid]
        elif p % M:
            pts = [GammaPoint(s, 0.37) for s in grid]
        else:
            continue
        assert abs(math.fsum(q_term(F, g, (p, q), tp) for g in pts) / M) < 1e-10


def test_gamma_mean_monte_carlo():
    assert check_gamma_mean(0.5, 0.2, 20000, 3).passed


def test_empty_region_is_zero():
    tp = LimitTermParams.make(0.5, 0.4)
    t = 10.0 * Region(0.5, 0.4).x_hi
    L = Lattice2(np.diag([t, 1.0 / t]))
    assert d_eps(L, GammaPoint(0.2, 0.4), tp) == 0.0


def test_box_sum_empty_and_scalar():
    p = Params(0.5, 10**4, 0.1)
    v, _ = box_sum_batch([SQRT2M1], [0.3], p)
    assert box_sum(SQRT2M1, 0.3, p) == v[0]


def test_box_backends_agree():
    U = uniforms(8, "ld-box", 100, 2)
    p = Params(0.5, 10**4, 0.2)
    for co in ("constant", "tail"):
        c, cc = box_sum_batch(U[:, 0], U[:, 1], p, backend="cython", coeffs=co)
        f, cf = box_sum_batch(U[:, 0], U[:, 1], p, backend="python", coeffs=co)
        np.testing.assert_allclose(c, f, atol=1e-10)
        assert np.array_equal(cc, cf)


def test_box_equals_diamond_over_region_indices():
    res, skipped = box_diamond_residuals(Params(0.5, 10**4, 0.2), 40, 4)
    assert res.size + skipped == 40 and res.max() <= 1e-9


@pytest.mark.parametrize("coeffs", ["constant", "tail"])
def test_box_law_tracks_lattice_law(coeffs):
    n, eps = 5000, 0.1
    D = ECDF(sample_values(LimitTermParams.make(0.5, eps, coeffs), n, 1))
    U = uniforms(1, "box-law", n, 2)
    d = {}
    for N in (10**3, 10**5):
        b, _ = box_sum_batch(U[:, 0], U[:, 1], Params(0.5, N, eps), fast=True, coeffs=coeffs)
        d[N] = ks(ECDF(b), D)
    assert d[10**5] <= 0.05
    assert d[10**5] <= d[10**3] + ks_critical(n, n)


def test_sample_law_point_mass():
    F = sample_law(LimitTermParams.make(0.5, 0.3), 1, 0)
    assert F.n == 1 and F(F.samples[0]) == 1.0


def test_sampling_thread_invariance():
    tp = LimitTermParams.make(0.5, 0.2)
    a = sample_values(tp, 3000, 9, nthreads=1)
    b = sample_values(tp, 3000, 9, nthreads=4)
    assert np.array_equal(a, b)


def test_cauchy_gap():
    tps = {e: LimitTermParams.make(0.5, e) for e in (0.2, 0.1, 0.05)}
    assert cauchy_gap(tps[0.1], tps[0.1], 0.5, 2000).estimate == 0.0
    big = cauchy_gap(tps[0.2], tps[0.1], 1e6, 2000)
    assert big.estimate == 0.0
    g1 = cauchy_gap(tps[0.2], tps[0.1], 0.5, 5000)
    g2 = cauchy_gap(tps[0.1], tps[0.05], 0.5, 5000)
    assert g2.estimate < g1.estimate
    with pytest.raises(ValueError):
        cauchy_gap(tps[0.2], LimitTermParams.make(0.3, 0.2), 0.5, 10)
