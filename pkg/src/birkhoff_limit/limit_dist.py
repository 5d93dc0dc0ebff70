"""The lattice functional D_eps, its finite-N twin and Monte Carlo laws.

Both sums run over the resonant region of the reduced frame:
x_lo < X < x_hi and |Z| <= z_coef X^(a-1).  For L(N, alpha) the region is
further cut to the strip -N/2 < Z <= N/2, where each lattice vector is the
image of exactly one frequency k with k' from the signed fractional part.

Two coefficient choices are available.  "constant" uses b + i d, the full
integral of x^-a e^{2 pi i x} over (0, inf).  "tail" uses I(X eps), the
integral over (X eps, inf), which is what the exact Fourier coefficients of
the truncated observable tend to at fixed X as N grows.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import _backend, oscillatory, rng as rngmod
from .fourier_models import LimitCoeffs, limit_coeffs
from .lattice import (GammaPoint, Lattice2, ReducedFrame, coords, gamma_from_u,
                      haar_generators, reduce, reduce_generators, reduce_shear)
from .params import Params, Region
from .stats import ECDF, MCResult, wilson


COEFFS = ("constant", "tail")


@dataclass(frozen=True)
class LimitTermParams:
    eps: float
    a: float
    limit_coeffs: LimitCoeffs
    radius: float
    coeffs: str = "constant"

    def __post_init__(self):
        if self.coeffs not in COEFFS:
            raise ValueError(f"coeffs must be one of {COEFFS}")

    @classmethod
    def make(cls, a: float, eps: float, coeffs: str = "constant") -> "LimitTermParams":
        return cls(eps, a, limit_coeffs(a), Region(a, eps).radius, coeffs)

    @property
    def tail(self):
        """Kernel argument for the "tail" coefficients, or None."""
        if self.coeffs != "tail":
            return None
        return _tail_args(self.a, self.eps)

    @property
    def region(self) -> Region:
        return Region(self.a, self.eps)

    @property
    def b(self) -> float:
        return self.limit_coeffs.closed_b

    @property
    def d(self) -> float:
        return self.limit_coeffs.closed_d


@functools.lru_cache(maxsize=16)
def _tail_args(a: float, eps: float):
    R = Region(a, eps)
    h, re, im = oscillatory.tail_table(a, R.x_hi * eps)
    poly = oscillatory.band_fit(a, R.band_edges() * eps) if a == 0.5 else None
    return h, re, im, oscillatory.closed_form(a), poly


def _sinc(Z: float) -> float:
    if abs(Z) < 1e-4:
        pz = math.pi * Z
        return 1.0 - pz * pz / 6.0 + pz**4 / 120.0
    return math.sin(math.pi * math.fmod(Z, 2.0)) / (math.pi * Z)


def q_term(F: ReducedFrame, gamma: GammaPoint, m, tp: LimitTermParams, phase="limit") -> float:
    """Limit kernel q (phase="limit") or the finite-N term h_m (phase=N)."""
    pc = coords(F, m)
    X, Z = pc.X, pc.Z
    if X <= 0:
        return 0.0
    a, eps = tp.a, tp.eps
    cst = 2.0 / ((1.0 - a) * eps**a)
    sx = math.sin(math.pi * X * eps)
    b, d = tp.b, tp.d
    if tp.coeffs == "tail":
        I = complex(oscillatory.tail_integral(np.array([X * eps]), a)[0])
        b, d = I.real, I.imag
    A = 2.0 * b * X ** (a - 1.0) + cst * math.sin(2 * math.pi * X * eps) / (2 * math.pi * X)
    B = 2.0 * d * X ** (a - 1.0) + cst * 2.0 * sx * sx / (2 * math.pi * X)
    turns = float(_frac_m_gamma(pc.m, gamma))
    th = 2.0 * math.pi * turns + math.pi * math.fmod(Z, 2.0)
    if phase != "limit":
        th -= math.pi * Z / float(phase)
    return (A * math.cos(th) + B * math.sin(th)) * _sinc(Z)


def _frac_m_gamma(m, gamma: GammaPoint) -> float:
    from ._fallback import _frac_turn

    return _frac_turn(float(m[0]), gamma.g1) + _frac_turn(float(m[1]), gamma.g2)


def _region_args(tp: LimitTermParams):
    R = tp.region
    return tp.a, tp.eps, tp.b, tp.d, R.x_lo, R.x_hi, R.z_coef


def region_points(F: ReducedFrame, gamma: GammaPoint, tp: LimitTermParams, N: int | None = None,
                  *, backend: str | None = None):
    """Region points (m1, m2, X, Z) of one frame and the sum over them."""
    kern = _backend.get(backend)
    shear = F.source.shear if F.source is not None else None
    kw = {}
    if N is not None:
        if shear is None or shear[0] != N:
            raise ValueError("finite phase needs the frame of L(N, alpha)")
        kw = dict(zstrip=N / 2.0, finite_N=float(N), shear_alpha=shear[1],
                  shear_u=np.ascontiguousarray(F.unimodular_integer, dtype=np.int64))
    return kern.lattice_points(np.ascontiguousarray(F.matrix), gamma.as_array(),
                               *_region_args(tp), tail=tp.tail, **kw)


def d_eps_batch(frames, gammas, tp: LimitTermParams, *, fast: bool = False,
                nthreads: int = 1, backend: str | None = None):
    """D_eps for reduced frames (n, 2, 2) and gammas (n, 2); returns (values, counts)."""
    kern = _backend.get(backend)
    args = dict(fast=fast) if kern.__name__.endswith("_core") else {}
    return kern.lattice_sum_batch(np.ascontiguousarray(frames, dtype=float),
                                  np.ascontiguousarray(gammas, dtype=float),
                                  *_region_args(tp), nthreads=nthreads, tail=tp.tail,
                                  **args)


def d_eps(L: Lattice2, gamma: GammaPoint, tp: LimitTermParams) -> float:
    F = reduce(L)
    v, _ = d_eps_batch(F.matrix[None], gamma.as_array()[None], tp)
    return float(v[0])


def box_sum_batch(alpha, x, p: Params, *, fast: bool = False, nthreads: int = 1,
                  backend: str | None = None, coeffs: str = "constant"):
    """Finite-N lattice sums over the resonant strip region; returns (values, counts)."""
    alpha = np.ascontiguousarray(alpha, dtype=float)
    x = np.ascontiguousarray(x, dtype=float)
    kern = _backend.get(backend)
    e, u = reduce_shear(p.N, alpha, nthreads=nthreads, backend=backend)
    g = np.ascontiguousarray(gamma_from_u(x, u[:, 0, 0], u[:, 0, 1]), dtype=float)
    tp = LimitTermParams.make(p.a, p.eps, coeffs)
    args = dict(fast=fast) if kern.__name__.endswith("_core") else {}
    return kern.lattice_sum_batch(e, g, *_region_args(tp), zstrip=p.N / 2.0,
                                  finite_N=float(p.N), shear_alpha=alpha, shear_u=u,
                                  nthreads=nthreads, tail=tp.tail, **args)


def box_sum(alpha: float, x: float, p: Params, coeffs: str = "constant") -> float:
    return float(box_sum_batch([alpha], [x], p, coeffs=coeffs)[0][0])


def law_draws(tp: LimitTermParams, n: int, seed: int, *, tag: str = "limit-law",
              start: int = 0):
    """Reduced Haar frames and uniform gammas for draws start .. start+n-1."""
    U = rngmod.uniforms(seed, tag, n, 5, start)
    e, _ = reduce_generators(haar_generators(U[:, :3]))
    return e, np.ascontiguousarray(U[:, 3:5])


def sample_values(tp: LimitTermParams, n: int, seed: int, *, tag: str = "limit-law",
                  fast: bool = True, nthreads: int = 1, block: int = 1 << 14) -> np.ndarray:
    """D_eps on n independent (Haar lattice, uniform gamma) draws."""
    out = np.empty(n)
    for s in range(0, n, block):
        m = min(block, n - s)
        e, g = law_draws(tp, m, seed, tag=tag, start=s)
        out[s:s + m] = d_eps_batch(e, g, tp, fast=fast, nthreads=nthreads)[0]
    return out


def sample_law(tp: LimitTermParams, n: int, rng=0, **kw) -> ECDF:
    """ECDF of D_eps over n draws; ``rng`` is the integer seed."""
    return ECDF(sample_values(tp, n, int(rng), **kw))


def cauchy_gap(tp: LimitTermParams, tp2: LimitTermParams, delta: float, n: int, rng=0,
               **kw) -> MCResult:
    """Fraction of coupled draws with |D_eps - D_eps'| > delta."""
    if tp.a != tp2.a:
        raise ValueError("coupled laws need the same exponent")
    seed = int(rng)
    v1 = sample_values(tp, n, seed, **kw)
    v2 = v1 if tp2 == tp else sample_values(tp2, n, seed, **kw)
    hits = int(np.count_nonzero(np.abs(v1 - v2) > delta))
    lo, hi = wilson(hits, n)
    return MCResult(hits / n, lo, hi, n, seed)


def box_indices(alpha: float, p: Params, *, backend: str | None = None):
    """Frequencies k whose lattice vectors in L(N, alpha) fall in the strip region."""
    from .lattice import lattice_of
    from .rotation import ResonantSet

    F = reduce(lattice_of(p.N, alpha), backend=backend)
    tp = LimitTermParams.make(p.a, p.eps)
    m1, m2, _, _, _ = region_points(F, GammaPoint(0.0, 0.0), tp, p.N, backend=backend)
    k = m1 * int(F.u1[0]) + m2 * int(F.u2[0])
    return ResonantSet(np.sort(k), "box", 0)
