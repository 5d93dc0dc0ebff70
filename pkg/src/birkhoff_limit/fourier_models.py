"""Fourier terms of the capped observable and the resonant model sums.

The per-frequency term is

    g_k = A_k cos(theta_k) D_k + B_k sin(theta_k) D_k

with A_k, B_k built from the oscillatory coefficients and the cap, the phase
theta_k = 2 pi {k x} + pi (N-1) {k alpha} and the Dirichlet kernel
D_k = sin(pi N {k alpha}) / sin(pi {k alpha}).  Phases are reduced with the
signed fractional parts so that large k loses no accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _backend, oscillatory
from .params import Params
from .rotation import ResonantSet, signed_frac

MODELS = ("bar", "tilde", "hat", "diamond")


class ResonanceError(ZeroDivisionError):
    """A summed frequency has a vanishing small denominator."""

    def __init__(self, k: int, msg: str = ""):
        super().__init__(msg or f"vanishing denominator at k={k}")
        self.k = k


@dataclass(frozen=True)
class OscCoeffs:
    """b + i d = int_{k eps/N}^k x^-a e^{2 pi i x} dx."""

    b: float
    d: float
    k: int
    quadrature_error: float


@dataclass(frozen=True)
class LimitCoeffs:
    """b + i d = int_0^inf x^-a e^{2 pi i x} dx, with the closed form alongside."""

    a: float
    b: float
    d: float
    closed_b: float
    closed_d: float
    error: float


_PANEL_LIMIT = 20000


def osc_coeffs(k: int, p: Params) -> OscCoeffs:
    """Panel quadrature of the coefficient integrals.

    Long ranges are cut at u = 8: panels below, and the asymptotic tail
    difference above, whose first dropped term bounds the error.
    """
    lo, hi = k * p.eps / p.N, float(k)
    if 2.0 * (hi - lo) <= _PANEL_LIMIT or hi <= 8.0:
        v, err = oscillatory.quadrature(lo, hi, p.a)
    else:
        mid = max(lo, 8.0)
        v, err = (0j, 0.0) if mid == lo else oscillatory.quadrature(lo, mid, p.a)
        v += complex(oscillatory.tail(mid, p.a) - oscillatory.tail(hi, p.a))
        err += 1e-15 * (mid ** -p.a)
    return OscCoeffs(v.real, v.imag, int(k), err)


@lru_cache(maxsize=32)
def limit_coeffs(a: float) -> LimitCoeffs:
    """Quadrature on (0, 64) plus the asymptotic tail, checked against the closed form."""
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0, 1)")
    q, err = oscillatory.quadrature(0.0, 64.0, a)
    v = q + complex(oscillatory.tail(64.0, a))
    c = oscillatory.closed_form(a)
    return LimitCoeffs(a, v.real, v.imag, c.real, c.imag, err)


def osc_coeff_array(ks, p: Params) -> np.ndarray:
    """b_k + i d_k for an integer array, via the vectorized G."""
    ks = np.asarray(ks, dtype=float)
    return oscillatory.integral(ks * (p.eps / p.N), ks, p.a)


ENVELOPES = ("b", "d", "sin", "cos")


def envelope_ratios(ks, p: Params) -> np.ndarray:
    """Ratios of |b_k|, |d_k|, |sin(2 pi r)|, |cos(2 pi r) - 1| to their envelopes.

    With r = k eps / N the coefficients are bounded by min{1, r^-a} and the
    cap factors by min{1, r^a}, up to one constant depending on a.  Returns
    a (4, len(ks)) array whose supremum estimates that constant.
    """
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    r = ks * (p.eps / p.N)
    bd = osc_coeff_array(ks, p)
    up = np.maximum(1.0, r**p.a)
    down = np.maximum(1.0, r ** (-p.a))
    return np.stack([np.abs(bd.real) * up, np.abs(bd.imag) * up,
                     np.abs(np.sin(2 * np.pi * r)) * down,
                     np.abs(np.cos(2 * np.pi * r) - 1.0) * down])


def _cap_parts(ks: np.ndarray, p: Params) -> tuple[np.ndarray, np.ndarray]:
    beta = 2.0 * np.pi * ks * p.cut
    cst = 2.0 / ((1.0 - p.a) * p.eps**p.a)
    s = np.sin(np.pi * ks * p.cut)
    return (cst * np.sin(beta) / (2.0 * np.pi * ks),
            cst * 2.0 * s * s / (2.0 * np.pi * ks))


def term_coeffs(ks, p: Params, variant: str = "exact") -> tuple[np.ndarray, np.ndarray]:
    """(A_k, B_k) for the exact or tilde variant."""
    ks = np.asarray(ks, dtype=float)
    if variant == "exact":
        bd = osc_coeff_array(ks, p)
    elif variant == "tilde":
        lc = limit_coeffs(p.a)
        bd = np.full(ks.shape, complex(lc.closed_b, lc.closed_d))
    else:
        raise ValueError(f"variant must be 'exact' or 'tilde', got {variant!r}")
    scale = 2.0 / (ks ** (1.0 - p.a) * p.N**p.a)
    ca, cb = _cap_parts(ks, p)
    return scale * bd.real + ca, scale * bd.imag + cb


@dataclass
class CoeffTable:
    """Dense (A_k, B_k) arrays indexed by k, shared by batch sums."""

    p: Params
    variant: str
    A: np.ndarray
    B: np.ndarray

    @classmethod
    def build(cls, p: Params, kmax: int, variant: str = "exact") -> "CoeffTable":
        ks = np.arange(1, kmax + 1)
        A, B = term_coeffs(ks, p, variant)
        return cls(p, variant, np.concatenate([[0.0], A]), np.concatenate([[0.0], B]))

    @property
    def kmax(self) -> int:
        return self.A.size - 1


def term_g(k: int, alpha: float, x: float, p: Params, variant: str = "exact") -> float:
    """Single Fourier term g_k (exact) or its tilde approximation."""
    A, B = term_coeffs(np.array([k]), p, variant)
    s = signed_frac(k, alpha).value
    t = signed_frac(k, x).value
    if variant == "exact":
        den = math.sin(math.pi * s)
        if abs(den) < 1e-12:
            raise ResonanceError(k)
    else:
        if s == 0.0:
            raise ResonanceError(k)
        den = math.pi * s
    th = 2.0 * math.pi * t + math.pi * (p.N - 1) * s
    ker = math.sin(math.pi * p.N * s) / den
    return float((A[0] * math.cos(th) + B[0] * math.sin(th)) * ker)


def model_spec(model: str, p: Params) -> tuple[int, int, float, str]:
    """(k_lo, k_hi, threshold, variant) describing a model's index set."""
    if model == "bar":
        return 1, p.k_max, math.inf, "exact"
    if model == "tilde":
        return 1, p.k_max, p.res_threshold, "exact"
    if model == "hat":
        return p.k_hat_min, p.k_max, p.res_threshold, "exact"
    if model == "diamond":
        return p.k_hat_min, p.k_max, p.res_threshold, "tilde"
    raise ValueError(f"unknown model {model!r}")


def model_sum_batch(alpha, x, p: Params, model: str, *, table: CoeffTable | None = None,
                    nthreads: int = 1, backend: str | None = None) -> np.ndarray:
    """Model sums for arrays of (alpha, x); raises ResonanceError on bad k."""
    alpha = np.ascontiguousarray(alpha, dtype=float)
    x = np.ascontiguousarray(x, dtype=float)
    lo, hi, thr, variant = model_spec(model, p)
    if hi < lo:
        return np.zeros(alpha.shape)
    if table is None or table.variant != variant or table.kmax < hi or table.p != p:
        table = CoeffTable.build(p, hi, variant)
    kern = _backend.get(backend)
    out, cnt = kern.fourier_sum_batch(alpha, x, p.N, lo, hi, table.A, table.B, thr, p.a,
                                      variant == "tilde", nthreads)
    if np.any(cnt < 0):
        k = int(-cnt[np.argmax(cnt < 0)])
        raise ResonanceError(k, f"model {model!r}: vanishing denominator at k={k}")
    return out


def model_sum(alpha: float, x: float, p: Params, model: str,
              index_override: ResonantSet | None = None) -> float:
    """Sum of g_k over the model's index set (or over ``index_override``)."""
    if index_override is None:
        return float(model_sum_batch([alpha], [x], p, model)[0])
    _, _, _, variant = model_spec(model, p)
    ks = np.asarray(index_override.indices, dtype=np.int64)
    if ks.size == 0:
        return 0.0
    A, B = term_coeffs(ks, p, variant)
    try:
        return float(_backend.kernels.fourier_sum_indices(
            float(alpha), float(x), p.N, ks, A, B, variant == "tilde"))
    except ZeroDivisionError as exc:
        k = int(exc.args[0]) if exc.args and isinstance(exc.args[0], int) else -1
        raise ResonanceError(k) from exc


# ---------------------------------------------------------------------------
# reconstruction of Delta from its Fourier series


def jumps(p: Params) -> np.ndarray:
    """[f]_0, [f']_0, [f]_c, [f']_c for the capped observable (c = eps/N)."""
    a, c = p.a, p.cut
    return np.array([
        p.cap - 1.0 + 1.0 / (1.0 - a),
        a,
        c ** (-a) - 1.0 / (1.0 - a) - p.cap,
        -a * c ** (-a - 1.0),
    ])


def _rising(a: float, j: int) -> float:
    return math.prod(a + i for i in range(j))


def fourier_coeff(ks, p: Params) -> np.ndarray:
    """Complex Fourier coefficients of the capped observable at k >= 1."""
    ks = np.asarray(ks, dtype=float)
    bd = osc_coeff_array(ks, p)
    scale = (p.N / p.eps) ** p.a / (1.0 - p.a)
    cap_part = scale * (1.0 - np.exp(-2j * np.pi * ks * p.cut)) / (2j * np.pi * ks)
    return ks ** (p.a - 1.0) * (bd.real - 1j * bd.imag) + cap_part


def _jump_coeff(ks, p: Params) -> np.ndarray:
    J = jumps(p)
    w = 2j * np.pi * np.asarray(ks, dtype=float)
    e = np.exp(-2j * np.pi * np.asarray(ks, dtype=float) * p.cut)
    return J[0] / w + J[1] / w**2 + e * (J[2] / w + J[3] / w**2)


@dataclass
class Reconstruction:
    """Fourier-series value of Delta with the certified truncation bound."""

    value: np.ndarray
    K: np.ndarray
    bound: np.ndarray
    smooth_part: np.ndarray = field(repr=False)
    jump_part: np.ndarray = field(repr=False)


def tail_bound(K, inv0, inv1, p: Params) -> np.ndarray:
    """Bound on the dropped frequencies k > K, normalized by N^a.

    The orders j = 2, 3 of the jump expansion are bounded by Abel summation
    against the orbit sums of 1/|sin pi(y - p)|; the remainder uses the total
    variation of the fourth derivative.
    """
    a, c, N = p.a, p.cut, p.N
    K = np.asarray(K, dtype=float)
    total = np.zeros(np.broadcast(K, inv0).shape)
    for j in (2, 3):
        r = _rising(a, j)
        total += r * 2.0 / (2 * np.pi) ** (j + 1) / K ** (j + 1) * inv0
        total += r * c ** (-a - j) * 2.0 / (2 * np.pi) ** (j + 1) / K ** (j + 1) * inv1
    W4 = 2.0 * _rising(a, 4) * (c ** (-a - 4.0) + 1.0)
    total += 2.0 * N * W4 / ((2 * np.pi) ** 5 * 4.0 * K**4)
    return total / N**a


def choose_K(inv0, inv1, p: Params, target: float) -> np.ndarray:
    """Smallest power-of-two-ish K meeting ``tail_bound <= target``."""
    inv0 = np.atleast_1d(np.asarray(inv0, dtype=float))
    inv1 = np.atleast_1d(np.asarray(inv1, dtype=float))
    K = np.full(inv0.shape, 16.0)
    for _ in range(80):
        bad = tail_bound(K, inv0, inv1, p) > target
        if not np.any(bad):
            break
        K = np.where(bad, np.ceil(K * 1.25), K)
    return K.astype(np.int64)


def reconstruct(alpha, x, p: Params, tol: float = 1e-6, *, K=None, nthreads: int = 1,
                backend: str | None = None) -> Reconstruction:
    """Delta as its Fourier series, with the jump part summed in closed form.

    The first two orders of the jump expansion at 0 and eps/N are
    subtracted from every coefficient and added back through periodic
    Bernoulli polynomials on the orbit.  The truncated sum over k <= K of the
    remaining smooth coefficients then converges fast enough for
    ``tol``-accurate pointwise values; K is chosen per point so that the
    certified tail bound stays below tol/4.
    """
    alpha = np.ascontiguousarray(np.atleast_1d(alpha), dtype=float)
    x = np.ascontiguousarray(np.atleast_1d(x), dtype=float)
    kern = _backend.get(backend)
    J = jumps(p)
    zero = np.zeros(1)
    pre = kern.reconstruct_batch(alpha, x, p.N, np.zeros(alpha.size, dtype=np.int64),
                                 zero, zero, J, p.cut, nthreads)
    inv0, inv1 = pre[:, 2], pre[:, 3]
    if K is None:
        K = choose_K(inv0, inv1, p, tol / 4.0)
    K = np.broadcast_to(np.asarray(K, dtype=np.int64), alpha.shape).copy()
    kmax = int(K.max()) if K.size else 0
    ks = np.arange(1, kmax + 1)
    R = fourier_coeff(ks, p) - _jump_coeff(ks, p)
    Rre = np.concatenate([[0.0], R.real])
    Rim = np.concatenate([[0.0], R.imag])
    res = kern.reconstruct_batch(alpha, x, p.N, K, Rre, Rim, J, p.cut, nthreads)
    norm = p.N ** (-p.a)
    smooth = res[:, 0] * norm
    jump = res[:, 1] * norm
    return Reconstruction(smooth + jump, K, tail_bound(K, inv0, inv1, p), smooth, jump)
