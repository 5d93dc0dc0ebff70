"""Oscillatory integrals G(u) = int_0^u x^-a e^{2 pi i x} dx.

Three regimes share the work: a power series near the origin, an asymptotic
expansion of the tail int_u^inf for large u, and Gauss-Legendre on
half-period panels in between.  Everything is vectorized over ``u``.
"""

from __future__ import annotations

import math

import numpy as np

_SERIES_MAX = 1.0
_ASYM_MIN = 8.0
_PANEL = 0.5
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def closed_form(a: float) -> complex:
    """int_0^inf x^-a e^{2 pi i x} dx = (2pi)^(a-1) Gamma(1-a) (sin + i cos)(pi a / 2)."""
    r = (2.0 * math.pi) ** (a - 1.0) * math.gamma(1.0 - a)
    return complex(r * math.sin(math.pi * a / 2.0), r * math.cos(math.pi * a / 2.0))


def _series(u: np.ndarray, a: float) -> np.ndarray:
    out = np.zeros(u.shape, dtype=complex)
    if u.size == 0:
        return out
    w = 2j * math.pi * u
    term = np.ones(u.shape, dtype=complex)  # (2 pi i u)^j / j!
    for j in range(80):
        out += term / (j + 1.0 - a)
        term = term * w / (j + 1.0)
        if np.all(np.abs(term) < 1e-18):
            break
    return out * u ** (1.0 - a)


def tail(u: np.ndarray | float, a: float) -> np.ndarray:
    """int_u^inf x^-a e^{2 pi i x} dx by its asymptotic series (u >= 8)."""
    u = np.asarray(u, dtype=float)
    z = 1.0 / (2j * math.pi * u)
    acc = np.zeros(u.shape, dtype=complex)
    term = np.ones(u.shape, dtype=complex)
    for j in range(60):
        acc += term
        term = term * (a + j) * z
        if np.all(np.abs(term) < 1e-18):
            break
    frac = u - np.floor(u)
    phase = np.exp(2j * math.pi * frac)
    return -phase * u ** (-a) * acc / (2j * math.pi)


def _panel(lo: np.ndarray, hi: np.ndarray, a: float) -> np.ndarray:
    """Gauss-Legendre on [lo, hi]; the panel never contains the origin."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    f = x ** (-a) * np.exp(2j * math.pi * (x - np.floor(x)))
    return half * (f @ _GL_WEIGHTS)


_grid_cache: dict[float, np.ndarray] = {}


def _grid(a: float) -> np.ndarray:
    """G at the panel boundaries 1, 1.5, ..., 8."""
    g = _grid_cache.get(a)
    if g is None:
        knots = np.arange(_SERIES_MAX, _ASYM_MIN + _PANEL / 2, _PANEL)
        pieces = _panel(knots[:-1], knots[1:], a)
        g = _series(np.array([_SERIES_MAX]), a)[0] + np.concatenate([[0.0], np.cumsum(pieces)])
        _grid_cache[a] = g
    return g


def G(u, a: float) -> np.ndarray:
    """int_0^u x^-a e^{2 pi i x} dx for u >= 0 (vectorized)."""
    u = np.asarray(u, dtype=float)
    flat = u.ravel()
    if np.any(flat < 0):
        raise ValueError("G is defined for u >= 0")
    out = np.zeros(flat.shape, dtype=complex)
    lo = flat <= _SERIES_MAX
    hi = flat >= _ASYM_MIN
    mid = ~(lo | hi)
    out[lo] = _series(flat[lo], a)
    if np.any(hi):
        out[hi] = closed_form(a) - tail(flat[hi], a)
    if np.any(mid):
        um = flat[mid]
        g = _grid(a)
        idx = np.floor((um - _SERIES_MAX) / _PANEL).astype(int)
        start = _SERIES_MAX + _PANEL * idx
        out[mid] = g[idx] + _panel(start, um, a)
    return out.reshape(u.shape)


def integral(lo, hi, a: float) -> np.ndarray:
    """int_lo^hi x^-a e^{2 pi i x} dx."""
    return G(hi, a) - G(lo, a)


def quadrature(lo: float, hi: float, a: float, nodes: int = 24) -> tuple[complex, float]:
    """Independent panel quadrature with a Richardson-style error estimate.

    The interval is split at the half-period points j/2; the first panel is
    graded geometrically when it starts at the origin.  The error
    estimate compares ``nodes`` against ``nodes // 2`` Gauss points.
    """
    if not 0 <= lo < hi:
        raise ValueError("need 0 <= lo < hi")
    cuts = np.arange(math.floor(2 * lo) + 1, math.ceil(2 * hi)) / 2.0
    knots = np.concatenate([[lo], cuts[(cuts > lo) & (cuts < hi)], [hi]])
    p = 1.0 / (1.0 - a)

    def rule(n):
        t, w = np.polynomial.legendre.leggauss(n)
        total = 0j
        for k0, k1 in zip(knots[:-1], knots[1:]):
            if k0 == 0.0:
                # geometric panels toward the origin, then x = s^p on the last
                # one, which turns x^-a dx into p ds
                edges = k1 * 0.5 ** np.arange(0, 51)
                for e0, e1 in zip(edges[1:], edges[:-1]):
                    x = 0.5 * (e1 - e0) * t + 0.5 * (e1 + e0)
                    total += 0.5 * (e1 - e0) * np.sum(w * x ** (-a) * np.exp(2j * math.pi * x))
                s1 = edges[-1] ** (1.0 / p)
                x = (0.5 * s1 * (t + 1.0)) ** p
                total += 0.5 * s1 * np.sum(w * p * np.exp(2j * math.pi * x))
            else:
                # grade geometrically when the panel starts close to the origin
                m = max(1, math.ceil(math.log2(k1 / k0))) if k1 > 2.0 * k0 else 1
                edges = k0 * (k1 / k0) ** (np.arange(m + 1) / m)
                for e0, e1 in zip(edges[:-1], edges[1:]):
                    x = 0.5 * (e1 - e0) * t + 0.5 * (e1 + e0)
                    total += 0.5 * (e1 - e0) * np.sum(w * x ** (-a) * np.exp(2j * math.pi * x))
        return total

    fine = rule(nodes)
    coarse = rule(max(nodes // 2, 4))
    return complex(fine), float(abs(fine - coarse))


def tail_integral(u, a: float) -> np.ndarray:
    """I(u) = int_u^inf x^-a e^{2 pi i x} dx for u >= 0."""
    u = np.asarray(u, dtype=float)
    out = np.empty(u.shape, dtype=complex)
    big = u >= _ASYM_MIN
    out[big] = tail(u[big], a)
    out[~big] = closed_form(a) - G(u[~big], a)
    return out


TABLE_STEP = 1.0 / 1024.0


def _demodulated(u: np.ndarray, a: float) -> np.ndarray:
    # I(u) e^{-2 pi i u}, smooth and free of oscillation
    frac = u - np.floor(u)
    return tail_integral(u, a) * np.exp(-2j * math.pi * frac)


_table_cache: dict[tuple[float, int], tuple[float, np.ndarray, np.ndarray]] = {}


def tail_table(a: float, u_max: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Samples of H(u) = I(u) e^{-2 pi i u} on a uniform grid in s = u^(1-a).

    Returns (step, real part, imaginary part) covering 0 <= u <= u_max with
    room for a four-point stencil.  In the variable s the leading term of G
    is linear, so cubic interpolation is accurate down to the origin.
    """
    n = int(math.ceil(u_max ** (1.0 - a) / TABLE_STEP)) + 4
    key = (a, n)
    hit = _table_cache.get(key)
    if hit is None:
        s = np.arange(n) * TABLE_STEP
        H = _demodulated(s ** (1.0 / (1.0 - a)), a)
        hit = (TABLE_STEP, np.ascontiguousarray(H.real), np.ascontiguousarray(H.imag))
        _table_cache[key] = hit
    return hit


def table_eval(u, a: float, table) -> np.ndarray:
    """Cubic Lagrange interpolation of I(u) from :func:`tail_table`."""
    h, Hr, Hi = table
    u = np.atleast_1d(np.asarray(u, dtype=float))
    t = u ** (1.0 - a) / h
    base = np.clip(np.floor(t).astype(np.int64) - 1, 0, Hr.size - 4)
    t = t - base
    w = (-(t - 1) * (t - 2) * (t - 3) / 6, t * (t - 2) * (t - 3) / 2,
         -t * (t - 1) * (t - 3) / 2, t * (t - 1) * (t - 2) / 6)
    re = sum(wj * Hr[base + j] for j, wj in enumerate(w))
    im = sum(wj * Hi[base + j] for j, wj in enumerate(w))
    frac = u - np.floor(u)
    out = (re + 1j * im) * np.exp(2j * math.pi * frac)
    if a != 0.5:
        small = u < SERIES_CUT
        out[small] = closed_form(a) - u[small] ** (1.0 - a) * near_series(u[small], a)
    return out


SERIES_CUT = 0.05
SERIES_TERMS = 14


def near_series(u, a: float):
    """F(u) with G(u) = u^(1-a) F(u), by Horner on SERIES_TERMS terms (u < SERIES_CUT)."""
    w = 2j * math.pi * np.asarray(u, dtype=float)
    acc = np.zeros(w.shape, dtype=complex)
    for j in range(SERIES_TERMS - 1, -1, -1):
        acc = acc * w / (j + 1.0) + 1.0 / (j + 1.0 - a)
    return acc


POLY_DEG = 8


def band_fit(a: float, u_edges, deg: int = POLY_DEG) -> np.ndarray:
    """Per-interval polynomial fits of H(u) = I(u) e^{-2 pi i u} in s = u^(1-a).

    Row j covers u_edges[j] .. u_edges[j+1] and holds (mid, 1/half) of the
    s-interval, then the real and imaginary monomial coefficients in
    t = (s - mid) / half, lowest degree first.  Fits interpolate at
    Chebyshev nodes.
    """
    u_edges = np.asarray(u_edges, dtype=float)
    s_edges = u_edges ** (1.0 - a)
    nodes = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
    rows = np.empty((s_edges.size - 1, 2 + 2 * (deg + 1)))
    cheb = np.polynomial.chebyshev
    for j, (s0, s1) in enumerate(zip(s_edges[:-1], s_edges[1:])):
        mid, half = 0.5 * (s0 + s1), 0.5 * (s1 - s0)
        H = _demodulated((mid + half * nodes) ** (1.0 / (1.0 - a)), a)
        rows[j, 0] = mid
        rows[j, 1] = 1.0 / half
        rows[j, 2:deg + 3] = cheb.cheb2poly(cheb.chebfit(nodes, H.real, deg))
        rows[j, deg + 3:] = cheb.cheb2poly(cheb.chebfit(nodes, H.imag, deg))
    return rows
