"""Pure numpy versions of the compiled kernels.

Same signatures and return conventions as ``_core``.  The error-free
product uses Veltkamp splitting, so signed fractional parts agree bit for bit
with the fma-based compiled path.  ``nthreads`` is accepted and ignored.
"""

from __future__ import annotations

import math

import numpy as np

_SPLIT = 134217729.0  # 2^27 + 1


def _two_prod(a, b):
    p = a * b
    c = _SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _sfrac(k, x):
    k = np.asarray(k, dtype=float)
    x = np.asarray(x, dtype=float)
    p, e = _two_prod(k, x)
    r = np.rint(p)
    v = (p - r) + e
    hi = v > 0.5
    lo = v <= -0.5
    v = np.where(hi, v - 1.0, np.where(lo, v + 1.0, v))
    r = np.where(hi, r + 1.0, np.where(lo, r - 1.0, r))
    return v, -r


def _frac_turn(k, x):
    p, e = _two_prod(np.asarray(k, dtype=float), np.asarray(x, dtype=float))
    return (p - np.rint(p)) + e


def _cdot(a1, b1, a2, b2):
    p1, q1 = _two_prod(a1, b1)
    p2, q2 = _two_prod(a2, b2)
    s = p1 + p2
    bb = s - p1
    err = (p1 - (s - bb)) + (p2 - bb)
    return s + (err + q1 + q2)


def _shear_z(k, kp, al, N):
    p, e = _two_prod(np.asarray(k, dtype=float), al)
    return N * ((p + kp) + e)


def _fsum(v) -> float:
    return math.fsum(np.asarray(v, dtype=float).tolist())


def signed_frac(k, alpha):
    v, kp = _sfrac(float(k), float(alpha))
    return float(v), float(kp)


def _orbit(al, x, N):
    n = np.arange(N, dtype=float)
    v, _ = _sfrac(n, al)
    y = x + v
    y = y - np.floor(y)
    return np.where(y >= 1.0, y - 1.0, y)


def birkhoff_batch(alpha, x, a, N, eps, truncated, nthreads=1):
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    cut = eps / N
    cap = ((N / eps) ** a - 1.0) / (1.0 - a)
    mean = 1.0 / (1.0 - a)
    out = np.empty(alpha.shape[0])
    for i in range(alpha.shape[0]):
        y = _orbit(alpha[i], x[i], N)
        if truncated:
            capped = y < cut
            with np.errstate(divide="ignore"):
                v = np.where(capped, cap, y ** (-a) - mean)
        else:
            if np.any(y == 0.0):
                out[i] = np.nan
                continue
            v = y ** (-a) - mean
        out[i] = _fsum(v) * N ** (-a)
    return out


def resonant_scan(alpha, a, k_lo, k_hi, thr):
    chunks = []
    zeros = 0
    block = 1 << 16
    for k0 in range(int(k_lo), int(k_hi) + 1, block):
        k = np.arange(k0, min(k0 + block - 1, int(k_hi)) + 1, dtype=np.int64)
        s = np.abs(_sfrac(k.astype(float), alpha)[0])
        zeros += int(np.count_nonzero(s == 0.0))
        keep = k.astype(float) ** (1.0 - a) * s <= thr
        chunks.append(k[keep])
    if chunks:
        return np.concatenate(chunks), zeros
    return np.empty(0, dtype=np.int64), zeros


def _g_terms(k, al, x, N, A, B, tilde):
    k = np.asarray(k, dtype=float)
    s, _ = _sfrac(k, al)
    t, _ = _sfrac(k, x)
    if tilde:
        bad = s == 0.0
        den = np.pi * s
    else:
        den = np.sin(np.pi * s)
        bad = np.abs(den) < 1e-12
    th = 2.0 * np.pi * t + np.pi * (N - 1.0) * s
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (A * np.cos(th) + B * np.sin(th)) * (np.sin(np.pi * N * s) / den)
    return v, bad


def fourier_sum_batch(alpha, x, N, k_lo, k_hi, A, B, thr, a, tilde, nthreads=1):
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if k_hi >= A.shape[0] or k_hi >= B.shape[0]:
        raise ValueError("coefficient arrays too short")
    n = alpha.shape[0]
    out = np.zeros(n)
    cnt = np.zeros(n, dtype=np.int64)
    if k_hi < k_lo:
        return out, cnt
    k = np.arange(k_lo, k_hi + 1, dtype=np.int64)
    kf = k.astype(float)
    for i in range(n):
        kk = k
        if thr != np.inf:
            s = np.abs(_sfrac(kf, alpha[i])[0])
            kk = k[kf ** (1.0 - a) * s <= thr]
        v, bad = _g_terms(kk, alpha[i], x[i], float(N), A[kk], B[kk], tilde)
        if np.any(bad):
            out[i] = np.nan
            cnt[i] = -int(kk[np.argmax(bad)])
            continue
        out[i] = _fsum(v)
        cnt[i] = kk.size
    return out, cnt


def fourier_sum_indices(alpha, x, N, ks, A, B, tilde):
    ks = np.asarray(ks, dtype=np.int64)
    v, bad = _g_terms(ks, alpha, x, float(N), np.asarray(A), np.asarray(B), tilde)
    if np.any(bad):
        raise ZeroDivisionError(int(ks[np.argmax(bad)]))
    return _fsum(v)


def reconstruct_batch(alpha, x, N, K, Rre, Rim, jumps, cut, nthreads=1):
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    K = np.asarray(K, dtype=np.int64)
    if np.any(K >= len(Rre)):
        raise ValueError("coefficient arrays too short")
    out = np.zeros((alpha.shape[0], 4))
    for i in range(alpha.shape[0]):
        k = np.arange(1, K[i] + 1, dtype=float)
        s, _ = _sfrac(k, alpha[i])
        t, _ = _sfrac(k, x[i])
        den = np.sin(np.pi * s)
        if np.any(np.abs(den) < 1e-12):
            out[i, 0] = np.nan
            continue
        D = np.sin(np.pi * N * s) / den
        th = 2.0 * np.pi * t + np.pi * (N - 1.0) * s
        ki = k.astype(np.int64)
        out[i, 0] = _fsum(2.0 * (Rre[ki] * np.cos(th) - Rim[ki] * np.sin(th)) * D)
        y = _orbit(alpha[i], x[i], N)
        th0 = y
        th1 = y - cut
        th1 = np.where(th1 < 0.0, th1 + 1.0, th1)
        v = jumps[0] * (0.5 - th0) - jumps[1] * 0.5 * (th0 * th0 - th0 + 1.0 / 6.0)
        v = v + jumps[2] * (0.5 - th1) - jumps[3] * 0.5 * (th1 * th1 - th1 + 1.0 / 6.0)
        out[i, 1] = _fsum(v)
        with np.errstate(divide="ignore"):
            out[i, 2] = np.sum(1.0 / np.abs(np.sin(np.pi * th0)))
            out[i, 3] = np.sum(1.0 / np.abs(np.sin(np.pi * th1)))
    return out


# --------------------------------------------------------------------------
# Gauss reduction


def _vec(u, G, shear, N, al):
    ux, uz = float(u[0]), float(u[1])
    if shear:
        return ux / N, float(_shear_z(ux, uz, al, N))
    return float(_cdot(ux, G[0, 0], uz, G[0, 1])), float(_cdot(ux, G[1, 0], uz, G[1, 1]))


def _better(a, b):
    if a[0] != b[0]:
        return a[0] > b[0]
    return a[1] > b[1]


def _gauss(G, shear, N, al):
    a1 = [1, 0]
    a2 = [0, 1]
    v1 = _vec(a1, G, shear, N, al)
    v2 = _vec(a2, G, shear, N, al)
    n1 = v1[0] ** 2 + v1[1] ** 2
    n2 = v2[0] ** 2 + v2[1] ** 2
    if n2 < n1:
        a1, a2, v1, v2, n1, n2 = a2, a1, v2, v1, n2, n1
    for _ in range(500):
        mu = int(np.rint((v1[0] * v2[0] + v1[1] * v2[1]) / n1))
        if mu != 0:
            a2 = [a2[0] - mu * a1[0], a2[1] - mu * a1[1]]
            v2 = _vec(a2, G, shear, N, al)
            n2 = v2[0] ** 2 + v2[1] ** 2
        if n2 < n1:
            a1, a2, v1, v2, n1, n2 = a2, a1, v2, v1, n2, n1
            continue
        break
    else:
        return None
    cand_u = [a1, a2, [a1[0] + a2[0], a1[1] + a2[1]], [a1[0] - a2[0], a1[1] - a2[1]]]
    cand = []
    for u in cand_u:
        v = _vec(u, G, shear, N, al)
        if v[0] < 0.0 or (v[0] == 0.0 and v[1] < 0.0):
            v = (-v[0] + 0.0, -v[1] + 0.0)
            u = [-u[0], -u[1]]
        cand.append((v, u, v[0] ** 2 + v[1] ** 2))
    tol = 1e-12 * cand[0][2]
    best = 0
    for j in range(1, 4):
        if cand[j][2] < cand[best][2] - tol or (
            abs(cand[j][2] - cand[best][2]) <= tol and _better(cand[j][0], cand[best][0])
        ):
            best = j
    second = -1
    ub = cand[best][1]
    for j in range(4):
        if j == best:
            continue
        uj = cand[j][1]
        if uj[0] * ub[1] - uj[1] * ub[0] == 0:
            continue
        if second < 0 or cand[j][2] < cand[second][2] - tol or (
            abs(cand[j][2] - cand[second][2]) <= tol and _better(cand[j][0], cand[second][0])
        ):
            second = j
    return cand[best], cand[second]


def _pack(res, e, u, st, i):
    if res is None:
        st[i] = -1
        return
    (v1, u1, _), (v2, u2, _) = res
    e[i] = [[v1[0], v2[0]], [v1[1], v2[1]]]
    u[i] = [[u1[0], u2[0]], [u1[1], u2[1]]]


def reduce_batch(gen, nthreads=1):
    gen = np.asarray(gen, dtype=float)
    n = gen.shape[0]
    e = np.empty((n, 2, 2))
    u = np.empty((n, 2, 2), dtype=np.int64)
    st = np.zeros(n, dtype=np.int32)
    for i in range(n):
        _pack(_gauss(gen[i], False, 1.0, 0.0), e, u, st, i)
    return e, u, st


def reduce_shear_batch(N, alpha, nthreads=1):
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.shape[0]
    e = np.empty((n, 2, 2))
    u = np.empty((n, 2, 2), dtype=np.int64)
    st = np.zeros(n, dtype=np.int32)
    for i in range(n):
        _pack(_gauss(None, True, float(N), float(alpha[i])), e, u, st, i)
    return e, u, st


# --------------------------------------------------------------------------
# lattice sums


class _Region:
    def __init__(self, frame, gamma, a, eps, b, d, x_lo, x_hi, zc, zstrip, finite_N,
                 shear_alpha, shear_u, tail=None):
        self.tail = tail
        self.e = np.asarray(frame, dtype=float)
        self.g = np.asarray(gamma, dtype=float)
        self.a = a
        self.eps = eps
        self.b2 = 2.0 * b
        self.d2 = 2.0 * d
        self.cst = 2.0 / ((1.0 - a) * eps**a)
        self.x_lo = x_lo
        self.x_hi = x_hi
        self.zc = zc
        self.zstrip = zstrip
        self.finite = finite_N > 0
        self.N = float(finite_N) if finite_N > 0 else 1.0
        self.shear = shear_alpha is not None
        if self.shear:
            self.al = float(shear_alpha)
            self.u = np.asarray(shear_u, dtype=np.int64)

    def coords(self, m1, m2):
        if self.shear:
            k = m1 * self.u[0, 0] + m2 * self.u[0, 1]
            kp = m1 * self.u[1, 0] + m2 * self.u[1, 1]
            return k / self.N, _shear_z(k.astype(float), kp.astype(float), self.al, self.N)
        m1f = m1.astype(float)
        m2f = m2.astype(float)
        return (_cdot(m1f, self.e[0, 0], m2f, self.e[0, 1]),
                _cdot(m1f, self.e[1, 0], m2f, self.e[1, 1]))

    def terms(self, m1, m2, X, Z):
        xa = X ** (self.a - 1.0)
        sx = np.sin(np.pi * X * self.eps)
        cx = np.cos(np.pi * X * self.eps)
        inv = self.cst / (2.0 * np.pi * X)
        if self.tail is None:
            A = self.b2 * xa + inv * 2.0 * sx * cx
            B = self.d2 * xa + inv * 2.0 * sx * sx
        else:
            from .oscillatory import table_eval

            I = table_eval(X * self.eps, self.a, self.tail[:3])
            A = 2.0 * I.real * xa + inv * 2.0 * sx * cx
            B = 2.0 * I.imag * xa + inv * 2.0 * sx * sx
        zr = np.fmod(Z, 2.0)
        pz = np.pi * Z
        with np.errstate(divide="ignore", invalid="ignore"):
            sinc = np.where(np.abs(Z) < 1e-4, 1.0 - pz * pz / 6.0 + pz**4 / 120.0,
                            np.sin(np.pi * zr) / pz)
        th = 2.0 * np.pi * (_frac_turn(m1, self.g[0]) + _frac_turn(m2, self.g[1])) + np.pi * zr
        if self.finite:
            th = th - np.pi * Z / self.N
        return (A * np.cos(th) + B * np.sin(th)) * sinc

    def band(self, x0, x1):
        e = self.e
        h = self.zc * x0 ** (self.a - 1.0)
        if self.zstrip > 0 and h > self.zstrip:
            h = self.zstrip
        w = x1 - x0
        sc = math.sqrt(2.0 * h / w)
        U = np.array([[1, 0], [0, 1]], dtype=np.int64)

        def scaled(c1, c2):
            return (sc * float(_cdot(float(c1), e[0, 0], float(c2), e[0, 1])),
                    float(_cdot(float(c1), e[1, 0], float(c2), e[1, 1])) / sc)

        w1 = scaled(1, 0)
        w2 = scaled(0, 1)
        n1 = w1[0] ** 2 + w1[1] ** 2
        n2 = w2[0] ** 2 + w2[1] ** 2
        if n2 < n1:
            U = U[:, ::-1].copy()
            w1, w2, n1, n2 = w2, w1, n2, n1
        for _ in range(1000):
            mu = int(np.rint((w1[0] * w2[0] + w1[1] * w2[1]) / n1))
            if mu != 0:
                U[:, 1] -= mu * U[:, 0]
                w2 = scaled(U[0, 1], U[1, 1])
                n2 = w2[0] ** 2 + w2[1] ** 2
            if n2 < n1:
                U = U[:, ::-1].copy()
                w1, w2, n1, n2 = w2, w1, n2, n1
                continue
            break
        tol = 1e-9 * math.sqrt(2.0 * h * w) + 1e-12
        bx0, bx1 = sc * x0 - tol, sc * x1 + tol
        bz0, bz1 = -h / sc - tol, h / sc + tol
        cr = w2[0] * w1[1] - w2[1] * w1[0]
        ps = [(cx * w1[1] - cz * w1[0]) / cr for cx in (bx0, bx1) for cz in (bz0, bz1)]
        j0 = math.ceil(min(ps) - 1e-9)
        j1 = math.floor(max(ps) + 1e-9)
        M1, M2 = [], []
        for j in range(j0, j1 + 1):
            lo, hi = -math.inf, math.inf
            if w1[0] != 0.0:
                ia, ib = sorted(((bx0 - j * w2[0]) / w1[0], (bx1 - j * w2[0]) / w1[0]))
                lo, hi = ia, ib
            elif not bx0 <= j * w2[0] <= bx1:
                continue
            if w1[1] != 0.0:
                ia, ib = sorted(((bz0 - j * w2[1]) / w1[1], (bz1 - j * w2[1]) / w1[1]))
                lo, hi = max(lo, ia), min(hi, ib)
            elif not bz0 <= j * w2[1] <= bz1:
                continue
            if lo > hi:
                continue
            i = np.arange(math.ceil(lo - 1e-9), math.floor(hi + 1e-9) + 1, dtype=np.int64)
            M1.append(U[0, 0] * i + U[0, 1] * j)
            M2.append(U[1, 0] * i + U[1, 1] * j)
        if not M1:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        return np.concatenate(M1), np.concatenate(M2)

    def admit(self, X, Z, x0, x1):
        ok = (X >= x0) & (X < x1) & (X > self.x_lo) & (X < self.x_hi)
        if self.zstrip > 0:
            ok &= (Z > -self.zstrip) & (Z <= self.zstrip)
        with np.errstate(invalid="ignore", divide="ignore"):
            ok &= np.abs(Z) <= self.zc * np.where(ok, X, 1.0) ** (self.a - 1.0)
        return ok

    def collect(self):
        out = []
        x0 = self.x_lo
        while x0 < self.x_hi:
            x1 = min(x0 * 1.4142135623730951, self.x_hi)
            m1, m2 = self.band(x0, x1)
            if m1.size:
                X, Z = self.coords(m1, m2)
                ok = self.admit(X, Z, x0, x1)
                out.append((m1[ok], m2[ok], X[ok], Z[ok]))
            x0 = x1
        if not out:
            e = np.empty(0)
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), e, e
        return tuple(np.concatenate(c) for c in zip(*out))


def lattice_sum_batch(frames, gamma, a, eps, b, d, x_lo, x_hi, zc, zstrip=0.0,
                      finite_N=0.0, fast=False, shear_alpha=None, shear_u=None,
                      nthreads=1, tail=None):
    frames = np.asarray(frames, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    n = frames.shape[0]
    out = np.zeros(n)
    cnt = np.zeros(n, dtype=np.int64)
    for i in range(n):
        R = _Region(frames[i], gamma[i], a, eps, b, d, x_lo, x_hi, zc, zstrip, finite_N,
                    None if shear_alpha is None else shear_alpha[i],
                    None if shear_u is None else shear_u[i], tail)
        m1, m2, X, Z = R.collect()
        out[i] = _fsum(R.terms(m1, m2, X, Z))
        cnt[i] = m1.size
    return out, cnt


def lattice_points(frame, gamma, a, eps, b, d, x_lo, x_hi, zc, zstrip=0.0,
                   finite_N=0.0, shear_alpha=None, shear_u=None, capacity=1 << 22,
                   tail=None):
    R = _Region(frame, gamma, a, eps, b, d, x_lo, x_hi, zc, zstrip, finite_N,
                shear_alpha, shear_u, tail)
    m1, m2, X, Z = R.collect()
    if m1.size > capacity:
        raise OverflowError(f"{m1.size} region points exceed capacity {capacity}")
    return m1, m2, X, Z, _fsum(R.terms(m1, m2, X, Z))
