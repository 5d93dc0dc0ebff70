# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.

Every kernel here has a numpy twin in ``_fallback`` with the same signature.
Samples are processed independently, so results do not depend on the number
of OpenMP threads.
"""

import numpy as np

from cython.parallel cimport prange
from libc.math cimport (fma, rint, floor, ceil, sqrt, pow, sin, cos, fabs,
                        fmod, log, exp, INFINITY, NAN)
from libc.stdlib cimport malloc, free

ctypedef long long i64

cdef double PI = 3.141592653589793
cdef double TWO_PI = 6.283185307179586


# ---------------------------------------------------------------------------
# floating point helpers

cdef inline double sfrac(double k, double x, double* kp) noexcept nogil:
    """Signed fractional part of k*x in (-1/2, 1/2]; kp receives k' with k*x + k' = value."""
    cdef double p = k * x
    cdef double e = fma(k, x, -p)
    cdef double r = rint(p)
    cdef double v = (p - r) + e
    if v > 0.5:
        v -= 1.0
        r += 1.0
    elif v <= -0.5:
        v += 1.0
        r -= 1.0
    kp[0] = -r
    return v


cdef inline double frac_turn(double k, double x) noexcept nogil:
    cdef double p = k * x
    cdef double e = fma(k, x, -p)
    return (p - rint(p)) + e


cdef inline void neu_add(double* s, double* c, double v) noexcept nogil:
    cdef double t = s[0] + v
    if fabs(s[0]) >= fabs(v):
        c[0] += (s[0] - t) + v
    else:
        c[0] += (v - t) + s[0]
    s[0] = t


cdef inline double cdot(double a1, double b1, double a2, double b2) noexcept nogil:
    """a1*b1 + a2*b2 with the rounding of a compensated dot product."""
    cdef double p1 = a1 * b1
    cdef double q1 = fma(a1, b1, -p1)
    cdef double p2 = a2 * b2
    cdef double q2 = fma(a2, b2, -p2)
    cdef double s = p1 + p2
    cdef double bb = s - p1
    cdef double err = (p1 - (s - bb)) + (p2 - bb)
    return s + (err + q1 + q2)


cdef inline double shear_z(double k, double kp, double al, double N) noexcept nogil:
    cdef double p = k * al
    cdef double e = fma(k, al, -p)
    return N * ((p + kp) + e)


def signed_frac(double k, double alpha):
    cdef double kp
    cdef double v = sfrac(k, alpha, &kp)
    return v, kp


# ---------------------------------------------------------------------------
# Birkhoff sums

cdef double _birkhoff_one(double al, double x, double a, i64 N, double cut,
                          double cap, double mean, bint truncated) noexcept nogil:
    cdef double s = 0.0, c = 0.0, kp, y, v
    cdef i64 n
    cdef bint half = a == 0.5
    for n in range(N):
        y = x + sfrac(<double>n, al, &kp)
        y = y - floor(y)
        if y >= 1.0:
            y -= 1.0
        if truncated and y < cut:
            v = cap
        else:
            if y == 0.0:
                return NAN
            if half:
                v = 1.0 / sqrt(y) - mean
            else:
                v = exp(-a * log(y)) - mean
        neu_add(&s, &c, v)
    return s + c


def birkhoff_batch(double[::1] alpha, double[::1] x, double a, i64 N, double eps,
                   bint truncated, int nthreads=1):
    """(1/N^a) sum_{n<N} f({x + n alpha}); NaN marks an orbit point hitting 0."""
    cdef Py_ssize_t n = alpha.shape[0], i
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double cut = eps / N
    cdef double cap = (pow(N / eps, a) - 1.0) / (1.0 - a)
    cdef double mean = 1.0 / (1.0 - a)
    cdef double norm = pow(<double>N, -a)
    for i in prange(n, nogil=True, num_threads=nthreads, schedule="dynamic", chunksize=16):
        o[i] = _birkhoff_one(alpha[i], x[i], a, N, cut, cap, mean, truncated) * norm
    return out


# ---------------------------------------------------------------------------
# resonant frequencies

def resonant_scan(double alpha, double a, i64 k_lo, i64 k_hi, double thr):
    """All k in [k_lo, k_hi] with k^(1-a) |{k alpha}| <= thr, and the number of exact zeros."""
    cdef i64 block = 4096, k0, k1, k, cnt, zeros = 0
    cdef double kp, s, bound, am1 = a - 1.0
    cdef i64[::1] buf
    chunks = []
    arr = np.empty(block, dtype=np.int64)
    buf = arr
    k0 = k_lo
    while k0 <= k_hi:
        k1 = min(k0 + block - 1, k_hi)
        bound = thr * pow(<double>k0, am1)
        cnt = 0
        for k in range(k0, k1 + 1):
            s = fabs(sfrac(<double>k, alpha, &kp))
            if s > bound:
                continue
            if s == 0.0:
                zeros += 1
            if pow(<double>k, 1.0 - a) * s <= thr:
                buf[cnt] = k
                cnt += 1
        if cnt:
            chunks.append(arr[:cnt].copy())
        k0 = k1 + 1
    if chunks:
        return np.concatenate(chunks), zeros
    return np.empty(0, dtype=np.int64), zeros


# ---------------------------------------------------------------------------
# Fourier sums

cdef inline double _g_direct(double k, double al, double x, double N, double Ak,
                             double Bk, bint tilde) noexcept nogil:
    cdef double kp, kq
    cdef double s = sfrac(k, al, &kp)
    cdef double t = sfrac(k, x, &kq)
    cdef double den, th
    if tilde:
        if s == 0.0:
            return NAN
        den = PI * s
    else:
        den = sin(PI * s)
        if fabs(den) < 1e-12:
            return NAN
    th = TWO_PI * t + PI * (N - 1.0) * s
    return (Ak * cos(th) + Bk * sin(th)) * (sin(PI * N * s) / den)


cdef double _sum_filtered(double al, double x, double N, i64 k_lo, i64 k_hi,
                          double* A, double* B, double thr, double a,
                          bint tilde, i64* count) noexcept nogil:
    cdef double s = 0.0, c = 0.0, kp, fr, bound, v
    cdef double am1 = a - 1.0
    cdef i64 k, k0, k1, block = 1024, cnt = 0
    k0 = k_lo
    while k0 <= k_hi:
        k1 = k0 + block - 1
        if k1 > k_hi:
            k1 = k_hi
        bound = thr * pow(<double>k0, am1)
        for k in range(k0, k1 + 1):
            fr = fabs(sfrac(<double>k, al, &kp))
            if fr > bound:
                continue
            if pow(<double>k, 1.0 - a) * fr > thr:
                continue
            v = _g_direct(<double>k, al, x, N, A[k], B[k], tilde)
            if v != v:
                count[0] = -k
                return NAN
            neu_add(&s, &c, v)
            cnt += 1
        k0 = k1 + 1
    count[0] = cnt
    return s + c


cdef double _sum_dense(double al, double x, double N, i64 k_lo, i64 k_hi,
                       double* A, double* B, i64* count) noexcept nogil:
    # exact kernel along a contiguous range by phase recurrences, re-anchored every 32 steps
    # terms with |sin pi s| < 1e-3 are recomputed directly: the recurrence error is absolute
    cdef double s = 0.0, c = 0.0, v
    cdef double kp, kq, sf, t, pk, sg
    cdef double ur, ui, vr, vi, wr, wi, tr, ti
    cdef double mur, mui, mvr, mvi, mwr, mwi, ang
    cdef i64 k
    cdef i64 nmod = <i64>fmod(N, 2.0)
    ang = TWO_PI * x + PI * (2.0 * frac_turn(N - 1.0, al * 0.5))
    mur = cos(ang)
    mui = sin(ang)
    ang = PI * (2.0 * frac_turn(N, al * 0.5))
    mvr = cos(ang)
    mvi = sin(ang)
    mwr = cos(PI * al)
    mwi = sin(PI * al)
    ur = ui = vr = vi = wr = wi = 0.0
    for k in range(k_lo, k_hi + 1):
        if (k - k_lo) % 32 == 0:
            sf = sfrac(<double>k, al, &kp)
            t = sfrac(<double>k, x, &kq)
            pk = fabs(fmod(kp, 2.0))
            ang = TWO_PI * t + PI * (N - 1.0) * sf
            sg = -1.0 if (nmod == 0 and pk == 1.0) else 1.0
            ur = sg * cos(ang)
            ui = sg * sin(ang)
            sg = -1.0 if (nmod == 1 and pk == 1.0) else 1.0
            vr = sg * cos(PI * N * sf)
            vi = sg * sin(PI * N * sf)
            sg = -1.0 if pk == 1.0 else 1.0
            wr = sg * cos(PI * sf)
            wi = sg * sin(PI * sf)
        else:
            tr = ur * mur - ui * mui
            ui = ur * mui + ui * mur
            ur = tr
            tr = vr * mvr - vi * mvi
            vi = vr * mvi + vi * mvr
            vr = tr
            tr = wr * mwr - wi * mwi
            wi = wr * mwi + wi * mwr
            wr = tr
        if fabs(wi) < 1e-3:
            v = _g_direct(<double>k, al, x, N, A[k], B[k], False)
            if v != v:
                count[0] = -k
                return NAN
        else:
            v = (A[k] * ur + B[k] * ui) * (vi / wi)
        neu_add(&s, &c, v)
    count[0] = k_hi - k_lo + 1 if k_hi >= k_lo else 0
    return s + c


def fourier_sum_batch(double[::1] alpha, double[::1] x, i64 N, i64 k_lo, i64 k_hi,
                      double[::1] A, double[::1] B, double thr, double a,
                      bint tilde, int nthreads=1):
    """Sum of per-frequency terms over k_lo <= k <= k_hi for each (alpha, x).

    ``thr`` < inf keeps only k with k^(1-a)|{k alpha}| <= thr.  Coefficient
    arrays are indexed by k.  Returns (sums, counts); a negative count -k
    flags the first offending frequency.
    """
    cdef Py_ssize_t n = alpha.shape[0], i
    if k_hi >= A.shape[0] or k_hi >= B.shape[0]:
        raise ValueError("coefficient arrays too short")
    out = np.zeros(n)
    cnt = np.zeros(n, dtype=np.int64)
    cdef double[::1] o = out
    cdef i64[::1] cv = cnt
    cdef double* pa = &A[0]
    cdef double* pb = &B[0]
    cdef bint dense = thr == INFINITY and not tilde
    if k_hi < k_lo:
        return out, cnt
    for i in prange(n, nogil=True, num_threads=nthreads, schedule="dynamic", chunksize=1):
        if dense:
            o[i] = _sum_dense(alpha[i], x[i], <double>N, k_lo, k_hi, pa, pb, &cv[i])
        else:
            o[i] = _sum_filtered(alpha[i], x[i], <double>N, k_lo, k_hi, pa, pb,
                                 thr, a, tilde, &cv[i])
    return out, cnt


def fourier_sum_indices(double alpha, double x, i64 N, i64[::1] ks,
                        double[::1] A, double[::1] B, bint tilde):
    """Sum over an explicit index list; A and B are aligned with ``ks``."""
    cdef Py_ssize_t j
    cdef double s = 0.0, c = 0.0, v
    for j in range(ks.shape[0]):
        v = _g_direct(<double>ks[j], alpha, x, <double>N, A[j], B[j], tilde)
        if v != v:
            raise ZeroDivisionError(int(ks[j]))
        neu_add(&s, &c, v)
    return s + c


# ---------------------------------------------------------------------------
# Fourier reconstruction with jump-corrected tail

cdef void _recon_one(double al, double x, double N, i64 K, double* Rre, double* Rim,
                     double* jmp, double cut, double* out) noexcept nogil:
    cdef double s1 = 0.0, c1 = 0.0, s2 = 0.0, c2 = 0.0, v
    cdef double kp, kq, sf, t, den, th, D, y, th0, th1
    cdef double inv0 = 0.0, inv1 = 0.0
    cdef i64 k, n
    for k in range(1, K + 1):
        sf = sfrac(<double>k, al, &kp)
        t = sfrac(<double>k, x, &kq)
        den = sin(PI * sf)
        if fabs(den) < 1e-12:
            out[0] = NAN
            return
        D = sin(PI * N * sf) / den
        th = TWO_PI * t + PI * (N - 1.0) * sf
        v = 2.0 * (Rre[k] * cos(th) - Rim[k] * sin(th)) * D
        neu_add(&s1, &c1, v)
    # jump part evaluated on the orbit: sum_p [f]_p (1/2 - th) - [f']_p B2(th)/2
    for n in range(<i64>N):
        y = x + sfrac(<double>n, al, &kp)
        y = y - floor(y)
        if y >= 1.0:
            y -= 1.0
        th0 = y
        th1 = y - cut
        if th1 < 0.0:
            th1 += 1.0
        v = jmp[0] * (0.5 - th0) - jmp[1] * 0.5 * (th0 * th0 - th0 + 1.0 / 6.0)
        v += jmp[2] * (0.5 - th1) - jmp[3] * 0.5 * (th1 * th1 - th1 + 1.0 / 6.0)
        neu_add(&s2, &c2, v)
        inv0 += 1.0 / fabs(sin(PI * th0))
        inv1 += 1.0 / fabs(sin(PI * th1))
    out[0] = s1 + c1
    out[1] = s2 + c2
    out[2] = inv0
    out[3] = inv1


def reconstruct_batch(double[::1] alpha, double[::1] x, i64 N, i64[::1] K,
                      double[::1] Rre, double[::1] Rim, double[::1] jumps, double cut,
                      int nthreads=1):
    """Per point: (Fourier partial sum of the smooth part, jump part on the orbit,
    sum 1/|sin pi(y-0)|, sum 1/|sin pi(y-cut)|), all unnormalized."""
    cdef Py_ssize_t n = alpha.shape[0], i
    out = np.zeros((n, 4))
    cdef double[:, ::1] o = out
    cdef double* pr = &Rre[0]
    cdef double* pi_ = &Rim[0]
    cdef double* pj = &jumps[0]
    for i in range(n):
        if K[i] >= Rre.shape[0]:
            raise ValueError("coefficient arrays too short")
    for i in prange(n, nogil=True, num_threads=nthreads, schedule="dynamic", chunksize=1):
        _recon_one(alpha[i], x[i], <double>N, K[i], pr, pi_, pj, cut, &o[i, 0])
    return out


# ---------------------------------------------------------------------------
# Gauss reduction

cdef struct Frame:
    double e1x, e1z, e2x, e2z
    i64 u1x, u1z, u2x, u2z


cdef inline void _vec(i64 ux, i64 uz, double* G, int shear, double N, double al,
                      double* vx, double* vz) noexcept nogil:
    if shear:
        vx[0] = ux / N
        vz[0] = shear_z(<double>ux, <double>uz, al, N)
    else:
        vx[0] = cdot(<double>ux, G[0], <double>uz, G[1])
        vz[0] = cdot(<double>ux, G[2], <double>uz, G[3])


cdef inline bint _better(double ax, double az, double bx, double bz) noexcept nogil:
    # tie-break among equal lengths: larger first coordinate, then larger second
    if ax != bx:
        return ax > bx
    return az > bz


cdef inline void _normalize(double* vx, double* vz, i64* ux, i64* uz) noexcept nogil:
    if vx[0] < 0.0 or (vx[0] == 0.0 and vz[0] < 0.0):
        vx[0] = -vx[0] + 0.0
        vz[0] = -vz[0] + 0.0
        ux[0] = -ux[0]
        uz[0] = -uz[0]


cdef int _gauss(double* G, int shear, double N, double al, Frame* F) noexcept nogil:
    # G = generator (row-major 2x2, columns are basis vectors) unless shear
    cdef i64 a1x = 1, a1z = 0, a2x = 0, a2z = 1, tx, tz, mu
    cdef double v1x, v1z, v2x, v2z, n1, n2, dt
    cdef int it
    cdef double cx[4]
    cdef double cz[4]
    cdef i64 cux[4]
    cdef i64 cuz[4]
    cdef double ln[4]
    cdef int j, best, second
    cdef double tol
    _vec(a1x, a1z, G, shear, N, al, &v1x, &v1z)
    _vec(a2x, a2z, G, shear, N, al, &v2x, &v2z)
    n1 = v1x * v1x + v1z * v1z
    n2 = v2x * v2x + v2z * v2z
    if n2 < n1:
        a1x, a2x = a2x, a1x
        a1z, a2z = a2z, a1z
        v1x, v2x = v2x, v1x
        v1z, v2z = v2z, v1z
        n1, n2 = n2, n1
    for it in range(500):
        dt = v1x * v2x + v1z * v2z
        mu = <i64>rint(dt / n1)
        if mu != 0:
            a2x -= mu * a1x
            a2z -= mu * a1z
            _vec(a2x, a2z, G, shear, N, al, &v2x, &v2z)
            n2 = v2x * v2x + v2z * v2z
        if n2 < n1:
            a1x, a2x = a2x, a1x
            a1z, a2z = a2z, a1z
            v1x, v2x = v2x, v1x
            v1z, v2z = v2z, v1z
            n1, n2 = n2, n1
            continue
        break
    else:
        return -1
    # candidates for the two successive minima
    cux[0] = a1x; cuz[0] = a1z
    cux[1] = a2x; cuz[1] = a2z
    cux[2] = a1x + a2x; cuz[2] = a1z + a2z
    cux[3] = a1x - a2x; cuz[3] = a1z - a2z
    for j in range(4):
        _vec(cux[j], cuz[j], G, shear, N, al, &cx[j], &cz[j])
        _normalize(&cx[j], &cz[j], &cux[j], &cuz[j])
        ln[j] = cx[j] * cx[j] + cz[j] * cz[j]
    tol = 1e-12 * ln[0]
    best = 0
    for j in range(1, 4):
        if ln[j] < ln[best] - tol or (fabs(ln[j] - ln[best]) <= tol and
                                       _better(cx[j], cz[j], cx[best], cz[best])):
            best = j
    second = -1
    for j in range(4):
        if j == best:
            continue
        if cux[j] * cuz[best] - cuz[j] * cux[best] == 0:
            continue
        if second < 0 or ln[j] < ln[second] - tol or (
                fabs(ln[j] - ln[second]) <= tol and
                _better(cx[j], cz[j], cx[second], cz[second])):
            second = j
    F.e1x = cx[best]; F.e1z = cz[best]
    F.e2x = cx[second]; F.e2z = cz[second]
    F.u1x = cux[best]; F.u1z = cuz[best]
    F.u2x = cux[second]; F.u2z = cuz[second]
    return 0


cdef int _reduce_one(double* G, int shear, double N, double al, double* e,
                     i64* u) noexcept nogil:
    cdef Frame F
    cdef int st = _gauss(G, shear, N, al, &F)
    e[0] = F.e1x; e[1] = F.e2x; e[2] = F.e1z; e[3] = F.e2z
    u[0] = F.u1x; u[1] = F.u2x; u[2] = F.u1z; u[3] = F.u2z
    return st


def reduce_batch(double[:, :, ::1] gen, int nthreads=1):
    """Reduce generic lattices; gen[i] has the basis vectors as columns."""
    cdef Py_ssize_t n = gen.shape[0], i
    e = np.empty((n, 2, 2))
    u = np.empty((n, 2, 2), dtype=np.int64)
    st = np.zeros(n, dtype=np.int32)
    cdef double[:, :, ::1] ev = e
    cdef i64[:, :, ::1] uv = u
    cdef int[::1] sv = st
    for i in prange(n, nogil=True, num_threads=nthreads, schedule="static"):
        sv[i] = _reduce_one(&gen[i, 0, 0], 0, 1.0, 0.0, &ev[i, 0, 0], &uv[i, 0, 0])
    return e, u, st


def reduce_shear_batch(i64 N, double[::1] alpha, int nthreads=1):
    """Reduce L(N, alpha) using exact integer coordinates (k, k')."""
    cdef Py_ssize_t n = alpha.shape[0], i
    e = np.empty((n, 2, 2))
    u = np.empty((n, 2, 2), dtype=np.int64)
    st = np.zeros(n, dtype=np.int32)
    cdef double[:, :, ::1] ev = e
    cdef i64[:, :, ::1] uv = u
    cdef int[::1] sv = st
    for i in prange(n, nogil=True, num_threads=nthreads, schedule="static"):
        sv[i] = _reduce_one(NULL, 1, <double>N, alpha[i], &ev[i, 0, 0], &uv[i, 0, 0])
    return e, u, st


# ---------------------------------------------------------------------------
# lattice sums over the resonant region

cdef extern from "_line.h" nogil:
    ctypedef struct LineParams:
        double lo, hi, xlo, zstrip, zc, am1, b2, d2, cinv
        int strip, half
        const double* hre
        const double* him
        double hinv, eps, ire, iim
        int tail, hlast
        const double* poly
        const double* pc
        int nband
    int LINE_BLOCK
    int POLY_ROW
    double line_block(const LineParams* L, int n, double X0, double dX, double Z0,
                      double dZ, double tr, double ti, double mtr, double mti,
                      double qr, double qi, double mqr, double mqi, double pr,
                      double pi_, double mpr, double mpi, long long* count)
    void tail_coef(const LineParams* L, double u, double s, double er, double ei,
                   double* re, double* im)


cdef struct Ctx:
    double e1x, e1z, e2x, e2z
    double g1, g2
    int shear
    double N, al
    i64 u1x, u1z, u2x, u2z
    double a, am1, zc, x_lo, x_hi, zstrip, ratio
    int half, finite, fast
    double b2, d2, cst, eps
    LineParams tl
    i64* om1
    i64* om2
    double* oX
    double* oZ
    i64 cap, cnt


cdef inline int _coords(Ctx* C, double m1, double m2, double* X, double* Z) noexcept nogil:
    cdef i64 k, kp
    if C.shear:
        k = <i64>m1 * C.u1x + <i64>m2 * C.u2x
        kp = <i64>m1 * C.u1z + <i64>m2 * C.u2z
        X[0] = k / C.N
        Z[0] = shear_z(<double>k, <double>kp, C.al, C.N)
    else:
        X[0] = cdot(m1, C.e1x, m2, C.e2x)
        Z[0] = cdot(m1, C.e1z, m2, C.e2z)
    return 0


cdef inline bint _admit(Ctx* C, double X, double Z, double x0, double x1,
                        double* xa) noexcept nogil:
    if not (X >= x0 and X < x1 and X > C.x_lo and X < C.x_hi):
        return False
    if C.zstrip > 0.0 and not (Z > -C.zstrip and Z <= C.zstrip):
        return False
    if C.half:
        xa[0] = 1.0 / sqrt(X)
    else:
        xa[0] = pow(X, C.am1)
    return fabs(Z) <= C.zc * xa[0]


cdef inline double _q_direct(Ctx* C, double m1, double m2, double X, double Z,
                             double xa) noexcept nogil:
    cdef double sx = sin(PI * X * C.eps), cx = cos(PI * X * C.eps)
    cdef double inv = C.cst / (TWO_PI * X)
    cdef double A, B, Ir, Ii, u
    if C.tl.tail:
        u = X * C.eps
        tail_coef(&C.tl, u, sqrt(u) if C.half else pow(u, -C.am1),
                  cx * cx - sx * sx, 2.0 * sx * cx, &Ir, &Ii)
        A = 2.0 * Ir * xa + inv * 2.0 * sx * cx
        B = 2.0 * Ii * xa + inv * 2.0 * sx * sx
    else:
        A = C.b2 * xa + inv * 2.0 * sx * cx
        B = C.d2 * xa + inv * 2.0 * sx * sx
    cdef double zr = fmod(Z, 2.0), sinc, pz, th
    if fabs(Z) < 1e-4:
        pz = PI * Z
        sinc = 1.0 - pz * pz / 6.0 + pz * pz * pz * pz / 120.0
    else:
        sinc = sin(PI * zr) / (PI * Z)
    th = TWO_PI * (frac_turn(m1, C.g1) + frac_turn(m2, C.g2)) + PI * zr
    if C.finite:
        th -= PI * Z / C.N
    return (A * cos(th) + B * sin(th)) * sinc


cdef void _record(Ctx* C, double m1, double m2, double X, double Z) noexcept nogil:
    if C.om1 != NULL and C.cnt < C.cap:
        C.om1[C.cnt] = <i64>m1
        C.om2[C.cnt] = <i64>m2
        C.oX[C.cnt] = X
        C.oZ[C.cnt] = Z
    C.cnt += 1


cdef double _line_fast(Ctx* C, double x0, double x1, double m1, double m2,
                       double dm1, double dm2, i64 ilo, i64 ihi,
                       double* s, double* c) noexcept nogil:
    # one lattice line in blocks; each block is anchored with exact
    # coordinates and phases, then advanced by complex rotation
    cdef LineParams L = C.tl
    cdef double dX, dZ, X, Z, ang, acc
    cdef double mtr, mti, mqr, mqi, mpr, mpi, tr, ti, qr, qi, gr, gi, t
    cdef i64 i, n
    cdef long long cnt = 0
    L.lo = x0 if x0 > C.x_lo else C.x_lo
    L.hi = x1 if x1 < C.x_hi else C.x_hi
    L.xlo = C.x_lo
    L.zstrip = C.zstrip
    L.strip = C.zstrip > 0.0
    L.zc = C.zc
    L.am1 = C.am1
    L.b2 = C.b2
    L.d2 = C.d2
    L.cinv = C.cst / TWO_PI
    L.half = C.half
    _coords(C, dm1, dm2, &dX, &dZ)
    ang = PI * C.eps * dX
    mpr = cos(ang); mpi = sin(ang)
    ang = PI * fmod(dZ, 2.0)
    mqr = cos(ang); mqi = sin(ang)
    ang = TWO_PI * (frac_turn(dm1, C.g1) + frac_turn(dm2, C.g2)) + PI * fmod(dZ, 2.0)
    if C.finite:
        ang -= PI * dZ / C.N
    mtr = cos(ang); mti = sin(ang)
    i = ilo
    while i <= ihi:
        n = ihi - i + 1
        if n > LINE_BLOCK:
            n = LINE_BLOCK
        _coords(C, m1 + i * dm1, m2 + i * dm2, &X, &Z)
        ang = PI * fmod(Z, 2.0)
        qr = cos(ang); qi = sin(ang)
        ang = TWO_PI * (frac_turn(m1 + i * dm1, C.g1) + frac_turn(m2 + i * dm2, C.g2)) + ang
        if C.finite:
            ang -= PI * Z / C.N
        tr = cos(ang); ti = sin(ang)
        ang = PI * C.eps * X
        acc = line_block(&L, <int>n, X, dX, Z, dZ, tr, ti, mtr, mti, qr, qi, mqr, mqi,
                         cos(ang), sin(ang), mpr, mpi, &cnt)
        neu_add(s, c, acc)
        i += n
    C.cnt += cnt
    return 0.0


cdef int _band(Ctx* C, double x0, double x1, double* s, double* c) noexcept nogil:
    cdef double h, w, sc, w1x, w1z, w2x, w2z, n1, n2, dt, tmp, cr, tol
    cdef double bx0, bx1, bz0, bz1, jlo, jhi, p, ilo_f, ihi_f, lo, hi
    cdef double X, Z, xa, v, m1, m2
    cdef i64 U00 = 1, U01 = 0, U10 = 0, U11 = 1, mu, t, j, i, ilo, ihi, j0, j1
    cdef int it
    cdef double cxs[4]
    cdef double czs[4]
    cdef int q
    h = C.zc * pow(x0, C.am1)
    if C.zstrip > 0.0 and h > C.zstrip:
        h = C.zstrip
    w = x1 - x0
    if w <= 0.0:
        return 0
    sc = sqrt(2.0 * h / w)
    w1x = sc * C.e1x; w1z = C.e1z / sc
    w2x = sc * C.e2x; w2z = C.e2z / sc
    n1 = w1x * w1x + w1z * w1z
    n2 = w2x * w2x + w2z * w2z
    if n2 < n1:
        U00, U01 = U01, U00
        U10, U11 = U11, U10
        w1x, w2x = w2x, w1x
        w1z, w2z = w2z, w1z
        n1, n2 = n2, n1
    for it in range(1000):
        dt = w1x * w2x + w1z * w2z
        mu = <i64>rint(dt / n1)
        if mu != 0:
            U01 -= mu * U00
            U11 -= mu * U10
            w2x = sc * cdot(<double>U01, C.e1x, <double>U11, C.e2x)
            w2z = cdot(<double>U01, C.e1z, <double>U11, C.e2z) / sc
            n2 = w2x * w2x + w2z * w2z
        if n2 < n1:
            U00, U01 = U01, U00
            U10, U11 = U11, U10
            w1x, w2x = w2x, w1x
            w1z, w2z = w2z, w1z
            n1, n2 = n2, n1
            continue
        break
    # scaled box, widened slightly; exact membership is decided by _admit
    tol = 1e-9 * sqrt(2.0 * h * w) + 1e-12
    bx0 = sc * x0 - tol
    bx1 = sc * x1 + tol
    bz0 = -h / sc - tol
    bz1 = h / sc + tol
    cr = w2x * w1z - w2z * w1x
    cxs[0] = bx0; czs[0] = bz0
    cxs[1] = bx1; czs[1] = bz0
    cxs[2] = bx0; czs[2] = bz1
    cxs[3] = bx1; czs[3] = bz1
    jlo = INFINITY
    jhi = -INFINITY
    for q in range(4):
        p = (cxs[q] * w1z - czs[q] * w1x) / cr
        if p < jlo:
            jlo = p
        if p > jhi:
            jhi = p
    j0 = <i64>ceil(jlo - 1e-9)
    j1 = <i64>floor(jhi + 1e-9)
    for j in range(j0, j1 + 1):
        lo = -INFINITY
        hi = INFINITY
        if w1x != 0.0:
            ilo_f = (bx0 - j * w2x) / w1x
            ihi_f = (bx1 - j * w2x) / w1x
            if ilo_f > ihi_f:
                ilo_f, ihi_f = ihi_f, ilo_f
            lo = ilo_f
            hi = ihi_f
        elif not (j * w2x >= bx0 and j * w2x <= bx1):
            continue
        if w1z != 0.0:
            ilo_f = (bz0 - j * w2z) / w1z
            ihi_f = (bz1 - j * w2z) / w1z
            if ilo_f > ihi_f:
                ilo_f, ihi_f = ihi_f, ilo_f
            if ilo_f > lo:
                lo = ilo_f
            if ihi_f < hi:
                hi = ihi_f
        elif not (j * w2z >= bz0 and j * w2z <= bz1):
            continue
        if lo > hi:
            continue
        ilo = <i64>ceil(lo - 1e-9)
        ihi = <i64>floor(hi + 1e-9)
        if ihi < ilo:
            continue
        m1 = <double>(U01 * j)
        m2 = <double>(U11 * j)
        if C.fast and ihi - ilo >= 1:
            _line_fast(C, x0, x1, m1, m2, <double>U00, <double>U10, ilo, ihi, s, c)
            continue
        for i in range(ilo, ihi + 1):
            _coords(C, m1 + i * U00, m2 + i * U10, &X, &Z)
            if not _admit(C, X, Z, x0, x1, &xa):
                continue
            v = _q_direct(C, m1 + i * U00, m2 + i * U10, X, Z, xa)
            neu_add(s, c, v)
            _record(C, m1 + i * U00, m2 + i * U10, X, Z)
    return 0


cdef double _region_sum(Ctx* C) noexcept nogil:
    cdef double s = 0.0, c = 0.0, x0, x1
    cdef int ib = 0
    x0 = C.x_lo
    while x0 < C.x_hi:
        x1 = x0 * C.ratio
        if x1 > C.x_hi:
            x1 = C.x_hi
        C.tl.pc = C.tl.poly + ib * POLY_ROW if C.tl.poly != NULL and ib < C.tl.nband else NULL
        _band(C, x0, x1, &s, &c)
        ib += 1
        x0 = x1
    return s + c


cdef void _setup(Ctx* C, double a, double eps, double b, double d, double x_lo,
                 double x_hi, double zc, double zstrip, double finite_N, int fast) noexcept nogil:
    C.a = a
    C.am1 = a - 1.0
    C.half = a == 0.5
    C.eps = eps
    C.b2 = 2.0 * b
    C.d2 = 2.0 * d
    C.cst = 2.0 / ((1.0 - a) * pow(eps, a))
    C.x_lo = x_lo
    C.x_hi = x_hi
    C.zc = zc
    C.zstrip = zstrip
    C.ratio = 1.4142135623730951
    C.finite = finite_N > 0.0
    C.N = finite_N if finite_N > 0.0 else 1.0
    C.fast = fast
    C.shear = 0
    C.al = 0.0
    C.om1 = NULL
    C.om2 = NULL
    C.oX = NULL
    C.oZ = NULL
    C.cap = 0
    C.cnt = 0
    C.tl.tail = 0
    C.tl.hre = NULL
    C.tl.him = NULL
    C.tl.hinv = 0.0
    C.tl.hlast = 0
    C.tl.eps = eps
    C.tl.am1 = a - 1.0
    C.tl.half = C.half
    C.tl.ire = 0.0
    C.tl.iim = 0.0
    C.tl.poly = NULL
    C.tl.pc = NULL
    C.tl.nband = 0


cdef class _Tail:
    """Holds the tail-coefficient table alive for the kernels."""
    cdef double[::1] re, im
    cdef double[:, ::1] poly
    cdef double h, ire, iim
    cdef int on, has_poly
    cdef LineParams tpl

    def __init__(self, tail):
        self.on = tail is not None
        if self.on:
            h, re, im, c, poly = tail
            self.h = h
            if poly is not None and len(poly) > 0:
                self.has_poly = 1
                self.poly = np.ascontiguousarray(poly, dtype=np.float64)
                if self.poly.shape[1] != POLY_ROW:
                    raise ValueError(f"band fits need rows of length {POLY_ROW}")
            self.re = np.ascontiguousarray(re, dtype=np.float64)
            self.im = np.ascontiguousarray(im, dtype=np.float64)
            if self.re.shape[0] < 4 or self.im.shape[0] != self.re.shape[0]:
                raise ValueError("tail table needs at least four matching samples")
            self.ire = c.real
            self.iim = c.imag
        else:
            self.re = np.zeros(4)
            self.im = np.zeros(4)

        self.tpl.tail = self.on
        self.tpl.hre = &self.re[0]
        self.tpl.him = &self.im[0]
        self.tpl.hinv = 1.0 / self.h if self.on else 0.0
        self.tpl.hlast = <int>self.re.shape[0] - 4
        self.tpl.ire = self.ire
        self.tpl.iim = self.iim
        self.tpl.poly = NULL
        self.tpl.pc = NULL
        self.tpl.nband = 0
        if self.has_poly:
            self.tpl.poly = &self.poly[0, 0]
            self.tpl.nband = <int>self.poly.shape[0]


cdef inline void _attach(Ctx* C, const LineParams* T) noexcept nogil:
    if T.tail:
        C.tl.tail = 1
        C.tl.hre = T.hre
        C.tl.him = T.him
        C.tl.hinv = T.hinv
        C.tl.hlast = T.hlast
        C.tl.ire = T.ire
        C.tl.iim = T.iim
        C.tl.poly = T.poly
        C.tl.nband = T.nband


cdef double _lattice_one(double* fr, double* g, double a, double eps, double b,
                         double d, double x_lo, double x_hi, double zc, double zstrip,
                         double finite_N, int fast, int shear, double al, i64* u,
                         const LineParams* T, i64* count) noexcept nogil:
    cdef Ctx C
    cdef double v
    _setup(&C, a, eps, b, d, x_lo, x_hi, zc, zstrip, finite_N, fast)
    _attach(&C, T)
    C.e1x = fr[0]; C.e2x = fr[1]; C.e1z = fr[2]; C.e2z = fr[3]
    C.g1 = g[0]; C.g2 = g[1]
    if shear:
        C.shear = 1
        C.al = al
        C.u1x = u[0]; C.u2x = u[1]; C.u1z = u[2]; C.u2z = u[3]
    v = _region_sum(&C)
    count[0] = C.cnt
    return v


def lattice_sum_batch(double[:, :, ::1] frames, double[:, ::1] gamma, double a,
                      double eps, double b, double d, double x_lo, double x_hi,
                      double zc, double zstrip=0.0, double finite_N=0.0,
                      bint fast=False, shear_alpha=None, shear_u=None,
                      int nthreads=1, tail=None):
    """Sum of the limit (or finite-N) kernel over lattice vectors in the region.

    ``frames[i]`` holds e1, e2 as columns.  With ``shear_alpha``/``shear_u``
    the coordinates of L(N, alpha) are taken from exact integer provenance.
    ``tail = (h, Hre, Him, I(0))`` switches the constants b + i d to the
    tabulated I(X eps).  Returns (sums, term counts).
    """
    cdef _Tail T = _Tail(tail)
    cdef Py_ssize_t n = frames.shape[0], i
    out = np.zeros(n)
    cnt = np.zeros(n, dtype=np.int64)
    cdef double[::1] o = out
    cdef i64[::1] cv = cnt
    cdef int shear = shear_alpha is not None
    cdef double[::1] sal
    cdef i64[:, :, ::1] su
    if shear:
        sal = np.ascontiguousarray(shear_alpha, dtype=np.float64)
        su = np.ascontiguousarray(shear_u, dtype=np.int64)
    else:
        sal = np.zeros(1)
        su = np.zeros((1, 2, 2), dtype=np.int64)
    for i in prange(n, nogil=True, num_threads=nthreads, schedule="dynamic", chunksize=1):
        o[i] = _lattice_one(&frames[i, 0, 0], &gamma[i, 0], a, eps, b, d, x_lo, x_hi,
                            zc, zstrip, finite_N, fast, shear, sal[i if shear else 0],
                            &su[i if shear else 0, 0, 0], &T.tpl, &cv[i])
    return out, cnt


def lattice_points(double[:, ::1] frame, double[::1] gamma, double a, double eps,
                   double b, double d, double x_lo, double x_hi, double zc,
                   double zstrip=0.0, double finite_N=0.0, shear_alpha=None,
                   shear_u=None, i64 capacity=1 << 22, tail=None):
    """Enumerate the region points of one lattice: (m1, m2, X, Z, sum)."""
    cdef Ctx C
    cdef _Tail T = _Tail(tail)
    cdef double total
    m1 = np.empty(capacity, dtype=np.int64)
    m2 = np.empty(capacity, dtype=np.int64)
    X = np.empty(capacity)
    Z = np.empty(capacity)
    cdef i64[::1] vm1 = m1
    cdef i64[::1] vm2 = m2
    cdef double[::1] vX = X
    cdef double[::1] vZ = Z
    cdef i64[:, ::1] su
    _setup(&C, a, eps, b, d, x_lo, x_hi, zc, zstrip, finite_N, 0)
    _attach(&C, &T.tpl)
    C.e1x = frame[0, 0]; C.e1z = frame[1, 0]
    C.e2x = frame[0, 1]; C.e2z = frame[1, 1]
    C.g1 = gamma[0]; C.g2 = gamma[1]
    if shear_alpha is not None:
        su = np.ascontiguousarray(shear_u, dtype=np.int64)
        C.shear = 1
        C.al = float(shear_alpha)
        C.u1x = su[0, 0]; C.u1z = su[1, 0]
        C.u2x = su[0, 1]; C.u2z = su[1, 1]
    C.om1 = &vm1[0]
    C.om2 = &vm2[0]
    C.oX = &vX[0]
    C.oZ = &vZ[0]
    C.cap = capacity
    with nogil:
        total = _region_sum(&C)
    if C.cnt > capacity:
        raise OverflowError(f"{C.cnt} region points exceed capacity {capacity}")
    n = C.cnt
    return m1[:n].copy(), m2[:n].copy(), X[:n].copy(), Z[:n].copy(), total
