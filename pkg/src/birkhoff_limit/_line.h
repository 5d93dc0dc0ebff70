/* Vectorizable inner loop for lattice sums along one line segment. */
#ifndef BIRKHOFF_LINE_H
#define BIRKHOFF_LINE_H

#include <math.h>

#define LINE_BLOCK 256

typedef struct {
    double lo, hi, xlo, zstrip, zc, am1, b2, d2, cinv;
    int strip, half;
    /* optional tail coefficients: H(u) = I(u) e^{-2 pi i u} sampled on a grid
     * in s = u^(1-a); I(u) = int_u^inf x^-a e^{2 pi i x} dx replaces b + i d */
    const double *hre, *him;
    double hinv, eps, ire, iim;
    int tail, hlast;
    /* a = 1/2 only: per-band polynomial fit of H, row layout
     * (mid, 1/half, re[0..POLY_DEG], im[0..POLY_DEG]); NULL when absent */
    const double *poly, *pc;
    int nband;
} LineParams;

#define POLY_DEG 8
#define POLY_ROW (2 + 2 * (POLY_DEG + 1))

#define TAIL_SERIES_CUT 0.05
#define TAIL_SERIES_TERMS 14

/* Cubic Lagrange weights on nodes 0..3 at t. */
static inline void lagrange4(double t, double *w)
{
    double t1 = t - 1.0, t2 = t - 2.0, t3 = t - 3.0;
    w[0] = -t1 * t2 * t3 * (1.0 / 6.0);
    w[1] = t * t2 * t3 * 0.5;
    w[2] = -t * t1 * t3 * 0.5;
    w[3] = t * t1 * t2 * (1.0 / 6.0);
}

static inline void tail_table_coef(const LineParams *L, double s, double er, double ei,
                                   double *re, double *im)
{
    double t = s * L->hinv, w[4];
    t = t < L->hlast + 1.0 ? t : L->hlast + 1.0;
    int b = (int)t - 1;
    b = b < 0 ? 0 : (b > L->hlast ? L->hlast : b);
    lagrange4(t - b, w);
    double hr = w[0] * L->hre[b] + w[1] * L->hre[b + 1] + w[2] * L->hre[b + 2] +
                w[3] * L->hre[b + 3];
    double hi = w[0] * L->him[b] + w[1] * L->him[b + 1] + w[2] * L->him[b + 2] +
                w[3] * L->him[b + 3];
    *re = hr * er - hi * ei;
    *im = hr * ei + hi * er;
}

/* I(u) given s = u^(1-a) and E = e^{2 pi i u}.  General exponent: a short
 * series near the origin, where the grid in s loses smoothness. */
static inline void tail_coef(const LineParams *L, double u, double s, double er,
                             double ei, double *re, double *im)
{
    if (!L->half && u < TAIL_SERIES_CUT) {
        /* G(u) = u^(1-a) sum_j (2 pi i u)^j / (j! (j + 1 - a)) by Horner */
        double wi = 6.283185307179586 * u, ar = 0.0, ai = 0.0, t;
        double oma = -L->am1;
        int j;
        for (j = TAIL_SERIES_TERMS - 1; j >= 0; j--) {
            t = -ai * wi / (j + 1.0);
            ai = ar * wi / (j + 1.0);
            ar = t + 1.0 / (j + oma);
        }
        *re = L->ire - s * ar;
        *im = L->iim - s * ai;
        return;
    }
    tail_table_coef(L, s, er, ei, re, im);
}

/* Powers z_k[j] = z_k[0] m_k^j (k = 0, 1, 2) for j < n.  The first eight
 * entries are built sequentially, the rest as z[j] = z[j-8] m^8 so that the
 * loop carries eight independent chains per sequence. */
static inline void line_chains(int n, const double *z0r, const double *z0i,
                               const double *mr, const double *mi,
                               double *restrict ar, double *restrict ai,
                               double *restrict br, double *restrict bi,
                               double *restrict cr, double *restrict ci)
{
    double *zr[3] = {ar, br, cr}, *zi[3] = {ai, bi, ci};
    double m8r[3], m8i[3], t;
    int j, k, q;
    for (k = 0; k < 3; k++) {
        zr[k][0] = z0r[k];
        zi[k][0] = z0i[k];
        for (j = 1; j < 8 && j < n; j++) {
            zr[k][j] = zr[k][j - 1] * mr[k] - zi[k][j - 1] * mi[k];
            zi[k][j] = zr[k][j - 1] * mi[k] + zi[k][j - 1] * mr[k];
        }
        m8r[k] = mr[k];
        m8i[k] = mi[k];
        for (q = 0; q < 3; q++) {
            t = m8r[k] * m8r[k] - m8i[k] * m8i[k];
            m8i[k] = 2.0 * m8r[k] * m8i[k];
            m8r[k] = t;
        }
    }
    const double ur = m8r[0], ui = m8i[0], vr = m8r[1], vi = m8i[1];
    const double wr = m8r[2], wi = m8i[2];
    for (j = 8; j < n; j++) {
        ar[j] = ar[j - 8] * ur - ai[j - 8] * ui;
        ai[j] = ar[j - 8] * ui + ai[j - 8] * ur;
        br[j] = br[j - 8] * vr - bi[j - 8] * vi;
        bi[j] = br[j - 8] * vi + bi[j - 8] * vr;
        cr[j] = cr[j - 8] * wr - ci[j - 8] * wi;
        ci[j] = cr[j - 8] * wi + ci[j - 8] * wr;
    }
}

/* Sum of (A cos th + B sin th) sinc(Z) over the admitted points of a block.
 * t = e^{i th}, q = e^{i pi Z}, p = e^{i pi eps X} at the block start, with
 * their per-step multipliers. */
static inline double line_block(const LineParams *L, int n, double X0, double dX,
                                double Z0, double dZ,
                                double tr, double ti, double mtr, double mti,
                                double qr, double qi, double mqr, double mqi,
                                double pr, double pi_, double mpr, double mpi,
                                long long *count)
{
    double Tr[LINE_BLOCK], Ti[LINE_BLOCK], Qr[LINE_BLOCK], Qi[LINE_BLOCK];
    double Pr[LINE_BLOCK], Pi[LINE_BLOCK];
    double acc = 0.0;
    long long c = 0;
    const double lo = L->lo, hi = L->hi, xlo = L->xlo, zc = L->zc, zs = L->zstrip;
    const double b2 = L->b2, d2 = L->d2, cinv = L->cinv, am1 = L->am1;
    const int strip = L->strip;
    int j;
    const double z0r[3] = {tr, qr, pr}, z0i[3] = {ti, qi, pi_};
    const double mr[3] = {mtr, mqr, mpr}, mi[3] = {mti, mqi, mpi};
    line_chains(n, z0r, z0i, mr, mi, Tr, Ti, Qr, Qi, Pr, Pi);
    if (L->half && L->tail && L->pc) {
        const double eps = L->eps, mid = L->pc[0], ih = L->pc[1];
        const double *cre = L->pc + 2, *cim = L->pc + 3 + POLY_DEG;
#pragma omp simd reduction(+:acc, c)
        for (j = 0; j < n; j++) {
            double X = X0 + j * dX, Z = Z0 + j * dZ;
            double r = 1.0 / sqrt(X);
            double inv = cinv * (r * r);
            double er = Pr[j] * Pr[j] - Pi[j] * Pi[j], ei = 2.0 * Pr[j] * Pi[j];
            double t = (sqrt(fabs(X) * eps) - mid) * ih;
            double hr = cre[POLY_DEG], hm = cim[POLY_DEG];
            for (int q = POLY_DEG - 1; q >= 0; q--) {
                hr = hr * t + cre[q];
                hm = hm * t + cim[q];
            }
            double Ir = hr * er - hm * ei, Ii = hr * ei + hm * er;
            double A = 2.0 * Ir * r + inv * ei;
            double B = 2.0 * Ii * r + inv * 2.0 * Pi[j] * Pi[j];
            double pz = 3.141592653589793 * Z;
            double sinc = fabs(Z) < 1e-4 ? 1.0 - pz * pz / 6.0 : Qi[j] / pz;
            double term = (A * Tr[j] + B * Ti[j]) * sinc;
            int in = (X >= lo) & (X < hi) & (X > xlo) & (fabs(Z) <= zc * r) &
                     ((!strip) | ((Z > -zs) & (Z <= zs)));
            acc += in ? term : 0.0;
            c += in;
        }
    } else if (L->half && L->tail) {
        const double eps = L->eps, hinv = L->hinv, tmax = L->hlast + 1.0;
        const double *restrict hre = L->hre, *restrict him = L->him;
        const int hlast = L->hlast;
#pragma omp simd reduction(+:acc, c)
        for (j = 0; j < n; j++) {
            double X = X0 + j * dX, Z = Z0 + j * dZ;
            double r = 1.0 / sqrt(X);
            double inv = cinv * (r * r);
            double er = Pr[j] * Pr[j] - Pi[j] * Pi[j], ei = 2.0 * Pr[j] * Pi[j];
            double t = sqrt(fabs(X) * eps) * hinv;
            t = t < tmax ? t : tmax;
            int b = (int)t - 1;
            b = b > 0 ? b : 0;
            b = b < hlast ? b : hlast;
            double f = t - b, f1 = f - 1.0, f2 = f - 2.0, f3 = f - 3.0;
            double w0 = -f1 * f2 * f3 * (1.0 / 6.0), w1 = f * f2 * f3 * 0.5;
            double w2 = -f * f1 * f3 * 0.5, w3 = f * f1 * f2 * (1.0 / 6.0);
            double hr = w0 * hre[b] + w1 * hre[b + 1] + w2 * hre[b + 2] + w3 * hre[b + 3];
            double hm = w0 * him[b] + w1 * him[b + 1] + w2 * him[b + 2] + w3 * him[b + 3];
            double Ir = hr * er - hm * ei, Ii = hr * ei + hm * er;
            double A = 2.0 * Ir * r + inv * ei;
            double B = 2.0 * Ii * r + inv * 2.0 * Pi[j] * Pi[j];
            double pz = 3.141592653589793 * Z;
            double sinc = fabs(Z) < 1e-4 ? 1.0 - pz * pz / 6.0 : Qi[j] / pz;
            double term = (A * Tr[j] + B * Ti[j]) * sinc;
            int in = (X >= lo) & (X < hi) & (X > xlo) & (fabs(Z) <= zc * r) &
                     ((!strip) | ((Z > -zs) & (Z <= zs)));
            acc += in ? term : 0.0;
            c += in;
        }
    } else if (L->half) {
#pragma omp simd reduction(+:acc, c)
        for (j = 0; j < n; j++) {
            double X = X0 + j * dX, Z = Z0 + j * dZ;
            double r = 1.0 / sqrt(X);
            double inv = cinv * (r * r);
            double A = b2 * r + inv * 2.0 * Pi[j] * Pr[j];
            double B = d2 * r + inv * 2.0 * Pi[j] * Pi[j];
            double pz = 3.141592653589793 * Z;
            double sinc = fabs(Z) < 1e-4 ? 1.0 - pz * pz / 6.0 : Qi[j] / pz;
            double term = (A * Tr[j] + B * Ti[j]) * sinc;
            int in = (X >= lo) & (X < hi) & (X > xlo) & (fabs(Z) <= zc * r) &
                     ((!strip) | ((Z > -zs) & (Z <= zs)));
            acc += in ? term : 0.0;
            c += in;
        }
    } else {
        for (j = 0; j < n; j++) {
            double X = X0 + j * dX, Z = Z0 + j * dZ;
            if (!((X >= lo) & (X < hi) & (X > xlo)))
                continue;
            if (strip && !((Z > -zs) & (Z <= zs)))
                continue;
            double xa = pow(X, am1);
            if (fabs(Z) > zc * xa)
                continue;
            double inv = cinv / X;
            double A, B;
            if (L->tail) {
                double Ir, Ii, u = X * L->eps;
                tail_coef(L, u, pow(u, -am1), Pr[j] * Pr[j] - Pi[j] * Pi[j],
                          2.0 * Pr[j] * Pi[j], &Ir, &Ii);
                A = 2.0 * Ir * xa + inv * 2.0 * Pi[j] * Pr[j];
                B = 2.0 * Ii * xa + inv * 2.0 * Pi[j] * Pi[j];
            } else {
                A = b2 * xa + inv * 2.0 * Pi[j] * Pr[j];
                B = d2 * xa + inv * 2.0 * Pi[j] * Pi[j];
            }
            double pz = 3.141592653589793 * Z;
            double sinc = fabs(Z) < 1e-4 ? 1.0 - pz * pz / 6.0 : Qi[j] / pz;
            acc += (A * Tr[j] + B * Ti[j]) * sinc;
            c += 1;
        }
    }
    *count += c;
    return acc;
}

#endif
