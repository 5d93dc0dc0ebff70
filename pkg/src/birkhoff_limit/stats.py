"""Empirical distributions, KS distances and Monte Carlo estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Z95 = 1.959963984540054


class InsufficientSamplesError(RuntimeError):
    pass


@dataclass(frozen=True)
class MCResult:
    """Monte Carlo estimate with a 95% interval, sample size and seed."""

    estimate: float
    lo: float
    hi: float
    n: int
    seed: int | None = None
    skipped: int = 0

    def as_dict(self) -> dict:
        return {"estimate": self.estimate, "ci": [self.lo, self.hi], "n": self.n,
                "seed": self.seed, "skipped": self.skipped}


class ECDF:
    """Right-continuous empirical CDF of a finite sample."""

    def __init__(self, samples):
        s = np.sort(np.asarray(samples, dtype=float).ravel())
        if s.size == 0:
            raise ValueError("ECDF needs at least one sample")
        if np.any(np.isnan(s)):
            raise ValueError("ECDF samples contain NaN")
        self.samples = s

    @property
    def n(self) -> int:
        return int(self.samples.size)

    def __call__(self, z):
        return np.searchsorted(self.samples, z, side="right") / self.n

    def quantile(self, q):
        """Smallest sample s with F(s) >= q."""
        q = np.asarray(q, dtype=float)
        idx = np.clip(np.ceil(q * self.n).astype(int) - 1, 0, self.n - 1)
        return self.samples[idx]

    def mean(self) -> float:
        return float(np.mean(self.samples))


def ks(A: ECDF, B: ECDF) -> float:
    """sup_z |F_A(z) - F_B(z)| over the merged jump points."""
    z = np.concatenate([A.samples, B.samples])
    return float(np.max(np.abs(A(z) - B(z))))


def ks_uniform(A: ECDF) -> float:
    """KS distance to the uniform law on [0, 1]."""
    s = np.clip(A.samples, 0.0, 1.0)
    i = np.arange(1, A.n + 1)
    return float(max(np.max(i / A.n - s), np.max(s - (i - 1) / A.n)))


def ks_cdf(A: ECDF, cdf) -> float:
    """KS distance to a continuous reference CDF."""
    c = cdf(A.samples)
    i = np.arange(1, A.n + 1)
    return float(max(np.max(i / A.n - c), np.max(c - (i - 1) / A.n)))


def ks_critical(n: int, m: int | None = None, level: float = 0.05) -> float:
    """Asymptotic KS critical value c(level) sqrt((n+m)/(n m))."""
    c = math.sqrt(-0.5 * math.log(level / 2.0))
    if m is None:
        return c / math.sqrt(n)
    return c * math.sqrt((n + m) / (n * m))


def wilson(hits: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    p = hits / n
    den = 1.0 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if hits == 0 else max(0.0, mid - half)
    hi = 1.0 if hits == n else min(1.0, mid + half)
    return lo, hi


def measure_estimate(predicate, n: int, seed: int = 0, *, width: int = 2,
                     tag: str = "measure") -> MCResult:
    """Fraction of n uniform points (rows of ``width`` coordinates) satisfying ``predicate``.

    ``predicate`` receives the (n, width) array and returns booleans.
    """
    from .rng import uniforms

    U = uniforms(seed, tag, n, width)
    hits = int(np.count_nonzero(np.asarray(predicate(U), dtype=bool)))
    lo, hi = wilson(hits, n)
    return MCResult(hits / n, lo, hi, n, seed)


def mean_estimate(values, seed: int | None = None) -> MCResult:
    """Sample mean with a normal 95% interval."""
    v = np.asarray(values, dtype=float)
    m = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.inf
    return MCResult(m, m - Z95 * se, m + Z95 * se, int(v.size), seed)


def l2_gap(modelA: str, modelB: str, p, n: int, exclude: bool = False, rng: int = 0,
           **kw) -> MCResult:
    """Monte Carlo integral of (A - B)^2 over uniform (alpha, x).

    Models are tags understood by :func:`evaluate_model`.  With ``exclude``
    the samples with alpha in the exclusion set are dropped and counted.
    """
    from .rng import uniforms
    from .rotation import in_exclusion_batch

    seed = int(rng)
    U = uniforms(seed, "l2-gap", n, 2)
    alpha, x = U[:, 0], U[:, 1]
    keep = np.ones(n, dtype=bool)
    if exclude:
        keep = ~in_exclusion_batch(alpha, p)
    used = int(keep.sum())
    if used < n / 10:
        raise InsufficientSamplesError(f"only {used} of {n} samples left after exclusion")
    alpha, x = alpha[keep], x[keep]
    if modelA == modelB:
        sq = np.zeros(used)
    else:
        sq = (evaluate_model(modelA, alpha, x, p, **kw) - evaluate_model(modelB, alpha, x, p, **kw)) ** 2
    r = mean_estimate(sq, seed)
    # the integral over the torus minus E counts dropped samples as zero
    scale = used / n
    return MCResult(r.estimate * scale, r.lo * scale, r.hi * scale, n, seed, n - used)


def evaluate_model(name: str, alpha, x, p, **kw) -> np.ndarray:
    """Evaluate a named model on arrays: "delta", "direct", "recon", or a model tag."""
    from .fourier_models import model_sum_batch, reconstruct
    from .observable import birkhoff_norm_batch

    if name in ("delta", "direct"):
        return birkhoff_norm_batch(alpha, x, p, True, nthreads=kw.get("nthreads", 1))
    if name == "birkhoff":
        return birkhoff_norm_batch(alpha, x, p, False, nthreads=kw.get("nthreads", 1))
    if name == "recon":
        return reconstruct(alpha, x, p, kw.get("tol", 1e-6), nthreads=kw.get("nthreads", 1)).value
    return model_sum_batch(alpha, x, p, name, nthreads=kw.get("nthreads", 1))
