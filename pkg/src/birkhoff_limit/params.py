"""The (a, N, eps) triple and every cutoff derived from it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Params:
    """Exponent ``a``, time horizon ``N`` and truncation level ``eps``.

    All index cutoffs used by the Fourier models and the lattice region are
    exposed as properties so that every module reads them from one place.
    """

    a: float
    N: int
    eps: float

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ValueError(f"a must lie in (0, 1), got {self.a}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        object.__setattr__(self, "N", int(self.N))
        for name in ("exp_bar", "exp_res", "exp_hat"):
            v = self.eps ** getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"eps^{name} underflows for eps={self.eps}, a={self.a}")

    # exponents
    @property
    def exp_bar(self) -> float:
        return 1.0 + 2.0 * self.a

    @property
    def exp_res(self) -> float:
        return 1.0 + self.a + 2.0 * self.a ** 2

    @property
    def exp_hat(self) -> float:
        return 1.0 + 2.0 / self.a + 2.0 * self.a

    # observable
    @property
    def cut(self) -> float:
        """Truncation point eps/N below which the observable is capped."""
        return self.eps / self.N

    @property
    def cap(self) -> float:
        a = self.a
        return ((self.N / self.eps) ** a - 1.0) / (1.0 - a)

    # frequency cutoffs
    @property
    def k_bar(self) -> float:
        """Strict upper bound N / eps^(1+2a) on summed frequencies."""
        return self.N / self.eps ** self.exp_bar

    @property
    def k_hat_low(self) -> float:
        """Strict lower bound eps^(1+2/a+2a) N for the hat band."""
        return self.eps ** self.exp_hat * self.N

    @property
    def res_threshold(self) -> float:
        """Right-hand side of k^(1-a) |{k alpha}| <= 1 / (eps^(1+a+2a^2) N^a)."""
        return 1.0 / (self.eps ** self.exp_res * self.N ** self.a)

    @property
    def k_max(self) -> int:
        """Largest integer strictly below ``k_bar``."""
        return strict_floor(self.k_bar)

    @property
    def k_hat_min(self) -> int:
        """Smallest integer strictly above ``k_hat_low``."""
        return math.floor(self.k_hat_low) + 1


BAND_RATIO = 1.4142135623730951


@dataclass(frozen=True)
class Region:
    """Resonant region in lattice coordinates, independent of N.

    ``x_lo < X < x_hi`` and ``|Z| <= z_coef * X^(a-1)``.
    """

    a: float
    eps: float

    @property
    def x_lo(self) -> float:
        return self.eps ** (1.0 + 2.0 / self.a + 2.0 * self.a)

    @property
    def x_hi(self) -> float:
        return self.eps ** -(1.0 + 2.0 * self.a)

    @property
    def z_coef(self) -> float:
        return self.eps ** -(1.0 + self.a + 2.0 * self.a ** 2)

    @property
    def z_max(self) -> float:
        """Largest |Z| reachable inside the region (attained as X -> x_lo)."""
        return self.eps ** -(2.0 * self.a + 2.0 / self.a)

    @property
    def radius(self) -> float:
        """Euclidean radius containing the whole region."""
        return self.x_hi + self.z_max

    def band_edges(self) -> np.ndarray:
        """Edges of the geometric X-bands used for enumeration (same arithmetic as the kernels)."""
        out = [self.x_lo]
        x0, hi = self.x_lo, self.x_hi
        while x0 < hi:
            x0 = min(x0 * BAND_RATIO, hi)
            out.append(x0)
        return np.array(out)

    def area(self) -> float:
        a = self.a
        return 2.0 * self.z_coef * (self.x_hi ** a - self.x_lo ** a) / a


def strict_floor(v: float) -> int:
    """Largest integer k with k < v."""
    f = math.floor(v)
    return f - 1 if f == v else f
