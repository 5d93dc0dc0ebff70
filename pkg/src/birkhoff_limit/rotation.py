"""Signed fractional parts, resonant frequency sets and exclusion sets."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _backend
from .params import Params


class DegenerateAlphaWarning(RuntimeWarning):
    """Some scanned k has k*alpha exactly an integer."""


@dataclass(frozen=True)
class SignedFrac:
    value: float
    integer_part: int


def signed_frac(k: int, alpha: float) -> SignedFrac:
    """{k alpha} in (-1/2, 1/2] together with k' such that k alpha + k' = {k alpha}."""
    v, kp = _backend.kernels.signed_frac(float(k), float(alpha))
    return SignedFrac(v, int(kp))


def signed_frac_array(k, alpha) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized signed fractional part (values, integer parts)."""
    from ._fallback import _sfrac

    v, kp = _sfrac(np.asarray(k, dtype=float), np.asarray(alpha, dtype=float))
    return v, kp.astype(np.int64)


@dataclass(frozen=True)
class ResonantSet:
    """Sorted frequencies of the full set S or the hat set."""

    indices: np.ndarray
    band: str
    zero_hits: int = 0

    def __len__(self) -> int:
        return int(self.indices.size)

    def __contains__(self, k) -> bool:
        i = np.searchsorted(self.indices, k)
        return bool(i < self.indices.size and self.indices[i] == k)


def scan_range(p: Params, band: str) -> tuple[int, int]:
    if band == "full":
        return 1, p.k_max
    if band == "hat":
        return p.k_hat_min, p.k_max
    raise ValueError(f"band must be 'full' or 'hat', got {band!r}")


def resonant_set(alpha: float, p: Params, band: str = "full") -> ResonantSet:
    lo, hi = scan_range(p, band)
    if hi < lo:
        return ResonantSet(np.empty(0, dtype=np.int64), band)
    ks, zeros = _backend.kernels.resonant_scan(float(alpha), p.a, lo, hi, p.res_threshold)
    if zeros:
        warnings.warn(f"alpha={alpha}: {zeros} scanned k with k*alpha integral",
                      DegenerateAlphaWarning, stacklevel=2)
    return ResonantSet(np.asarray(ks, dtype=np.int64), band, int(zeros))


def is_member(k: int, alpha: float, p: Params, band: str = "full") -> bool:
    """Independent re-check of the defining inequalities for one k."""
    lo, hi = scan_range(p, band)
    if not lo <= k <= hi:
        return False
    return k ** (1.0 - p.a) * abs(signed_frac(k, alpha).value) <= p.res_threshold


def exclusion_cutoff(p: Params) -> int:
    """Largest k entering the exclusion union (k <= eps^(1+2/a+2a) N)."""
    return math.floor(p.k_hat_low)


def in_exclusion_batch(alpha, p: Params) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    out = np.zeros(alpha.shape, dtype=bool)
    thr = p.res_threshold
    for k in range(1, exclusion_cutoff(p) + 1):
        s, _ = signed_frac_array(k, alpha)
        out |= k ** (1.0 - p.a) * np.abs(s) <= thr
    return out


def in_exclusion(alpha: float, p: Params) -> bool:
    """True when alpha lies in the exclusion set E_{N, eps}."""
    return bool(in_exclusion_batch(np.array([alpha]), p)[0])
