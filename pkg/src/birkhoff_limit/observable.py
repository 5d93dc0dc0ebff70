"""The singular observable, its capped version and direct Birkhoff sums."""

from __future__ import annotations

import numpy as np

from . import _backend
from .params import Params


class SingularHitError(ZeroDivisionError):
    """An orbit point landed exactly on the singularity at 0."""


def phi(x, a: float):
    """x^-a - 1/(1-a) for x in (0, 1]; scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr == 0.0):
        raise SingularHitError("phi evaluated at x = 0")
    out = arr ** (-a) - 1.0 / (1.0 - a)
    return float(out) if out.ndim == 0 else out


def phi_trunc(x, p: Params):
    """phi capped at the constant ((N/eps)^a - 1)/(1-a) on [0, eps/N)."""
    arr = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(arr < p.cut, p.cap, arr ** (-p.a) - 1.0 / (1.0 - p.a))
    return float(out) if out.ndim == 0 else out


def birkhoff_norm_batch(alpha, x, p: Params, truncated: bool, *, nthreads: int = 1,
                        backend: str | None = None) -> np.ndarray:
    """(1/N^a) sum_{n<N} f({x + n alpha}) for arrays of (alpha, x).

    Untruncated sums whose orbit hits 0 exactly come back as NaN.
    """
    alpha = np.ascontiguousarray(alpha, dtype=float)
    x = np.ascontiguousarray(x, dtype=float)
    k = _backend.get(backend)
    return k.birkhoff_batch(alpha, x, p.a, p.N, p.eps, bool(truncated), nthreads)


def birkhoff_norm(alpha: float, x: float, p: Params, truncated: bool) -> float:
    """Normalized Birkhoff sum S/N^a (or Delta when ``truncated``)."""
    v = birkhoff_norm_batch([alpha], [x], p, truncated)[0]
    if np.isnan(v):
        raise SingularHitError(f"orbit of x={x} under alpha={alpha} hits 0")
    return float(v)
