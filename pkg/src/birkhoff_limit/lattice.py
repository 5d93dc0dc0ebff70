"""Unimodular planar lattices, Gauss reduction and the lattice picture of resonances.

The lattice L(N, alpha) has generator columns (1/N, N alpha) and (0, N); the
integer vector (k, k') maps to (k/N, N (k alpha + k')).  Reduction keeps the
integer coordinates of the reduced basis so that later steps (the k <-> m
correspondence, gamma) never round-trip through floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._fallback import _cdot, _frac_turn
from .params import Params, Region
from .rotation import resonant_set, signed_frac

HERMITE = (4.0 / 3.0) ** 0.25


@dataclass(frozen=True, eq=False)
class Lattice2:
    """Lattice generated by the columns of ``generator``.

    ``shear`` holds (N, alpha) when the lattice is L(N, alpha), enabling
    exact integer reduction.
    """

    generator: np.ndarray
    det_tol: float = 1e-9
    shear: tuple[int, float] | None = None

    def __post_init__(self):
        g = np.array(self.generator, dtype=float).reshape(2, 2)
        object.__setattr__(self, "generator", g)
        if not abs(self.det - 1.0) <= self.det_tol:
            raise ValueError(f"generator is not unimodular (det={self.det!r})")

    @property
    def det(self) -> float:
        g = self.generator
        return float(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0])


@dataclass(frozen=True, eq=False)
class ReducedFrame:
    """Reduced basis e1, e2 (successive minima) with e_i = B u_i."""

    e1: np.ndarray
    e2: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    source: Lattice2 | None = field(default=None, repr=False)

    @property
    def matrix(self) -> np.ndarray:
        """e1, e2 as columns."""
        return np.column_stack([self.e1, self.e2])

    @property
    def unimodular_integer(self) -> np.ndarray:
        return np.column_stack([self.u1, self.u2])


@dataclass(frozen=True)
class PointCoords:
    X: float
    Z: float
    m: tuple[int, int]


@dataclass(frozen=True)
class GammaPoint:
    g1: float
    g2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.g1, self.g2])


def lattice_of(N: int, alpha: float) -> Lattice2:
    """L(N, alpha) = diag(1/N, N) [[1, 0], [alpha, 1]] Z^2."""
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    N = int(N)
    gen = np.array([[1.0 / N, 0.0], [N * alpha, float(N)]])
    return Lattice2(gen, det_tol=1e-9, shear=(N, float(alpha)))


def _frame_from(e, u, src) -> ReducedFrame:
    return ReducedFrame(e[:, 0].copy(), e[:, 1].copy(), u[:, 0].copy(), u[:, 1].copy(), src)


def reduce(L: Lattice2, *, backend: str | None = None) -> ReducedFrame:
    """Lagrange-Gauss reduction on integer coordinates.

    Signs: first coordinate positive, or zero with the second positive.
    Equal lengths are broken toward the larger first coordinate, then the
    larger second coordinate.
    """
    k = _backend.get(backend)
    if L.shear is not None:
        N, alpha = L.shear
        e, u, st = k.reduce_shear_batch(N, np.array([alpha]))
    else:
        e, u, st = k.reduce_batch(np.ascontiguousarray(L.generator[None]))
    if st[0] != 0:
        raise ArithmeticError("reduction did not converge")
    return _frame_from(e[0], u[0], L)


def reduce_generators(gens, *, nthreads: int = 1, backend: str | None = None):
    """Batch reduction: (frames, integer coordinates) for generators (n, 2, 2)."""
    e, u, st = _backend.get(backend).reduce_batch(np.ascontiguousarray(gens, dtype=float),
                                                  nthreads)
    if np.any(st != 0):
        raise ArithmeticError("reduction did not converge")
    return e, u


def reduce_shear(N: int, alpha, *, nthreads: int = 1, backend: str | None = None):
    """Batch reduction of L(N, alpha) for an array of alpha."""
    e, u, st = _backend.get(backend).reduce_shear_batch(
        int(N), np.ascontiguousarray(alpha, dtype=float), nthreads)
    if np.any(st != 0):
        raise ArithmeticError("reduction did not converge")
    return e, u


def coords(F: ReducedFrame, m) -> PointCoords:
    m1, m2 = (int(v) for v in m)
    if F.source is not None and F.source.shear is not None:
        N, alpha = F.source.shear
        k = m1 * int(F.u1[0]) + m2 * int(F.u2[0])
        kp = m1 * int(F.u1[1]) + m2 * int(F.u2[1])
        from ._fallback import _shear_z

        return PointCoords(k / N, float(_shear_z(float(k), float(kp), alpha, float(N))), (m1, m2))
    X = float(_cdot(float(m1), F.e1[0], float(m2), F.e2[0]))
    Z = float(_cdot(float(m1), F.e1[1], float(m2), F.e2[1]))
    return PointCoords(X, Z, (m1, m2))


# ---------------------------------------------------------------------------
# sampling


def haar_generators(U: np.ndarray) -> np.ndarray:
    """Map uniform rows (theta, u, psi) to Haar-distributed generators (n, 2, 2).

    The shape tau = x + iy is drawn from dx dy / y^2 on the modular
    fundamental domain: x = sin(theta) with theta uniform in [-pi/6, pi/6]
    gives the arcsine marginal, and y = cos(theta) / (1 - u) inverts the
    conditional 1/y^2 tail above the unit circle.  A uniform rotation then
    fills the SO(2) fiber.
    """
    U = np.atleast_2d(U)
    theta = (U[:, 0] - 0.5) * (np.pi / 3.0)
    x = np.sin(theta)
    y = np.cos(theta) / (1.0 - U[:, 1])
    psi = 2.0 * np.pi * U[:, 2]
    r = 1.0 / np.sqrt(y)
    B = np.zeros((U.shape[0], 2, 2))
    B[:, 0, 0] = r
    B[:, 0, 1] = x * r
    B[:, 1, 1] = np.sqrt(y)
    c, s = np.cos(psi), np.sin(psi)
    R = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    return R @ B


def sample_haar(rng) -> Lattice2:
    from .rng import as_generator

    g = haar_generators(as_generator(rng).random((1, 3)))[0]
    return Lattice2(g, det_tol=1e-12)


def sample_geodesic_pushforward(rng, N: int) -> Lattice2:
    from .rng import as_generator

    return lattice_of(N, float(as_generator(rng).random()))


# ---------------------------------------------------------------------------
# correspondence with resonant frequencies


def gamma_from_u(x, kappa1, kappa2) -> np.ndarray:
    """({x kappa1}, {x kappa2}) in [0, 1) with an exact product."""
    x = np.asarray(x, dtype=float)
    g = np.stack([_frac_turn(np.asarray(kappa1, dtype=float), x),
                  _frac_turn(np.asarray(kappa2, dtype=float), x)], axis=-1)
    g = g - np.floor(g)
    return np.where(g >= 1.0, g - 1.0, g)


def gamma_of(F: ReducedFrame, x: float, N: int | None = None) -> GammaPoint:
    """gamma = (N x e_11, N x e_21) mod 1 computed as (x kappa1, x kappa2) mod 1."""
    if F.u1 is None or F.u2 is None:
        raise ValueError("frame lacks integer provenance")
    if F.source is not None and F.source.shear is not None and N is not None:
        if F.source.shear[0] != N:
            raise ValueError("N does not match the frame's lattice")
    g = gamma_from_u(x, F.u1[0], F.u2[0])
    return GammaPoint(float(g[0]), float(g[1]))


@dataclass(frozen=True)
class Correspondence:
    k: int
    m: tuple[int, int]
    point: PointCoords


def correspondence(alpha: float, p: Params, F: ReducedFrame | None = None) -> list[Correspondence]:
    """Frequencies of the hat set expressed in the reduced frame of L(N, alpha).

    m solves m1 u1 + m2 u2 = (k, k') exactly in integers.  Each point is
    checked against the region radius and X > 0.
    """
    if F is None:
        F = reduce(lattice_of(p.N, alpha))
    U = F.unimodular_integer.astype(np.int64)
    det = int(U[0, 0] * U[1, 1] - U[0, 1] * U[1, 0])
    if abs(det) != 1:
        raise ArithmeticError("frame is not unimodular over Z")
    inv = np.array([[U[1, 1], -U[0, 1]], [-U[1, 0], U[0, 0]]], dtype=np.int64) * det
    radius = Region(p.a, p.eps).radius
    out = []
    for k in resonant_set(alpha, p, "hat").indices:
        sf = signed_frac(int(k), alpha)
        vec = np.array([int(k), sf.integer_part], dtype=np.int64)
        m = inv @ vec
        if not np.array_equal(U @ m, vec):
            raise ArithmeticError(f"round trip failed for k={k}")
        pc = coords(F, (int(m[0]), int(m[1])))
        if not (pc.X > 0 and math.hypot(pc.X, pc.Z) <= radius):
            raise ArithmeticError(f"k={k} falls outside the region radius")
        out.append(Correspondence(int(k), (int(m[0]), int(m[1])), pc))
    return out
