"""Compiled kernels against the numpy fallback on identical inputs.

Run ``python benchmarks/bench_backends.py`` (add ``--quick`` for a short run).
Each row reports both timings, the speedup and the largest disagreement.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from birkhoff_limit import _core, _fallback
from birkhoff_limit.fourier_models import CoeffTable, model_spec
from birkhoff_limit.lattice import haar_generators
from birkhoff_limit.limit_dist import LimitTermParams, _region_args, law_draws
from birkhoff_limit.params import Params
from birkhoff_limit.rng import uniforms


def timed(fn, repeat=1):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def first(v):
    return v[0] if isinstance(v, tuple) else v


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args(argv)
    s = 0.25 if args.quick else 1.0
    p = Params(0.5, 10**4, 0.1)
    U = uniforms(1, "bench", int(400 * s), 2)
    al, x = U[:, 0].copy(), U[:, 1].copy()
    lo, hi, thr, var = model_spec("hat", p)
    tab = CoeffTable.build(p, hi, var)
    gens = haar_generators(uniforms(2, "bench-gen", int(20000 * s), 3))
    tp = LimitTermParams.make(0.5, 0.1)
    fr, g = law_draws(tp, max(2, int(8 * s)), 3)

    cases = [
        ("birkhoff sums", lambda k: k.birkhoff_batch(al, x, p.a, p.N, p.eps, True)),
        ("resonant model sum", lambda k: k.fourier_sum_batch(al, x, p.N, lo, hi, tab.A, tab.B,
                                                             thr, p.a, False)),
        ("Gauss reduction", lambda k: k.reduce_batch(gens)),
        ("lattice sum", lambda k: k.lattice_sum_batch(fr, g, *_region_args(tp))),
    ]
    print(f"{'kernel':<22}{'cython s':>11}{'python s':>11}{'speedup':>10}{'max diff':>12}")
    for name, fn in cases:
        tc, oc = timed(lambda: fn(_core), repeat=3)
        tpy, op = timed(lambda: fn(_fallback))
        diff = float(np.max(np.abs(np.asarray(first(oc), float) - np.asarray(first(op), float))))
        print(f"{name:<22}{tc:>11.4f}{tpy:>11.4f}{tpy / tc:>10.1f}{diff:>12.2e}")
    tf, (vf, cnt) = timed(lambda: _core.lattice_sum_batch(fr, g, *_region_args(tp), fast=True),
                          repeat=3)
    td, (vd, _) = timed(lambda: _core.lattice_sum_batch(fr, g, *_region_args(tp)), repeat=3)
    print(f"lattice sum, blocked SIMD path: {tf / cnt.sum() * 1e9:.1f} ns/term "
          f"(direct {td / cnt.sum() * 1e9:.1f} ns/term, max diff {np.max(np.abs(vf - vd)):.1e})")


if __name__ == "__main__":
    main()
