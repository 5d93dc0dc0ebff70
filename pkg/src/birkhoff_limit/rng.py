"""Counter-based random streams keyed by (seed, tag, chunk).

Samples are generated in fixed chunks of ``CHUNK`` rows, each chunk from its
own Philox stream, so any sample's value depends only on the seed, the tag
and its index.
"""

from __future__ import annotations

import zlib

import numpy as np

CHUNK = 4096


def stream(seed: int, tag: str, chunk: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), zlib.crc32(tag.encode()), int(chunk)])
    return np.random.Generator(np.random.Philox(ss))


def uniforms(seed: int, tag: str, n: int, width: int = 1, start: int = 0) -> np.ndarray:
    """Rows ``start .. start+n-1`` of the (seed, tag) uniform table, shape (n, width)."""
    out = np.empty((n, width))
    if n == 0:
        return out
    first = start // CHUNK
    last = (start + n - 1) // CHUNK
    for c in range(first, last + 1):
        block = stream(seed, tag, c).random((CHUNK, width))
        lo = max(start, c * CHUNK)
        hi = min(start + n, (c + 1) * CHUNK)
        out[lo - start:hi - start] = block[lo - c * CHUNK:hi - c * CHUNK]
    return out


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
