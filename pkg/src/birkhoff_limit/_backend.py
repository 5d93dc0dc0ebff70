"""Kernel backend selection.

The compiled extension is used when it imports; ``BIRKHOFF_BACKEND=python``
forces the numpy fallback.
"""

from __future__ import annotations

import os

from . import _fallback

kernels = _fallback
name = "python"

if os.environ.get("BIRKHOFF_BACKEND", "").lower() != "python":
    try:
        from . import _core
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        kernels = _core
        name = "cython"


def get(which: str | None = None):
    """Kernel module by name (``"cython"``, ``"python"``) or the active one."""
    if which is None:
        return kernels
    if which == "python":
        return _fallback
    if which == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {which!r}")
