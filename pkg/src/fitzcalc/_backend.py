"""Kernel backend selection.

The compiled extension is preferred when importable; set
``FITZCALC_BACKEND=python`` (or ``cython``) to force a choice.
``FITZCALC_THREADS`` caps the worker count used by batched per-slice
operations (0 or unset means automatic).
"""

from __future__ import annotations

import os

from . import _kernels_py

__all__ = ["kernels", "BACKEND", "get_kernels", "worker_count"]


def get_kernels(name: str | None = None):
    """Return the kernel module for ``name`` ('cython', 'python' or None=auto)."""
    choice = (name or os.environ.get("FITZCALC_BACKEND", "auto")).lower()
    if choice in ("python", "py"):
        return _kernels_py
    try:
        from . import _kernels  # compiled extension
    except ImportError:
        _kernels = None
    if choice in ("cython", "c", "compiled"):
        if _kernels is None:
            raise ImportError("compiled kernels requested but not built")
        return _kernels
    if choice != "auto":
        raise ValueError(f"unknown backend {choice!r}")
    return _kernels if _kernels is not None else _kernels_py


kernels = get_kernels()
BACKEND = kernels.BACKEND_NAME


def worker_count() -> int:
    """Parallelism cap from FITZCALC_THREADS (0 = auto -> single worker).

    The batched kernels are memory-bound at production grid sizes, so the
    automatic choice is sequential; the knob exists for oversized scenarios.
    """
    raw = os.environ.get("FITZCALC_THREADS", "0")
    try:
        val = int(raw)
    except ValueError:
        raise ValueError(f"FITZCALC_THREADS must be an integer, got {raw!r}")
    if val < 0:
        raise ValueError("FITZCALC_THREADS must be >= 0")
    if val == 0:
        return 1
    return val
