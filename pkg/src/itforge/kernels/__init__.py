"""Kernel backend selection.

Two interchangeable implementations of the dense network kernels exist: a
compiled extension (``native``) and a NumPy one (``python``). The NumPy
path delegates its matmuls to BLAS and, on these layer widths, outruns the
scalar compiled loops (see benchmarks/bench_backends.py), so ``auto``
prefers it. ``FORGE_BACKEND`` forces the choice: ``native``, ``python``,
or ``auto`` (default).
"""

from __future__ import annotations

import os
from types import ModuleType

from . import numpy_backend

_BACKENDS: dict[str, ModuleType] = {"python": numpy_backend}
try:
    from . import _native  # type: ignore[attr-defined]

    _BACKENDS["native"] = _native
except ImportError:
    _native = None


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str | None = None) -> ModuleType:
    """Resolve a backend by name; ``None``/'auto' picks the fast default."""
    if name is None:
        name = os.environ.get("FORGE_BACKEND", "auto")
    if name == "auto":
        return numpy_backend
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; available: {', '.join(available_backends())}"
        ) from None


default_backend = get_backend()
