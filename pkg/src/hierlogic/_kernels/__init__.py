"""Kernel backend selection for the inference hot paths.

The compiled extension is used when importable, with a pure-NumPy fallback
so the package works without a compiler.  Set ``HIERLOGIC_BACKEND`` to
``numpy`` or ``native`` to force one; ``auto`` (default) prefers native.
"""

from __future__ import annotations

import logging
import os

from . import numpy_backend

log = logging.getLogger("hierlogic.kernels")

_requested = os.environ.get("HIERLOGIC_BACKEND", "auto").strip().lower() or "auto"
if _requested not in ("auto", "numpy", "native"):
    raise ValueError(
        f"HIERLOGIC_BACKEND must be auto, numpy, or native, got {_requested!r}"
    )

native_backend = None
if _requested in ("auto", "native"):
    try:
        from . import _native as native_backend  # type: ignore[no-redef]
    except ImportError as exc:
        if _requested == "native":
            raise ImportError(
                "HIERLOGIC_BACKEND=native but the compiled kernels are not "
                f"importable: {exc}"
            ) from exc
        log.debug("compiled kernels unavailable, using NumPy fallback: %s", exc)

_active = native_backend if native_backend is not None else numpy_backend


def get_backend(name: str | None = None):
    """Return a kernel backend module: active one, or by explicit name."""
    if name in (None, "", "auto"):
        return _active
    if name == "numpy":
        return numpy_backend
    if name == "native":
        if native_backend is None:
            raise ValueError("compiled kernels are not available in this install")
        return native_backend
    raise ValueError(f"unknown backend {name!r}")


def active_backend_name() -> str:
    return _active.NAME


def available_backends() -> tuple[str, ...]:
    return ("numpy", "native") if native_backend is not None else ("numpy",)
