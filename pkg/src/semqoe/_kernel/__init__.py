"""Kernel backend selection: compiled extension if present, numpy fallback otherwise.

Set SEMQOE_KERNEL=python or SEMQOE_KERNEL=compiled to force a backend; the
default prefers the compiled extension and silently falls back.
"""
from __future__ import annotations

import os

from . import _pyref

_FORCED = os.environ.get("SEMQOE_KERNEL", "auto").strip().lower()

if _FORCED not in ("auto", "compiled", "python"):
    raise RuntimeError(f"SEMQOE_KERNEL must be auto, compiled or python, got {_FORCED!r}")

if _FORCED == "python":
    _impl = _pyref
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        if _FORCED == "compiled":
            raise
        _impl = _pyref
        BACKEND = "python"

sinr_eval = _impl.sinr_eval
p1_scan_single = _impl.p1_scan_single
p1_scan_bimodal = _impl.p1_scan_bimodal


def get_backend(name: str):
    """Explicit backend module lookup, used by tests and the benchmark."""
    if name == "python":
        return _pyref
    if name == "compiled":
        from . import _core  # raises ImportError when not built
        return _core
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> tuple:
    try:
        get_backend("compiled")
    except ImportError:
        return ("python",)
    return ("python", "compiled")
