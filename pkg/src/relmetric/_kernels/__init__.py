"""Kernel backend selection.

The compiled extension is preferred when importable; the pure numpy
fallback keeps the package functional without a compiler. Setting
RELMETRIC_PURE=1 forces the fallback (useful for backend-parity tests
and debugging).
"""

from __future__ import annotations

import os

from . import pure

if os.environ.get("RELMETRIC_PURE", "") in ("1", "true", "yes"):
    _impl = pure
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = pure

mahalanobis_cross = _impl.mahalanobis_cross
itml_sweep = _impl.itml_sweep


def backend_name() -> str:
    """Active backend: "native" (compiled) or "pure" (numpy fallback)."""
    return _impl.BACKEND


__all__ = ["mahalanobis_cross", "itml_sweep", "backend_name", "pure"]
