"""Backend selection for the value-iteration sweep.

The compiled kernel is used when it was built; ``PDFASYNTH_PURE=1`` forces
the pure-Python reference implementation.
"""
import os

from . import _fallback

try:
    from . import _sweep as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["cython"] = _compiled


def get_backend(name: str | None = None):
    if name is None:
        if os.environ.get("PDFASYNTH_PURE"):
            return _fallback
        return _compiled if _compiled is not None else _fallback
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} is not available (have {sorted(BACKENDS)})") from None


def default_backend_name() -> str:
    return get_backend().name
