"""Hot per-pixel kernels with a compiled fast path and a numpy fallback.

The backend is chosen once at import time. Set DEPTHPROJ_KERNELS to
"c" to require the compiled extension, "python" to force the numpy
fallback, or "auto" (default) to prefer the extension when built.
Both backends return bit-identical float64 results.
"""

import os

from . import _pure

_choice = os.environ.get("DEPTHPROJ_KERNELS", "auto").lower()
if _choice not in ("auto", "c", "python"):
    raise RuntimeError(
        f"DEPTHPROJ_KERNELS must be auto, c or python, got {_choice!r}")

_impl = None
if _choice in ("auto", "c"):
    try:
        from . import _speed as _impl  # noqa: F401
    except ImportError:
        if _choice == "c":
            raise ImportError(
                "DEPTHPROJ_KERNELS=c but the compiled kernels are not built; "
                "run 'python setup.py build_ext --inplace' or reinstall") from None
if _impl is None:
    _impl = _pure

BACKEND = "c" if _impl is not _pure else "python"

raycast = _impl.raycast
scatter_min = _impl.scatter_min
tile_min = _impl.tile_min


def backends() -> dict:
    """All importable backends, keyed by name (for tests and benchmarks)."""
    found = {"python": _pure}
    try:
        from . import _speed
        found["c"] = _speed
    except ImportError:
        pass
    return found
