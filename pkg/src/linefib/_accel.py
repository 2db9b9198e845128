"""Backend selection for the hot kernels.

Numba is used when it is importable, unless ``LINEFIB_NUMBA`` is set to
``0``/``false``/``no``/``off``, in which case every kernel runs on its
pure-numpy (or plain Python) path.  The flag is read once at import time.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("LINEFIB_NUMBA", "1").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and _FLAG not in ("0", "false", "no", "off")


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is available, otherwise a no-op decorator.

    Kernels are always decorated (so both paths can be benchmarked side by
    side); callers pick the compiled or the numpy variant through ``USE_NUMBA``.
    """
    if _numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", False)
    kwargs.setdefault("error_model", "numpy")
    return _numba.njit(*args, **kwargs)
