"""Backend selection for the numeric kernels.

All hot numeric code lives in :mod:`gtland._kernels` and is written so it
runs identically as plain Python/NumPy or compiled by numba in nopython
mode.  The active backend is chosen once, at import time, from the
``GTLAND_NUMBA`` environment variable:

* ``GTLAND_NUMBA=1`` (or unset, the default) - compile kernels with numba
  when it is importable.
* ``GTLAND_NUMBA=0`` - force the pure NumPy/Python fallback path.

``backend_name()`` reports which path is live; ``benchmarks/bench_backends.py``
times one against the other.
"""

import os

_flag = os.environ.get("GTLAND_NUMBA", "auto").strip().lower()

if _flag in ("0", "false", "off", "no"):
    NUMBA_ENABLED = False
elif _flag in ("", "1", "true", "on", "yes", "auto"):
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        if _flag in ("1", "true", "on", "yes"):
            raise
        NUMBA_ENABLED = False
else:
    raise ValueError(
        f"unrecognized GTLAND_NUMBA value {_flag!r}; use 1/0 (or true/false)"
    )


if NUMBA_ENABLED:
    from numba import njit as _njit

    def maybe_njit(*args, **kwargs):
        """numba.njit with on-disk caching; identity decorator when disabled."""
        kwargs.setdefault("cache", True)
        if args and callable(args[0]):
            return _njit(**kwargs)(args[0])
        return _njit(*args, **kwargs)

else:

    def maybe_njit(*args, **kwargs):
        """numba.njit with on-disk caching; identity decorator when disabled."""
        if args and callable(args[0]):
            return args[0]

        def _identity(fn):
            return fn

        return _identity


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
