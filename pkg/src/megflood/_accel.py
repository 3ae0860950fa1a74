"""Backend selection for the hot kernels.

Numba is used when it imports cleanly and ``MEGFLOOD_DISABLE_NUMBA`` is unset
(or set to ``0``/``false``).  Otherwise every kernel runs through its
pure-numpy twin in :mod:`megflood.kernels_numpy`.  Both backends consume the
same pre-drawn random numbers, so results are bit-identical across them.
"""
import os

_FALSY = {"", "0", "false", "no", "off"}


def _env_disabled():
    return os.environ.get("MEGFLOOD_DISABLE_NUMBA", "").strip().lower() not in _FALSY


try:
    import numba  # noqa: F401
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not _env_disabled()


def maybe_njit(func):
    """``numba.njit(cache=True)`` when numba is active, identity otherwise.

    Only for loop code with no sensible vectorised form (union-find); the
    numeric kernels have explicit numpy twins instead.
    """
    if USE_NUMBA:
        from numba import njit
        return njit(cache=True)(func)
    return func


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
