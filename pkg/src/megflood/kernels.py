"""Kernel dispatch: re-exports the active backend's kernels."""
from ._accel import USE_NUMBA

if USE_NUMBA:
    from .kernels_numba import (bucket_index, gamma_counts, move_nodes,
                                neighbor_pairs, transmit_round)
else:
    from .kernels_numpy import (bucket_index, gamma_counts, move_nodes,  # noqa: F401
                                neighbor_pairs, transmit_round)

__all__ = ["bucket_index", "gamma_counts", "move_nodes", "neighbor_pairs",
           "transmit_round"]
