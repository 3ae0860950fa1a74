"""Flooding on geometric Markovian evolving graphs.

Nodes random-walk on a finite grid, talk within radius ``r`` and relay a
single message every step.  See :mod:`megflood.flooding` for the engine and
:mod:`megflood.lemmas` for the stand-alone verifiers.
"""
from ._accel import backend_name
from .experiments import (RhoRule, SweepPoint, SweepSpec, TrialResult, fit_scaling,
                          run_sweep, run_trial, trial_seed)
from .flooding import (AnalysisConfig, DegenerateGeometry, FloodTrace, build_analysis_grid,
                       density_check, flood, supercell_stats, transmit)
from .geometry import (CellIndex, ComponentReport, build_cell_index, connected_components,
                       neighbors_within)
from .mobility import (NodeState, OffsetSet, WorldConfig, gamma_size, move_offsets,
                       sample_stationary, step_move, transition_matrix)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "CellIndex", "ComponentReport", "DegenerateGeometry", "FloodTrace",
    "NodeState", "OffsetSet", "RhoRule", "SweepPoint", "SweepSpec", "TrialResult",
    "WorldConfig", "backend_name", "build_analysis_grid", "build_cell_index",
    "connected_components", "density_check", "fit_scaling", "flood", "gamma_size",
    "move_offsets", "neighbors_within", "run_sweep", "run_trial", "sample_stationary",
    "step_move", "supercell_stats", "transition_matrix", "transmit", "trial_seed",
]
