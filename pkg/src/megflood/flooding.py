"""Flooding on the mobile grid network plus the supercell instrumentation.

A step is a move action followed by one transmission round.  The square is
cut into ``k_s x k_s`` supercells, each into ``k_c x k_c`` cells; per-step
counts over this partition show when the bootstrap and spreading phases end.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import CellIndex, build_cell_index, connected_components
from .mobility import NodeState, WorldConfig, move_offsets, sample_stationary, step_move

SQRT2 = math.sqrt(2.0)
# relative slack on the interval tests so that exact ties like L == rho/(2*sqrt2)
# are not lost to rounding in rho**2
_REL_TOL = 1e-12

DEFAULT_GAMMA = 0.01
DEFAULT_ETA = 0.005

TRACE_COLUMNS = ("t", "informed", "y_max", "quasi_cells", "density_ok", "largest_comp_frac")


class DegenerateGeometry(ValueError):
    """No supercell/cell partition satisfies the side-length intervals."""


def supercell_partition(side: float, rho: float, r: float) -> tuple[int, int]:
    """Supercells per side and cells per supercell side.

    ``k_s`` is the smallest count with ``side/k_s <= rho/(2 sqrt 2)`` and
    ``k_c`` the smallest with ``L/k_c <= r/sqrt 2``; both resulting lengths
    must also clear their lower bounds ``rho/(3 sqrt 2)`` and ``r/(1+sqrt 2)``.
    """
    if not rho > 0:
        raise DegenerateGeometry("rho must be positive to build supercells")
    # side/k <= rho/(2 sqrt2)  <=>  8 side^2 <= rho^2 k^2
    k_s = max(1, math.floor(side * 2 * SQRT2 / rho) - 1)
    while 8 * side * side > rho * rho * k_s * k_s * (1 + _REL_TOL):
        k_s += 1
    L = side / k_s
    if 18 * L * L < rho * rho * (1 - _REL_TOL):
        raise DegenerateGeometry(
            f"supercell side {L:.4g} below rho/(3 sqrt 2) = {rho / (3 * SQRT2):.4g}")
    k_c = max(1, math.floor(L * SQRT2 / r) - 1)
    while 2 * L * L > r * r * k_c * k_c * (1 + _REL_TOL):
        k_c += 1
    ell = L / k_c
    if ell * (1 + SQRT2) < r * (1 - _REL_TOL):
        raise DegenerateGeometry(
            f"cell side {ell:.4g} below r/(1+sqrt 2) = {r / (1 + SQRT2):.4g}")
    return k_s, k_c


@dataclass(frozen=True)
class AnalysisConfig:
    side: float
    rho: float
    epsilon: float
    k_s: int
    k_c: int
    gamma: float = DEFAULT_GAMMA
    eta: float = DEFAULT_ETA

    @property
    def L(self) -> float:
        return self.side / self.k_s

    @property
    def ell(self) -> float:
        return self.L / self.k_c

    @property
    def quasi_threshold(self) -> float:
        return self.gamma * self.rho ** 2

    @property
    def density_threshold(self) -> float:
        return self.eta * self.rho ** 2

    def supercell_of(self, positions) -> np.ndarray:
        """Flat supercell id of every position."""
        cx, cy = self._cell_xy(positions)
        return (cx // self.k_c) * self.k_s + cy // self.k_c

    def cell_of(self, positions) -> np.ndarray:
        """Flat global cell id of every position."""
        cx, cy = self._cell_xy(positions)
        return cx * (self.k_s * self.k_c) + cy

    def _cell_xy(self, positions):
        per_side = self.k_s * self.k_c
        scale = self.epsilon * per_side / self.side
        c = np.floor(np.asarray(positions) * scale).astype(np.int64)
        np.minimum(c, per_side - 1, out=c)
        return c[:, 0], c[:, 1]


def build_analysis_grid(world: WorldConfig, gamma: float = DEFAULT_GAMMA,
                        eta: float = DEFAULT_ETA) -> AnalysisConfig:
    if not (0 <= gamma < 1 and 0 <= eta < 1):
        raise ValueError("gamma and eta must lie in [0, 1)")
    k_s, k_c = supercell_partition(world.side, world.rho, world.r)
    return AnalysisConfig(world.side, world.rho, world.epsilon, k_s, k_c, gamma, eta)


@dataclass
class SupercellStats:
    informed: np.ndarray   # m_t(S), shape (k_s, k_s)
    totals: np.ndarray     # nodes per supercell
    infected: np.ndarray   # cells holding >= 1 informed node, per supercell
    threshold: float

    @property
    def y_max(self) -> int:
        return int(self.informed.max())

    @property
    def quasi_informed(self) -> int:
        return int((self.informed >= self.threshold).sum())


def supercell_stats(state: NodeState, analysis: AnalysisConfig,
                    world: WorldConfig | None = None) -> SupercellStats:
    k = analysis.k_s
    sc = analysis.supercell_of(state.positions)
    totals = np.bincount(sc, minlength=k * k)
    informed = np.bincount(sc[state.informed], minlength=k * k)
    cells = np.unique(analysis.cell_of(state.positions[state.informed]))
    per_side = k * analysis.k_c
    cell_sc = ((cells // per_side) // analysis.k_c) * k + (cells % per_side) // analysis.k_c
    infected = np.bincount(cell_sc, minlength=k * k)
    return SupercellStats(informed.reshape(k, k), totals.reshape(k, k),
                          infected.reshape(k, k), analysis.quasi_threshold)


def density_check(state: NodeState, analysis: AnalysisConfig,
                  world: WorldConfig | None = None) -> bool:
    """True iff every supercell holds at least ``eta * rho^2`` nodes."""
    k = analysis.k_s
    totals = np.bincount(analysis.supercell_of(state.positions), minlength=k * k)
    return bool(totals.min() >= analysis.density_threshold)


def supercell_neighborhood(s: tuple[int, int], k_s: int) -> list[tuple[int, int]]:
    """``N(S)``: the supercell and its up to eight edge- or corner-adjacent ones."""
    a, b = s
    return [(x, y) for x in range(max(a - 1, 0), min(a + 1, k_s - 1) + 1)
            for y in range(max(b - 1, 0), min(b + 1, k_s - 1) + 1)]


def transmit(state: NodeState, world: WorldConfig, index: CellIndex | None = None) -> np.ndarray:
    """Informed mask after one transmission round at the current positions.

    Strictly one hop: nodes informed in this round do not relay until the
    next step.
    """
    if index is None:
        index = build_cell_index(state.positions, world.r, world)
    assert index.is_fresh(state.positions), "cell index is stale"
    return kernels.transmit_round(state.positions, state.informed, index.bucket_id,
                                  index.nbx, index.nby, index.starts, index.order,
                                  world.r2_index)


def default_max_steps(world: WorldConfig) -> int:
    rho = max(world.rho, world.epsilon)
    return math.ceil(50 * (world.side / rho + math.log2(world.n)))


@dataclass
class StepRecord:
    t: int
    informed: int
    y_max: int | None = None
    quasi_cells: int | None = None
    density_ok: bool | None = None
    largest_comp_frac: float | None = None


@dataclass
class FloodTrace:
    n: int
    source: int
    source_position: tuple
    d0: float                  # initial distance from the source to the farthest node
    max_steps: int
    records: list = field(default_factory=list)
    bootstrap_end: int | None = None
    spreading_end: int | None = None
    flooding_time: int | None = None

    @property
    def timed_out(self) -> bool:
        return self.flooding_time is None

    @property
    def density_violations(self) -> int:
        return sum(1 for rec in self.records if rec.density_ok is False)

    def informed_counts(self) -> list[int]:
        return [rec.informed for rec in self.records]

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for rec in self.records:
            w.writerow([rec.t, rec.informed, _blank(rec.y_max), _blank(rec.quasi_cells),
                        "" if rec.density_ok is None else int(rec.density_ok),
                        "" if rec.largest_comp_frac is None else repr(rec.largest_comp_frac)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _blank(v):
    return "" if v is None else v


def flood(world: WorldConfig, analysis: AnalysisConfig | None, rng: np.random.Generator,
          source: int | None = None, max_steps: int | None = None, positions=None,
          component_every: int | None = None, observer=None) -> FloodTrace:
    """Run one flooding process until everyone is informed or ``max_steps``.

    Initial positions come from the stationary law (drawn first from ``rng``)
    unless ``positions`` is given; ``source=None`` then picks a uniform node id.
    ``observer(t, prev_positions, prev_informed, state)`` is called after
    every step, for external invariant checks.
    """
    offs = move_offsets(world.rho, world.epsilon)
    max_steps = default_max_steps(world) if max_steps is None else max_steps
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if positions is None:
        positions = sample_stationary(world, offs, rng)
    if source is None:
        source = int(rng.integers(world.n))
    if not 0 <= source < world.n:
        raise ValueError(f"source {source} out of range")
    informed = np.zeros(world.n, dtype=np.bool_)
    informed[source] = True
    state = NodeState(positions, informed, 0)

    src_pos = state.positions[source]
    d = (state.positions - src_pos).astype(np.float64)
    d0 = float(np.sqrt((d * d).sum(axis=1).max())) * world.epsilon
    trace = FloodTrace(world.n, source, (int(src_pos[0]), int(src_pos[1])), d0, max_steps)

    _record(trace, state, world, analysis, component_every)
    if state.informed.all():
        trace.flooding_time = 0
        return trace
    for t in range(1, max_steps + 1):
        prev_pos, prev_informed = state.positions, state.informed
        state = step_move(state, world, offs, rng)
        index = build_cell_index(state.positions, world.r, world)
        state = NodeState(state.positions, transmit(state, world, index), t)
        if observer is not None:
            observer(t, prev_pos, prev_informed, state)
        _record(trace, state, world, analysis, component_every)
        if state.informed.all():
            trace.flooding_time = t
            break
    return trace


def _record(trace, state, world, analysis, component_every):
    rec = StepRecord(state.t, state.informed_count)
    if analysis is not None:
        stats = supercell_stats(state, analysis, world)
        rec.y_max = stats.y_max
        rec.quasi_cells = stats.quasi_informed
        rec.density_ok = bool(stats.totals.min() >= analysis.density_threshold)
        thr = analysis.quasi_threshold
        if trace.bootstrap_end is None and stats.y_max >= thr:
            trace.bootstrap_end = state.t
        if trace.spreading_end is None and stats.informed.min() >= thr:
            trace.spreading_end = state.t
    if component_every and state.t % component_every == 0:
        rec.largest_comp_frac = connected_components(state.positions, world.r,
                                                     world).largest_fraction
    trace.records.append(rec)
