"""Grid, move graph and the random-walk mobility of all nodes.

Nodes live on the points ``(i*eps, j*eps)`` with ``0 <= i, j <= grid_max``.
In one step a node jumps uniformly to any grid point within distance ``rho``
(its closed neighbourhood ``Gamma(x)``, clipped at the walls).  The chain is
reversible with stationary law proportional to ``|Gamma(x)|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels

# slack used only when turning side/eps into an integer grid extent
_GRID_SLACK = 1e-9
MAX_MATRIX_POINTS = 10_000


@dataclass(frozen=True)
class WorldConfig:
    n: int
    rho: float
    r: float
    epsilon: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not self.rho >= 0:
            raise ValueError("rho must be >= 0")
        if not self.r > 0:
            raise ValueError("r must be > 0")
        if self.rho > self.side:
            raise ValueError(f"rho={self.rho} exceeds the square side {self.side}")

    @property
    def side(self) -> float:
        return math.sqrt(self.n)

    @property
    def grid_max(self) -> int:
        """Largest grid index along either axis."""
        return int(math.floor(self.side / self.epsilon + _GRID_SLACK))

    @property
    def grid_points(self) -> int:
        return (self.grid_max + 1) ** 2

    @property
    def r2_index(self) -> float:
        """Squared transmission radius in grid-index units."""
        return (self.r / self.epsilon) ** 2


@dataclass(frozen=True)
class OffsetSet:
    """Interior move neighbourhood: ``(di, dj)`` with ``di^2 + dj^2 <= (rho/eps)^2``.

    Stored row-wise: ``half_widths[k]`` is the largest ``|dj|`` admissible in
    row ``di = k - radius``.
    """
    radius: int
    half_widths: tuple

    @property
    def widths(self) -> np.ndarray:
        return np.asarray(self.half_widths, dtype=np.int64)

    @property
    def offsets(self) -> list[tuple[int, int]]:
        R = self.radius
        return [(di, dj) for di, h in zip(range(-R, R + 1), self.half_widths)
                for dj in range(-h, h + 1)]

    def __len__(self):
        return sum(2 * h + 1 for h in self.half_widths)


def move_offsets(rho: float, epsilon: float = 1.0) -> OffsetSet:
    if rho < 0 or not epsilon > 0:
        raise ValueError("need rho >= 0 and epsilon > 0")
    # integer lhs <= real rhs  <=>  lhs <= floor(rhs)
    bound = math.floor((rho / epsilon) ** 2)
    R = math.isqrt(bound)
    return OffsetSet(R, tuple(math.isqrt(bound - di * di) for di in range(-R, R + 1)))


def gamma_size(pos, world: WorldConfig, offs: OffsetSet) -> int:
    i, j = pos
    if not (0 <= i <= world.grid_max and 0 <= j <= world.grid_max):
        raise ValueError(f"position {pos} outside the grid")
    return int(kernels.gamma_counts(np.array([i]), np.array([j]), offs.widths,
                                    world.grid_max)[0])


@lru_cache(maxsize=32)
def _gamma_grid(grid_max: int, half_widths: tuple) -> np.ndarray:
    # |Gamma(i, j)| = sum over rows di of [0 <= i+di <= G] * |[j-h, j+h] & [0, G]|,
    # i.e. a (G+1, 2R+1) @ (2R+1, G+1) product of small integer matrices
    R = (len(half_widths) - 1) // 2
    h = np.asarray(half_widths, dtype=np.int64)
    ax = np.arange(grid_max + 1, dtype=np.int64)
    rows = ax[:, None] + np.arange(-R, R + 1)[None, :]
    valid = ((rows >= 0) & (rows <= grid_max)).astype(np.float64)
    span = (np.minimum(ax[None, :] + h[:, None], grid_max)
            - np.maximum(ax[None, :] - h[:, None], 0) + 1).astype(np.float64)
    g = np.rint(valid @ span).astype(np.int64)
    g.setflags(write=False)
    return g


def gamma_grid(world: WorldConfig, offs: OffsetSet) -> np.ndarray:
    """``|Gamma(x)|`` for every grid point, indexed ``[i, j]`` (read-only)."""
    return _gamma_grid(world.grid_max, offs.half_widths)


@lru_cache(maxsize=32)
def _cumulative_weights(grid_max: int, half_widths: tuple) -> np.ndarray:
    cum = np.cumsum(_gamma_grid(grid_max, half_widths).ravel())
    cum.setflags(write=False)
    return cum


def stationary_distribution(world: WorldConfig, offs: OffsetSet) -> np.ndarray:
    g = gamma_grid(world, offs).astype(np.float64)
    return g / g.sum()


def sample_stationary(world: WorldConfig, offs: OffsetSet, rng: np.random.Generator,
                      size: int | None = None) -> np.ndarray:
    """Draw ``size`` (default ``n``) independent positions from the stationary law."""
    size = world.n if size is None else size
    cum = _cumulative_weights(world.grid_max, offs.half_widths)
    total = int(cum[-1])
    k = np.minimum((rng.random(size) * total).astype(np.int64), total - 1)
    flat = np.searchsorted(cum, k, side="right")
    side = world.grid_max + 1
    return np.stack([flat // side, flat % side], axis=1).astype(np.int64)


@dataclass
class NodeState:
    positions: np.ndarray
    informed: np.ndarray
    t: int = 0
    n: int = field(init=False)

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.int64)
        self.informed = np.ascontiguousarray(self.informed, dtype=np.bool_)
        self.n = self.positions.shape[0]
        if self.informed.shape != (self.n,):
            raise ValueError("informed mask must have one entry per node")

    @property
    def informed_count(self) -> int:
        return int(self.informed.sum())


def step_move(state: NodeState, world: WorldConfig, offs: OffsetSet,
              rng: np.random.Generator) -> NodeState:
    """Move action: every node jumps uniformly within its clipped ``Gamma``.

    The informed set and ``t`` are left alone; the step is completed by the
    transmission action.
    """
    u = rng.random(state.n)
    new = kernels.move_nodes(state.positions, offs.widths, world.grid_max, u)
    return NodeState(new, state.informed, state.t)


def transition_matrix(world: WorldConfig, offs: OffsetSet) -> np.ndarray:
    """Dense one-node transition matrix; states are grid points in row-major order."""
    side = world.grid_max + 1
    N = side * side
    if N > MAX_MATRIX_POINTS:
        raise ValueError(f"grid has {N} points; transition_matrix is limited to "
                         f"{MAX_MATRIX_POINTS}")
    P = np.zeros((N, N))
    g = gamma_grid(world, offs).ravel()
    d = np.array(offs.offsets, dtype=np.int64)
    for x in range(N):
        i, j = divmod(x, side)
        ti = i + d[:, 0]
        tj = j + d[:, 1]
        ok = (ti >= 0) & (ti < side) & (tj >= 0) & (tj < side)
        P[x, ti[ok] * side + tj[ok]] = 1.0 / g[x]
    return P
