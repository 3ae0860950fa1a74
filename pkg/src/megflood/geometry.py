"""Fixed-radius neighbour queries and snapshot connectivity.

Nodes are bucketed on a square grid whose buckets are ``width`` grid steps
wide, with ``width * eps >= r`` so that every radius-``r`` neighbour of a node
sits in its own bucket or one of the eight around it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._accel import maybe_njit
from .mobility import WorldConfig


@dataclass
class CellIndex:
    width: int          # bucket side in grid steps
    nbx: int
    nby: int
    bucket_id: np.ndarray
    starts: np.ndarray
    order: np.ndarray
    positions: np.ndarray  # snapshot the index was built from
    epsilon: float = 1.0

    @property
    def bucket_side(self) -> float:
        return self.width * self.epsilon

    def members(self, b: int) -> np.ndarray:
        return self.order[self.starts[b]:self.starts[b + 1]]

    @property
    def buckets(self) -> dict[tuple[int, int], list[int]]:
        """Non-empty buckets as ``{(bx, by): [node ids]}``."""
        out = {}
        for b in np.flatnonzero(np.diff(self.starts)):
            out[(int(b) // self.nby, int(b) % self.nby)] = self.members(b).tolist()
        return out

    def is_fresh(self, positions) -> bool:
        return positions is self.positions or np.array_equal(positions, self.positions)


def bucket_width(r: float, epsilon: float) -> int:
    return max(1, math.ceil(r / epsilon))


def build_cell_index(positions, r: float, world: WorldConfig) -> CellIndex:
    pos = np.ascontiguousarray(positions, dtype=np.int64)
    w = bucket_width(r, world.epsilon)
    nb = world.grid_max // w + 1
    bid, starts, order = kernels.bucket_index(pos, w, nb, nb * nb)
    return CellIndex(w, nb, nb, bid, starts, order, pos, world.epsilon)


def neighbors_within(index: CellIndex, node: int, r: float) -> list[int]:
    """Ids ``j != node`` within distance ``r`` of ``node``, in bucket-scan order."""
    assert r <= index.bucket_side * (1 + 1e-12), "buckets narrower than the query radius"
    pos = index.positions
    rad2 = (r / index.epsilon) ** 2
    b = int(index.bucket_id[node])
    bx, by = divmod(b, index.nby)
    out = []
    for ax in range(max(bx - 1, 0), min(bx + 1, index.nbx - 1) + 1):
        for ay in range(max(by - 1, 0), min(by + 1, index.nby - 1) + 1):
            cand = index.members(ax * index.nby + ay)
            d = pos[cand] - pos[node]
            hit = cand[(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] <= rad2) & (cand != node)]
            out.extend(hit.tolist())
    return out


def neighbor_pairs(index: CellIndex, r: float) -> np.ndarray:
    """Sorted ``(m, 2)`` array of all pairs ``i < j`` within ``r``."""
    assert r <= index.bucket_side * (1 + 1e-12), "buckets narrower than the query radius"
    return kernels.neighbor_pairs(index.positions, index.bucket_id, index.nbx,
                                  index.nby, index.starts, index.order,
                                  (r / index.epsilon) ** 2)


@maybe_njit
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@maybe_njit
def union_find_labels(n, pairs):
    """Root label of every node after merging all ``pairs`` (union by size)."""
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for k in range(pairs.shape[0]):
        a = _find(parent, pairs[k, 0])
        b = _find(parent, pairs[k, 1])
        if a == b:
            continue
        if size[a] < size[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
    for x in range(n):
        parent[x] = _find(parent, x)
    return parent


@dataclass(frozen=True)
class ComponentReport:
    sizes: tuple        # descending
    largest_fraction: float
    count: int


def component_labels(positions, r: float, world: WorldConfig) -> np.ndarray:
    index = build_cell_index(positions, r, world)
    pairs = neighbor_pairs(index, r)
    return union_find_labels(len(index.order), pairs)


def connected_components(positions, r: float, world: WorldConfig) -> ComponentReport:
    labels = component_labels(positions, r, world)
    n = len(labels)
    sizes = np.bincount(labels, minlength=n)
    sizes = np.sort(sizes[sizes > 0])[::-1]
    return ComponentReport(tuple(int(s) for s in sizes), float(sizes[0]) / n, len(sizes))
