"""Numba twins of :mod:`megflood.kernels_numpy` (same names, same outputs)."""
import numpy as np
from numba import njit


@njit(cache=True)
def _move(pos, half_widths, grid_max, u, out):
    R = (half_widths.shape[0] - 1) // 2
    for n in range(pos.shape[0]):
        i = pos[n, 0]
        j = pos[n, 1]
        total = 0
        for r in range(2 * R + 1):
            ii = i + r - R
            if ii < 0 or ii > grid_max:
                continue
            lo = max(-half_widths[r], -j)
            hi = min(half_widths[r], grid_max - j)
            if hi >= lo:
                total += hi - lo + 1
        k = min(np.int64(u[n] * total), total - 1)
        for r in range(2 * R + 1):
            ii = i + r - R
            if ii < 0 or ii > grid_max:
                continue
            lo = max(-half_widths[r], -j)
            hi = min(half_widths[r], grid_max - j)
            if hi < lo:
                continue
            c = hi - lo + 1
            if k < c:
                out[n, 0] = ii
                out[n, 1] = j + lo + k
                break
            k -= c


def move_nodes(pos, half_widths, grid_max, u):
    out = np.empty_like(pos)
    _move(pos, half_widths, np.int64(grid_max), u, out)
    return out


@njit(cache=True)
def _gamma_counts(i, j, half_widths, grid_max, out):
    R = (half_widths.shape[0] - 1) // 2
    for n in range(i.shape[0]):
        total = 0
        for r in range(2 * R + 1):
            ii = i[n] + r - R
            if ii < 0 or ii > grid_max:
                continue
            lo = max(-half_widths[r], -j[n])
            hi = min(half_widths[r], grid_max - j[n])
            if hi >= lo:
                total += hi - lo + 1
        out[n] = total


def gamma_counts(i, j, half_widths, grid_max):
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    shape = np.broadcast(i, j).shape
    i, j = (np.ascontiguousarray(a).ravel() for a in np.broadcast_arrays(i, j))
    out = np.empty(i.shape[0], dtype=np.int64)
    _gamma_counts(i, j, half_widths, np.int64(grid_max), out)
    return out.reshape(shape)


@njit(cache=True)
def _bucket_index(pos, width, nby, nbuckets):
    n = pos.shape[0]
    bid = np.empty(n, dtype=np.int64)
    starts = np.zeros(nbuckets + 1, dtype=np.int64)
    for k in range(n):
        b = (pos[k, 0] // width) * nby + pos[k, 1] // width
        bid[k] = b
        starts[b + 1] += 1
    for b in range(nbuckets):
        starts[b + 1] += starts[b]
    fill = starts[:-1].copy()
    order = np.empty(n, dtype=np.int64)
    for k in range(n):
        b = bid[k]
        order[fill[b]] = k
        fill[b] += 1
    return bid, starts, order


def bucket_index(pos, width, nby, nbuckets):
    return _bucket_index(pos, np.int64(width), np.int64(nby), np.int64(nbuckets))


@njit(cache=True)
def _transmit(pos, informed, bid, nbx, nby, starts, order, rad2, out):
    for u in range(pos.shape[0]):
        out[u] = informed[u]
        if informed[u]:
            continue
        bx = bid[u] // nby
        by = bid[u] % nby
        found = False
        for ax in range(max(bx - 1, 0), min(bx + 1, nbx - 1) + 1):
            for ay in range(max(by - 1, 0), min(by + 1, nby - 1) + 1):
                b = ax * nby + ay
                for p in range(starts[b], starts[b + 1]):
                    v = order[p]
                    if not informed[v]:
                        continue
                    dx = pos[u, 0] - pos[v, 0]
                    dy = pos[u, 1] - pos[v, 1]
                    if dx * dx + dy * dy <= rad2:
                        found = True
                        break
                if found:
                    break
            if found:
                break
        out[u] = found


def transmit_round(pos, informed, bid, nbx, nby, starts, order, rad2):
    out = np.empty_like(informed)
    _transmit(pos, informed, bid, np.int64(nbx), np.int64(nby), starts, order,
              np.float64(rad2), out)
    return out


@njit(cache=True)
def _pairs(pos, bid, nbx, nby, starts, order, rad2, out, write):
    m = 0
    for u in range(pos.shape[0]):
        bx = bid[u] // nby
        by = bid[u] % nby
        for ax in range(max(bx - 1, 0), min(bx + 1, nbx - 1) + 1):
            for ay in range(max(by - 1, 0), min(by + 1, nby - 1) + 1):
                b = ax * nby + ay
                for p in range(starts[b], starts[b + 1]):
                    v = order[p]
                    if v <= u:
                        continue
                    dx = pos[u, 0] - pos[v, 0]
                    dy = pos[u, 1] - pos[v, 1]
                    if dx * dx + dy * dy <= rad2:
                        if write:
                            out[m, 0] = u
                            out[m, 1] = v
                        m += 1
    return m


def neighbor_pairs(pos, bid, nbx, nby, starts, order, rad2):
    args = (pos, bid, np.int64(nbx), np.int64(nby), starts, order, np.float64(rad2))
    m = _pairs(*args, np.empty((0, 2), dtype=np.int64), False)
    out = np.empty((m, 2), dtype=np.int64)
    _pairs(*args, out, True)
    return out[np.lexsort((out[:, 1], out[:, 0]))]
