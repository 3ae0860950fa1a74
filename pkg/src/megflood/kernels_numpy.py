"""Pure-numpy kernels.

Each function here has a twin of the same name and signature in
:mod:`megflood.kernels_numba`.  Positions are integer grid indices of shape
``(n, 2)``; radii are passed squared and in index units so every distance
test is an exact integer left-hand side against a float bound.
"""
import numpy as np

# cap on the number of candidate pairs materialised at once
_PAIR_CHUNK = 1 << 22


def move_nodes(pos, half_widths, grid_max, u):
    """One random move of every node, uniform over its clipped neighbourhood.

    ``half_widths[k]`` is the largest ``dj`` allowed in row ``di = k - R``.
    ``u`` holds one uniform draw in [0, 1) per node; the draw selects the
    ``floor(u * |Gamma|)``-th reachable point in row-major offset order.
    """
    n = pos.shape[0]
    if n == 0:
        return pos.copy()
    R = (half_widths.shape[0] - 1) // 2
    i = pos[:, 0]
    j = pos[:, 1]
    di = np.arange(-R, R + 1, dtype=np.int64)
    ii = i[:, None] + di[None, :]
    row_ok = (ii >= 0) & (ii <= grid_max)
    lo = np.maximum(-half_widths[None, :], -j[:, None])
    hi = np.minimum(half_widths[None, :], grid_max - j[:, None])
    cnt = np.where(row_ok, np.maximum(hi - lo + 1, 0), 0)
    cum = np.cumsum(cnt, axis=1)
    total = cum[:, -1]
    k = np.minimum((u * total).astype(np.int64), total - 1)
    row = (cum <= k[:, None]).sum(axis=1)
    idx = np.arange(n)
    before = cum[idx, row] - cnt[idx, row]
    out = np.empty_like(pos)
    out[:, 0] = i + row - R
    out[:, 1] = j + lo[idx, row] + (k - before)
    return out


def gamma_counts(i, j, half_widths, grid_max):
    """|Gamma(x)| for arrays of grid indices ``i``, ``j``."""
    R = (half_widths.shape[0] - 1) // 2
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    di = np.arange(-R, R + 1, dtype=np.int64)
    ii = i[..., None] + di
    row_ok = (ii >= 0) & (ii <= grid_max)
    lo = np.maximum(-half_widths, -j[..., None])
    hi = np.minimum(half_widths, grid_max - j[..., None])
    return np.where(row_ok, np.maximum(hi - lo + 1, 0), 0).sum(axis=-1)


def bucket_index(pos, width, nby, nbuckets):
    """Counting-sort nodes into square buckets of ``width`` grid steps.

    Returns ``(bucket_id, starts, order)``; ``order[starts[b]:starts[b+1]]``
    lists the nodes of bucket ``b`` in increasing id.
    """
    bid = (pos[:, 0] // width) * nby + pos[:, 1] // width
    counts = np.bincount(bid, minlength=nbuckets)
    starts = np.zeros(nbuckets + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    order = np.argsort(bid, kind="stable").astype(np.int64)
    return bid.astype(np.int64), starts, order


def _expand(sources, src_bucket, starts, order):
    """All (source, member) pairs for members of ``src_bucket[k]``."""
    s = starts[src_bucket]
    lengths = starts[src_bucket + 1] - s
    total = int(lengths.sum())
    if total == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    rep_src = np.repeat(sources, lengths)
    first = np.repeat(s - (np.cumsum(lengths) - lengths), lengths)
    members = order[first + np.arange(total)]
    return rep_src, members


def _stencil_pairs(sources, pos, bid, nbx, nby, starts, order, rad2):
    """Yield (source, other) pairs within radius, scanning the 9-bucket stencil."""
    widest = int(np.diff(starts).max(initial=0))
    step = max(1, _PAIR_CHUNK // (9 * widest + 1))
    for c0 in range(0, len(sources), step):
        src = sources[c0:c0 + step]
        bx = bid[src] // nby
        by = bid[src] % nby
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                nx = bx + dx
                ny = by + dy
                ok = (nx >= 0) & (nx < nbx) & (ny >= 0) & (ny < nby)
                if not ok.any():
                    continue
                a, b = _expand(src[ok], nx[ok] * nby + ny[ok], starts, order)
                if len(a) == 0:
                    continue
                d = pos[a] - pos[b]
                hit = (d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]) <= rad2
                yield a[hit], b[hit]


def transmit_round(pos, informed, bid, nbx, nby, starts, order, rad2):
    """One transmission round: every node within radius of an informed node."""
    out = informed.copy()
    targets = np.flatnonzero(~informed)
    if len(targets) == 0 or not informed.any():
        return out
    # bucket only the informed nodes so the stencil scan touches senders only
    senders = np.flatnonzero(informed)
    s_bid = bid[senders]
    srt = np.argsort(s_bid, kind="stable")
    s_order = senders[srt]
    s_starts = np.zeros(len(starts), dtype=np.int64)
    np.cumsum(np.bincount(s_bid, minlength=len(starts) - 1), out=s_starts[1:])
    for a, _ in _stencil_pairs(targets, pos, bid, nbx, nby, s_starts, s_order, rad2):
        out[a] = True
    return out


def neighbor_pairs(pos, bid, nbx, nby, starts, order, rad2):
    """All unordered pairs ``(i, j)``, ``i < j``, within radius; shape ``(m, 2)``."""
    n = pos.shape[0]
    chunks = []
    for a, b in _stencil_pairs(np.arange(n, dtype=np.int64), pos, bid, nbx, nby,
                               starts, order, rad2):
        keep = a < b
        chunks.append(np.stack([a[keep], b[keep]], axis=1))
    if not chunks:
        return np.empty((0, 2), dtype=np.int64)
    pairs = np.concatenate(chunks)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
