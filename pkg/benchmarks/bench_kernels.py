"""Compare the numpy and numba kernel backends.

Kernel timings call both modules directly; whole-flood timings run in
subprocesses because the backend is fixed at import time.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import math
import os
import subprocess
import sys
import timeit

import numpy as np

from megflood import WorldConfig, build_cell_index, move_offsets, sample_stationary
from megflood import kernels_numba, kernels_numpy

FLOOD_SNIPPET = """
import math, time, numpy as np
from megflood import WorldConfig, build_analysis_grid, flood
w = WorldConfig({n}, 4 * math.sqrt(math.log({n})), 2.0)
an = build_analysis_grid(w)
flood(w, an, np.random.default_rng(0))          # compile / warm caches
t0 = time.perf_counter()
for s in range({reps}):
    flood(w, an, np.random.default_rng(s))
print((time.perf_counter() - t0) / {reps})
"""


def bench_kernels(n, repeat):
    world = WorldConfig(n, 4 * math.sqrt(math.log(n)), 2.0)
    offs = move_offsets(world.rho, world.epsilon)
    rng = np.random.default_rng(1)
    pos = sample_stationary(world, offs, rng)
    u = rng.random(n)
    hw = np.array(offs.half_widths, dtype=np.int64)
    idx = build_cell_index(pos, world.r, world)
    informed = rng.random(n) < 0.3
    rad2 = world.r2_index
    rows = []
    for name, mod in (("numpy", kernels_numpy), ("numba", kernels_numba)):
        mod.move_nodes(pos, hw, world.grid_max, u)
        mod.transmit_round(pos, informed, idx.bucket_id, idx.nbx, idx.nby, idx.starts,
                           idx.order, rad2)
        t_move = min(timeit.repeat(lambda: mod.move_nodes(pos, hw, world.grid_max, u),
                                   number=5, repeat=repeat)) / 5
        t_tx = min(timeit.repeat(
            lambda: mod.transmit_round(pos, informed, idx.bucket_id, idx.nbx, idx.nby,
                                       idx.starts, idx.order, rad2),
            number=5, repeat=repeat)) / 5
        rows.append((name, t_move, t_tx))
    return rows


def bench_flood(n, reps):
    out = {}
    for name, flag in (("numpy", "1"), ("numba", "0")):
        env = dict(os.environ, MEGFLOOD_DISABLE_NUMBA=flag)
        proc = subprocess.run([sys.executable, "-c", FLOOD_SNIPPET.format(n=n, reps=reps)],
                              capture_output=True, text=True, env=env, check=True)
        out[name] = float(proc.stdout.strip())
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[4096, 16384])
    args = ap.parse_args()
    print(f"{'n':>6} {'backend':>7} {'move ms':>9} {'transmit ms':>12} {'flood ms':>9}")
    for n in args.sizes:
        floods = bench_flood(n, args.repeat)
        for name, t_move, t_tx in bench_kernels(n, args.repeat):
            print(f"{n:>6} {name:>7} {1e3 * t_move:9.3f} {1e3 * t_tx:12.3f} "
                  f"{1e3 * floods[name]:9.1f}")


if __name__ == "__main__":
    main()
