"""``megflood`` command line.

Exit codes: 0 success, 1 lemma violation, 2 bad flags or config, 3 flood timeout.
The seed defaults to ``$MEGFLOOD_SEED`` and then to 0.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import lemmas
from ._accel import backend_name
from .experiments import (RhoRule, SweepConfigError, load_sweep_spec, max_steps_for,
                          run_sweep)
from .flooding import (DEFAULT_ETA, DEFAULT_GAMMA, DegenerateGeometry,
                       build_analysis_grid, flood)
from .geometry import connected_components
from .mobility import WorldConfig, move_offsets, sample_stationary

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_TIMEOUT = 0, 1, 2, 3

log = logging.getLogger("megflood")


def _default_seed():
    raw = os.environ.get("MEGFLOOD_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"MEGFLOOD_SEED must be an integer, got {raw!r}")


def _fmt(v):
    return "NA" if v is None else str(v)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def cmd_flood(args) -> int:
    if (args.rho is None) == (args.rho_rule is None):
        args.parser.error("give exactly one of --rho and --rho-rule")
    rho = args.rho if args.rho is not None else RhoRule.parse(args.rho_rule)(args.n)
    world = WorldConfig(args.n, rho, args.r, args.epsilon)
    try:
        analysis = build_analysis_grid(world, args.gamma, args.eta)
    except DegenerateGeometry as exc:
        log.warning("instrumentation disabled: %s", exc)
        analysis = None
    max_steps = args.max_steps or max_steps_for(world.n, world.rho, 50.0, world.epsilon)
    trace = flood(world, analysis, np.random.default_rng(args.seed), source=args.source,
                  max_steps=max_steps, component_every=args.components_every)
    fh, close = _open_out(args.out)
    try:
        trace.write_csv(fh)
    finally:
        if close:
            fh.close()
    summary = (f"flood_time={_fmt(trace.flooding_time)} bootstrap={_fmt(trace.bootstrap_end)} "
               f"spread={_fmt(trace.spreading_end)}")
    print(summary, file=sys.stderr if fh is sys.stdout else sys.stdout)
    return EXIT_TIMEOUT if trace.timed_out else EXIT_OK


def cmd_verify(args) -> int:
    reports = []
    which = args.lemma
    if which in ("boundary", "all"):
        reports.append(lemmas.verify_boundary_lemma(min(args.m, 4), args.samples, args.seed,
                                                    m_sampled=args.m if args.m > 4 else 16))
    if which in ("spreading", "all"):
        reports.append(lemmas.verify_spreading_lemma(args.kmax))
    if which in ("almost-increasing", "all"):
        reports.append(lemmas.verify_almost_increasing(trials=args.trials, seed=args.seed))
    for rep in reports:
        print(rep.to_json() if args.json else rep)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VIOLATION


def cmd_sweep(args) -> int:
    try:
        spec = load_sweep_spec(args.config)
    except SweepConfigError as exc:
        print(f"megflood sweep: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.seed is not None:
        spec.seed = args.seed
    fh, close = _open_out(args.out)
    try:
        results = run_sweep(spec, fh, jobs=args.jobs)
    finally:
        if close:
            fh.close()
    timeouts = sum(r.timeout for r in results)
    print(f"trials={len(results)} timeouts={timeouts}", file=sys.stderr)
    return EXIT_OK


def cmd_snapshot_stats(args) -> int:
    world = WorldConfig(args.n, args.rho, args.r, args.epsilon)
    offs = move_offsets(world.rho, world.epsilon)
    rng = np.random.default_rng(args.seed)
    fh, close = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample", "n", "rho", "r", "components", "largest", "max_comp_frac"])
        for k in range(args.samples):
            rep = connected_components(sample_stationary(world, offs, rng), world.r, world)
            w.writerow([k, world.n, repr(world.rho), repr(world.r), rep.count,
                        rep.sizes[0], repr(rep.largest_fraction)])
            fh.flush()
    finally:
        if close:
            fh.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="megflood", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("flood", help="run one flooding trial and write its trace CSV")
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--rho", type=float)
    f.add_argument("--rho-rule", help="number, 'c*sqrt(log n)' or 'c*sqrt(n)'")
    f.add_argument("--r", type=float, required=True)
    f.add_argument("--epsilon", type=float, default=1.0)
    f.add_argument("--seed", type=int, default=None)
    f.add_argument("--source", type=int, default=None, help="source id (default: random)")
    f.add_argument("--max-steps", type=int, default=None)
    f.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    f.add_argument("--eta", type=float, default=DEFAULT_ETA)
    f.add_argument("--components-every", type=int, default=None)
    f.add_argument("--out", help="trace CSV path (default stdout)")
    f.set_defaults(func=cmd_flood, parser=f)

    v = sub.add_parser("verify", help="check the combinatorial/probabilistic lemmas")
    v.add_argument("--lemma", required=True,
                   choices=["boundary", "spreading", "almost-increasing", "all"])
    v.add_argument("--m", type=int, default=4, help="grid side (exhaustive up to 4)")
    v.add_argument("--samples", type=int, default=0, help="random subsets for --m > 4")
    v.add_argument("--kmax", type=int, default=10_000)
    v.add_argument("--trials", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="run a parameter sweep from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="CSV path (default stdout)")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--seed", type=int, default=None, help="override the config's seed")
    s.set_defaults(func=cmd_sweep)

    ss = sub.add_parser("snapshot-stats", help="component sizes of stationary snapshots")
    ss.add_argument("--n", type=int, required=True)
    ss.add_argument("--r", type=float, required=True)
    ss.add_argument("--rho", type=float, default=0.0)
    ss.add_argument("--epsilon", type=float, default=1.0)
    ss.add_argument("--samples", type=int, default=10)
    ss.add_argument("--seed", type=int, default=None)
    ss.add_argument("--out")
    ss.set_defaults(func=cmd_snapshot_stats)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    log.debug("kernel backend: %s", backend_name())
    if args.command != "sweep" and args.seed is None:
        args.seed = _default_seed()
    if args.command == "verify" and args.samples and args.m <= 4:
        parser.error("--samples needs --m > 4")
    if args.command == "sweep" and args.seed is None and "MEGFLOOD_SEED" in os.environ:
        args.seed = _default_seed()
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"megflood {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
