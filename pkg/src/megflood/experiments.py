"""Seeded trials, parameter sweeps and the scaling fit.

Seed splitting: the seed of trial ``k`` at point ``p`` is the first 64-bit
word of ``numpy.random.SeedSequence(master_seed, spawn_key=(p, k))``, reduced
to 63 bits.  It depends only on ``(master_seed, p, k)``, so trials can run in
any order or process and the CSV is the same.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import re
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .flooding import DegenerateGeometry, build_analysis_grid, flood
from .mobility import WorldConfig

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ("n", "rho", "r", "seed", "flood_time", "timeout", "bootstrap_end",
                 "spreading_end", "max_comp_frac_mean", "density_violations")


class InsufficientData(ValueError):
    pass


class SweepConfigError(ValueError):
    pass


_RULE_RE = re.compile(
    r"^\s*(?:(?P<c>[0-9.eE+-]+)\s*\*\s*)?sqrt\(\s*(?P<arg>log\s*\(?\s*n\s*\)?|n)\s*\)\s*$")


@dataclass(frozen=True)
class RhoRule:
    """``rho`` as a function of ``n``: a constant, ``c*sqrt(log n)`` or ``c*sqrt(n)``.

    ``log`` is the natural logarithm.
    """
    kind: str    # "const" | "sqrt_log" | "sqrt_n"
    c: float

    def __call__(self, n: int) -> float:
        if self.kind == "const":
            return self.c
        if self.kind == "sqrt_log":
            return self.c * math.sqrt(math.log(n)) if n > 1 else 0.0
        return self.c * math.sqrt(n)

    @classmethod
    def parse(cls, text) -> "RhoRule":
        if isinstance(text, (int, float)):
            return cls("const", float(text))
        s = str(text).strip()
        try:
            return cls("const", float(s))
        except ValueError:
            pass
        mt = _RULE_RE.match(s)
        if not mt:
            raise ValueError(f"unsupported rho rule {text!r}; use a number, "
                             f"'c*sqrt(log n)' or 'c*sqrt(n)'")
        c = float(mt.group("c")) if mt.group("c") else 1.0
        return cls("sqrt_n" if mt.group("arg") == "n" else "sqrt_log", c)

    def __str__(self):
        if self.kind == "const":
            return repr(self.c)
        return f"{self.c!r}*sqrt({'n' if self.kind == 'sqrt_n' else 'log n'})"


@dataclass(frozen=True)
class SweepPoint:
    n: int
    rho_rule: RhoRule
    r: float
    epsilon: float = 1.0

    @property
    def rho(self) -> float:
        return self.rho_rule(self.n)

    def world(self) -> WorldConfig:
        return WorldConfig(self.n, self.rho, self.r, self.epsilon)


@dataclass
class SweepSpec:
    points: list
    trials: int = 1
    seed: int = 0
    record_components: bool = False
    record_density: bool = True
    max_steps_factor: float = 50.0

    def __post_init__(self):
        if self.trials < 1:
            raise SweepConfigError("trials must be >= 1")
        for p in self.points:
            p.world()  # raises on invalid parameters


def load_sweep_spec(path) -> SweepSpec:
    """Read a sweep JSON config (schema in ``docs/sweep_config.md``)."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SweepConfigError(f"cannot read sweep config {path}: {exc}") from exc
    return sweep_spec_from_dict(raw)


def sweep_spec_from_dict(raw) -> SweepSpec:
    if not isinstance(raw, dict):
        raise SweepConfigError("sweep config must be a JSON object")
    known = {"points", "trials", "seed", "record_components", "record_density",
             "max_steps_factor"}
    unknown = set(raw) - known
    if unknown:
        raise SweepConfigError(f"unknown keys: {sorted(unknown)}")
    try:
        points = []
        for p in raw.get("points", []):
            if "rho" in p and "rho_rule" in p:
                raise SweepConfigError("give either rho or rho_rule, not both")
            rule = RhoRule.parse(p.get("rho_rule", p.get("rho")))
            points.append(SweepPoint(int(p["n"]), rule, float(p["r"]),
                                     float(p.get("epsilon", 1.0))))
        return SweepSpec(points, int(raw.get("trials", 1)), int(raw.get("seed", 0)),
                         bool(raw.get("record_components", False)),
                         bool(raw.get("record_density", True)),
                         float(raw.get("max_steps_factor", 50.0)))
    except SweepConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SweepConfigError(f"invalid sweep config: {exc}") from exc


def trial_seed(master_seed: int, point_index: int, trial_index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(point_index, trial_index))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def model_time(n: int, rho: float, epsilon: float = 1.0) -> float:
    """``sqrt(n)/rho + log2 n``, the shape of the upper bound."""
    return math.sqrt(n) / max(rho, epsilon) + math.log2(n)


def max_steps_for(n: int, rho: float, factor: float = 50.0, epsilon: float = 1.0) -> int:
    return math.ceil(factor * model_time(n, rho, epsilon))


@dataclass
class TrialResult:
    n: int
    rho: float
    r: float
    seed: int
    flooding_time: int | None
    bootstrap_end: int | None = None
    spreading_end: int | None = None
    max_comp_frac_mean: float | None = None
    density_violations: int | None = None
    max_steps: int = 0

    @property
    def timeout(self) -> bool:
        return self.flooding_time is None

    def csv_row(self) -> list:
        def opt(v):
            return "" if v is None else v
        return [self.n, repr(self.rho), repr(self.r), self.seed, opt(self.flooding_time),
                int(self.timeout), opt(self.bootstrap_end), opt(self.spreading_end),
                "" if self.max_comp_frac_mean is None else repr(self.max_comp_frac_mean),
                opt(self.density_violations)]


def run_trial(point: SweepPoint, seed: int, record_components: bool = False,
              record_density: bool = True, max_steps_factor: float = 50.0,
              source: int | None = None) -> TrialResult:
    world = point.world()
    try:
        analysis = build_analysis_grid(world)
    except DegenerateGeometry as exc:
        log.warning("instrumentation disabled for n=%d rho=%g r=%g: %s",
                    world.n, world.rho, world.r, exc)
        analysis = None
    max_steps = max_steps_for(world.n, world.rho, max_steps_factor, world.epsilon)
    every = None
    if record_components:
        every = max(1, math.ceil(model_time(world.n, world.rho, world.epsilon) / 10))
    trace = flood(world, analysis, np.random.default_rng(seed), source=source,
                  max_steps=max_steps, component_every=every)
    fracs = [rec.largest_comp_frac for rec in trace.records
             if rec.largest_comp_frac is not None]
    return TrialResult(
        world.n, world.rho, world.r, seed, trace.flooding_time,
        trace.bootstrap_end, trace.spreading_end,
        float(np.mean(fracs)) if fracs else None,
        trace.density_violations if (record_density and analysis is not None) else None,
        max_steps)


def _run_task(task):
    point, seed, spec_flags = task
    return run_trial(point, seed, *spec_flags)


def sweep_tasks(spec: SweepSpec):
    flags = (spec.record_components, spec.record_density, spec.max_steps_factor)
    return [((pi, k), (p, trial_seed(spec.seed, pi, k), flags))
            for pi, p in enumerate(spec.points) for k in range(spec.trials)]


def iter_sweep(spec: SweepSpec, jobs: int = 1):
    """Yield results in output order, as soon as each is available."""
    payload = [t for _, t in sweep_tasks(spec)]
    if jobs > 1 and len(payload) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            # map() yields in submission order, which is already (point, trial)
            yield from pool.map(_run_task, payload, chunksize=1)
    else:
        for task in payload:
            yield _run_task(task)


def run_sweep(spec: SweepSpec, out=None, jobs: int = 1) -> list[TrialResult]:
    """Run every (point, trial) pair; rows ordered by point then trial index.

    ``out`` may be a path or a text file object.  Rows are flushed as they
    complete, so an interrupted sweep leaves a valid prefix.  A timed-out
    trial is recorded as such and never stops the sweep.
    """
    if out is None:
        return list(iter_sweep(spec, jobs))
    if not hasattr(out, "write"):
        with open(out, "w", encoding="utf-8", newline="") as fh:
            return run_sweep(spec, fh, jobs)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    out.flush()
    results = []
    for res in iter_sweep(spec, jobs):
        results.append(res)
        w.writerow(res.csv_row())
        out.flush()
    return results


def write_sweep_csv(results, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for res in results:
        w.writerow(res.csv_row())


def sweep_csv(results) -> str:
    buf = io.StringIO()
    write_sweep_csv(results, buf)
    return buf.getvalue()


@dataclass
class ScalingFit:
    a: float           # coefficient of sqrt(n)/rho
    b: float           # coefficient of log2 n
    c: float
    residual_ratio: float
    points: list       # (n, rho, median T, fitted T)
    growth_ratios: dict = field(default_factory=dict)   # n -> T(4n)/T(n)
    timeouts: int = 0

    def predict(self, n, rho):
        return self.a * math.sqrt(n) / rho + self.b * math.log2(n) + self.c


def fit_model(ns, rhos, times) -> tuple[np.ndarray, np.ndarray]:
    """Least squares of ``T ~ a sqrt(n)/rho + b log2 n + c``; returns (coef, fitted)."""
    ns = np.asarray(ns, dtype=np.float64)
    X = np.column_stack([np.sqrt(ns) / np.asarray(rhos, dtype=np.float64),
                         np.log2(ns), np.ones_like(ns)])
    coef, *_ = np.linalg.lstsq(X, np.asarray(times, dtype=np.float64), rcond=None)
    return coef, X @ coef


def fit_scaling(results) -> ScalingFit:
    groups: dict = {}
    timeouts = 0
    for res in results:
        if res.timeout:
            timeouts += 1
            continue
        groups.setdefault((res.n, res.rho), []).append(res.flooding_time)
    if len({n for n, _ in groups}) < 3:
        raise InsufficientData("need completed trials at >= 3 distinct n")
    keys = sorted(groups)
    med = [float(statistics.median(groups[k])) for k in keys]
    coef, fitted = fit_model([k[0] for k in keys], [k[1] for k in keys], med)
    ratio = max(abs(t - f) / abs(f) if f else (0.0 if t == f else math.inf)
                for t, f in zip(med, fitted))
    by_n = {k[0]: m for k, m in zip(keys, med)}
    growth = {n: by_n[4 * n] / by_n[n] for n in by_n if 4 * n in by_n and by_n[n] > 0}
    pts = [(k[0], k[1], m, float(f)) for k, m, f in zip(keys, med, fitted)]
    return ScalingFit(float(coef[0]), float(coef[1]), float(coef[2]), float(ratio), pts,
                      growth, timeouts)
