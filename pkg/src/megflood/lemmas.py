"""Verifiers for the standalone combinatorial and probabilistic lemmas.

* boundary size on an ``m x m`` grid: ``|dB| >= sqrt(min(|B|, m^2 - |B|))``
  with 4-adjacency boundaries, exhaustive for ``m <= 4`` and sampled beyond;
* spreading time: the slowest admissible integer sequence with
  ``q_{t+1} >= q_t + sqrt(min(q_t, K - q_t))`` reaches ``K`` by ``ceil(5 sqrt K)``;
* almost-increasing processes: Monte Carlo tail estimate against ``exp(-p t)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

SE_MARGIN = 3.0


@dataclass
class LemmaReport:
    lemma: str
    cases: int
    violations: int
    worst_margin: float
    seed: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_json(self) -> str:
        d = asdict(self)
        d.pop("details")
        return json.dumps(d, sort_keys=True)

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        extra = "".join(f" {k}={v}" for k, v in self.details.items())
        return (f"[{status}] {self.lemma}: cases={self.cases} violations={self.violations} "
                f"worst_margin={self.worst_margin:.6g} seed={self.seed}{extra}")


# ---------------------------------------------------------------- boundary

@dataclass(frozen=True)
class CellSubset:
    m: int
    members: frozenset

    def __post_init__(self):
        for (a, b) in self.members:
            if not (0 <= a < self.m and 0 <= b < self.m):
                raise ValueError(f"cell {(a, b)} outside the {self.m}x{self.m} grid")

    @classmethod
    def of(cls, m, cells):
        return cls(m, frozenset((int(a), int(b)) for a, b in cells))


def boundary(B: CellSubset) -> set:
    m = B.m
    out = set()
    for (a, b) in B.members:
        for c in ((a - 1, b), (a + 1, b), (a, b - 1), (a, b + 1)):
            if 0 <= c[0] < m and 0 <= c[1] < m and c not in B.members:
                out.add(c)
    return out


def boundary_bound(size: int, m: int) -> float:
    return math.sqrt(min(size, m * m - size))


def _popcount(x):
    x = x.astype(np.uint64)
    count = np.zeros(x.shape, dtype=np.int64)
    while x.any():
        count += (x & np.uint64(1)).astype(np.int64)
        x >>= np.uint64(1)
    return count


def boundary_sizes_bitmask(masks: np.ndarray, m: int) -> np.ndarray:
    """|dB| for subsets encoded as bitmasks (bit ``a*m + b`` is cell (a, b)), m <= 7."""
    masks = masks.astype(np.uint64)
    full = np.uint64((1 << (m * m)) - 1)
    not_left = np.uint64(sum(1 << (a * m + b) for a in range(m) for b in range(1, m)))
    not_right = np.uint64(sum(1 << (a * m + b) for a in range(m) for b in range(m - 1)))
    mm = np.uint64(m)
    grown = (((masks & not_right) << np.uint64(1))
             | ((masks & not_left) >> np.uint64(1))
             | (masks << mm) | (masks >> mm)) & full
    return _popcount(grown & ~masks & full)


def _boundary_sizes_dense(cells: np.ndarray) -> np.ndarray:
    """|dB| for a batch of boolean ``(k, m, m)`` subsets."""
    grown = np.zeros_like(cells)
    grown[:, 1:, :] |= cells[:, :-1, :]
    grown[:, :-1, :] |= cells[:, 1:, :]
    grown[:, :, 1:] |= cells[:, :, :-1]
    grown[:, :, :-1] |= cells[:, :, 1:]
    return (grown & ~cells).sum(axis=(1, 2))


def _margins(dB, size, m):
    return dB - np.sqrt(np.minimum(size, m * m - size))


def verify_boundary_exhaustive(m: int) -> LemmaReport:
    """All ``2^(m^2)`` subsets of the ``m x m`` grid (``m <= 4``)."""
    if not 1 <= m <= 4:
        raise ValueError("exhaustive mode is limited to 1 <= m <= 4")
    masks = np.arange(1 << (m * m), dtype=np.uint64)
    margin = _margins(boundary_sizes_bitmask(masks, m), _popcount(masks), m)
    return LemmaReport("boundary", len(masks), int((margin < 0).sum()), float(margin.min()),
                       details={"m": m})


def verify_boundary_sampled(m: int, samples: int, seed: int | None = None,
                            batch: int = 50_000) -> LemmaReport:
    """Random subsets of the ``m x m`` grid, each with its own fill density."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = math.inf
    for start in range(0, samples, batch):
        k = min(batch, samples - start)
        cells = rng.random((k, m, m)) < rng.random((k, 1, 1))
        margin = _margins(_boundary_sizes_dense(cells), cells.sum(axis=(1, 2)), m)
        violations += int((margin < 0).sum())
        worst = min(worst, float(margin.min()))
    return LemmaReport("boundary", samples, violations, worst, seed, details={"m": m})


def verify_boundary_lemma(m_max: int = 4, samples: int = 0, seed: int | None = None,
                          m_sampled: int = 16) -> LemmaReport:
    """Exhaustive check for every ``m`` in ``1..m_max`` (``m_max <= 4``), plus
    ``samples`` random subsets of the ``m_sampled`` grid when asked."""
    reports = [verify_boundary_exhaustive(m) for m in range(1, m_max + 1)]
    if samples:
        reports.append(verify_boundary_sampled(m_sampled, samples, seed))
    return LemmaReport("boundary", sum(r.cases for r in reports),
                       sum(r.violations for r in reports),
                       min(r.worst_margin for r in reports), seed,
                       details={"m_max": m_max, **({"m_sampled": m_sampled} if samples else {})})


# ---------------------------------------------------------------- spreading

def _ceil_sqrt(x: int) -> int:
    return 0 if x <= 0 else math.isqrt(x - 1) + 1


def minimal_spreading_sequence(K: int, trajectory: bool = False):
    """Steps for ``q_0 = 1, q_{t+1} = min(K, q_t + ceil(sqrt(min(q_t, K - q_t))))`` to hit K."""
    if K < 1:
        raise ValueError("K must be >= 1")
    q, t = 1, 0
    seq = [q]
    while q < K:
        q = min(K, q + _ceil_sqrt(min(q, K - q)))
        t += 1
        seq.append(q)
    return (t, seq) if trajectory else t


def _ceil_sqrt_array(x: np.ndarray) -> np.ndarray:
    s = np.floor(np.sqrt(x.astype(np.float64))).astype(np.int64)
    s -= (s * s > x)
    s += ((s + 1) * (s + 1) <= x)
    return s + (s * s < x)


def minimal_spreading_steps(K_max: int) -> np.ndarray:
    """``minimal_spreading_sequence(K)`` for every ``K`` in ``1..K_max``, vectorised."""
    K = np.arange(1, K_max + 1, dtype=np.int64)
    q = np.ones_like(K)
    steps = np.zeros_like(K)
    active = q < K
    while active.any():
        qa, Ka = q[active], K[active]
        q[active] = np.minimum(Ka, qa + _ceil_sqrt_array(np.minimum(qa, Ka - qa)))
        steps[active] += 1
        active = q < K
    return steps


def verify_spreading_lemma(K_max: int = 10_000) -> LemmaReport:
    if K_max < 1:
        raise ValueError("K_max must be >= 1")
    steps = minimal_spreading_steps(K_max)
    K = np.arange(1, K_max + 1)
    limit = np.ceil(5 * np.sqrt(K))
    ratio = steps / (5 * np.sqrt(K))
    return LemmaReport("spreading", K_max, int((steps > limit).sum()),
                       float((limit - steps).min()),
                       details={"max_ratio": round(float(ratio.max()), 6)})


# ---------------------------------------------------------------- almost-increasing

# generator(x, rng) -> next values; vectorised over trials
Generator = Callable[[np.ndarray, np.random.Generator], np.ndarray]


@dataclass
class AlmostIncreasingSpec:
    alpha: float
    beta: float
    M: int
    p: float
    generator: Generator

    def __post_init__(self):
        if not (self.alpha > 1 and 0 < self.beta < 1 and self.M >= 1 and 0 < self.p < 1):
            raise ValueError("need alpha > 1, 0 < beta < 1, M >= 1, 0 < p < 1")
        if not self.p < self.p_limit:
            raise ValueError(f"p={self.p} violates p < log(alpha)/(e log(alpha/beta)) "
                             f"= {self.p_limit:.6g}; the lemma does not apply")

    @property
    def p_limit(self) -> float:
        return math.log(self.alpha) / (math.e * math.log(self.alpha / self.beta))

    @property
    def min_t(self) -> int:
        denom = math.log(self.alpha) - math.e * self.p * math.log(self.alpha / self.beta)
        return math.ceil(math.log(self.M) / denom)

    def bound(self, t: int) -> float:
        return math.exp(-self.p * t)


def adversarial_generator(alpha: float, beta: float, p: float) -> Generator:
    """Shrink by ``beta`` with probability ``p``, otherwise grow by ``alpha``."""
    def step(x, rng):
        bad = rng.random(x.shape) < p
        return np.where(bad, beta * x, alpha * x)
    return step


def growth_generator(alpha: float) -> Generator:
    def step(x, rng):
        return alpha * x
    return step


@dataclass
class TailEstimate:
    t: int
    trials: int
    estimate: float
    std_error: float
    bound: float

    @property
    def upper(self) -> float:
        return self.estimate + SE_MARGIN * self.std_error

    @property
    def passed(self) -> bool:
        return self.estimate <= self.bound + SE_MARGIN * self.std_error


def simulate_almost_increasing(spec: AlmostIncreasingSpec, t: int | None, trials: int,
                               rng: np.random.Generator) -> TailEstimate:
    """Estimate ``P(X_i < M for i = 1..t)`` from ``X_0 = 1``."""
    t = spec.min_t if t is None else t
    if t < spec.min_t:
        raise ValueError(f"t={t} is below the lemma's threshold {spec.min_t}")
    x = np.ones(trials)
    below = np.ones(trials, dtype=bool)
    for _ in range(t):
        x = spec.generator(x, rng)
        below &= x < spec.M
    est = float(below.mean())
    se = math.sqrt(est * (1 - est) / trials)
    return TailEstimate(t, trials, est, se, spec.bound(t))


def verify_almost_increasing(alpha=2.0, beta=1 / 121, M=1000, p=0.01, trials=100_000,
                             seed: int | None = 0, t: int | None = None) -> LemmaReport:
    spec = AlmostIncreasingSpec(alpha, beta, M, p, adversarial_generator(alpha, beta, p))
    est = simulate_almost_increasing(spec, t, trials, np.random.default_rng(seed))
    margin = est.bound + SE_MARGIN * est.std_error - est.estimate
    return LemmaReport("almost-increasing", trials, 0 if est.passed else 1, margin, seed,
                       details={"t": est.t, "estimate": est.estimate,
                                "bound": round(est.bound, 6)})
