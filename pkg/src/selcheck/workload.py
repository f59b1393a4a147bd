"""Random taskset generation over utilization buckets.

Defaults mirror the standard synthetic-workload recipe: 4 cores, task
count uniform in [3P, 10P], log-uniform periods in [10, 1000] ms, total
utilization drawn inside one of ten buckets [(0.01+0.1i)P, (0.1+0.1i)P]
and split across tasks with the Stafford fixed-sum sampler, implicit
deadlines, per-command check overhead at 10% of the task's execution time
(or a fixed platform preset), equal command weights and rate-monotonic
priorities.  Tasks are placed on the least-loaded core whose response
bound admits them, so generated tasksets are always schedulable before any
checking overhead; packing cores to capacity instead would leave the
loaded cores no headroom for checks at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import OVERHEAD_PRESETS_US, Task, Taskset
from .planner import PartitionError, balanced_partition_by_response_bound

SCENARIO_COMMANDS = {"medium": (3, 5), "high": (8, 10)}

NUM_BUCKETS = 10

RETRY_BUDGET = 100


class GenerationError(RuntimeError):
    """Retry budget exhausted without producing an acceptable taskset."""


@dataclass(frozen=True)
class WorkloadSpec:
    num_cores: int = 4
    utilization_bucket: int = 0          # i in 0..9
    scenario: str = "medium"             # commands per task drawn from SCENARIO_COMMANDS
    n_fixed: int | None = None           # overrides the scenario range when set
    tasks_min: int | None = None         # default 3 * num_cores
    tasks_max: int | None = None         # default 10 * num_cores
    period_min_us: int = 10_000
    period_max_us: int = 1_000_000
    min_checks_fraction: float = 0.2
    overhead_fraction: float = 0.1
    overhead_preset: str | None = None   # key into OVERHEAD_PRESETS_US
    tasksets_per_bucket: int = 500
    seed: int = 0

    def check(self) -> None:
        if self.num_cores < 1:
            raise ValueError("num_cores must be >= 1")
        if not 0 <= self.utilization_bucket < NUM_BUCKETS:
            raise ValueError(f"utilization_bucket outside 0..{NUM_BUCKETS - 1}")
        if self.n_fixed is None and self.scenario not in SCENARIO_COMMANDS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.n_fixed is not None and self.n_fixed < 1:
            raise ValueError("n_fixed must be >= 1")
        if not 0 < self.period_min_us <= self.period_max_us:
            raise ValueError("bad period range")
        if self.overhead_preset is not None and self.overhead_preset not in OVERHEAD_PRESETS_US:
            raise ValueError(f"unknown overhead preset {self.overhead_preset!r}")

    def utilization_range(self) -> tuple[float, float]:
        i = self.utilization_bucket
        return (0.01 + 0.1 * i) * self.num_cores, (0.1 + 0.1 * i) * self.num_cores

    def task_count_range(self) -> tuple[int, int]:
        lo = 3 * self.num_cores if self.tasks_min is None else self.tasks_min
        hi = 10 * self.num_cores if self.tasks_max is None else self.tasks_max
        if not 1 <= lo <= hi:
            raise ValueError("bad task count range")
        return lo, hi


def _stafford(n: int, s: float, m: int, rng: np.random.Generator) -> np.ndarray:
    """m samples uniform over {x in [0,1]^n : sum(x) = s}, per Stafford's construction."""
    k = int(max(min(math.floor(s), n - 1), 0))
    s = max(min(s, k + 1.0), float(k))

    s1 = s - np.arange(k, k - n, -1.0)
    s2 = np.arange(k + n, k, -1.0) - s
    tiny = np.finfo(float).tiny
    huge = np.finfo(float).max

    # w[i-1, j] carries the (unnormalized) volume of the sub-polytope at
    # level i, column j; t holds the chain's probability of taking the
    # "large coordinate" branch (column moves down) out of each state.
    w = np.zeros((n, n + 1))
    w[0, 1] = huge
    t = np.zeros((n - 1, n))
    for i in range(2, n + 1):
        tmp1 = w[i - 2, 1 : i + 1] * s1[:i] / i
        tmp2 = w[i - 2, 0:i] * s2[n - i : n] / i
        w[i - 1, 1 : i + 1] = tmp1 + tmp2
        tmp3 = w[i - 1, 1 : i + 1] + tiny
        # Both branches compute tmp2/(tmp1+tmp2); the arrangement picks the
        # numerically safe form per side and, when a state has zero volume,
        # defaults to 0 on the left edge and 1 (forced move) on the right.
        tmp4 = s2[n - i : n] > s1[:i]
        t[i - 2, 0:i] = np.where(tmp4, tmp2 / tmp3, 1.0 - tmp1 / tmp3)

    x = np.zeros((n, m))
    rt = rng.random((n - 1, m))  # simplex-type transitions
    rs = rng.random((n - 1, m))  # position inside the simplex
    sv = np.full(m, s)
    jv = np.full(m, k, dtype=int)
    sm = np.zeros(m)
    pr = np.ones(m)
    for i in range(n - 1, 0, -1):
        e = (rt[n - i - 1] < t[i - 1, jv]).astype(float)
        sx = rs[n - i - 1] ** (1.0 / i)
        sm = sm + (1.0 - sx) * pr * sv / (i + 1)
        pr = sx * pr
        x[n - i - 1] = sm + pr * e
        sv = sv - e
        jv = np.maximum(jv - e.astype(int), 0)
    x[n - 1] = sm + pr * sv

    # The construction fills coordinates in a fixed order; permute per sample.
    perm = np.argsort(rng.random((n, m)), axis=0)
    return np.take_along_axis(x, perm, axis=0).T


def randfixedsum(
    n: int,
    total: float,
    lo: float,
    hi: float,
    rng: np.random.Generator,
    size: int | None = None,
) -> np.ndarray:
    """Draw vectors uniform over {x in [lo, hi]^n : sum(x) = total}.

    Returns shape (n,) by default, or (size, n) when size is given.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if hi < lo:
        raise ValueError("hi < lo")
    if not n * lo - 1e-12 <= total <= n * hi + 1e-12:
        raise ValueError(f"total {total} outside feasible range [{n * lo}, {n * hi}]")
    m = 1 if size is None else int(size)
    span = hi - lo
    if span == 0.0:
        x01 = np.full((m, n), 0.0)
    elif n == 1:
        x01 = np.full((m, 1), (total - lo) / span)
    else:
        x01 = _stafford(n, (total - n * lo) / span, m, rng)
    out = x01 * span + lo
    return out[0] if size is None else out


def gen_periods(n: int, lo: int, hi: int, rng: np.random.Generator) -> list[int]:
    """n log-uniform periods in [lo, hi], rounded to integer time units."""
    if not 0 < lo <= hi:
        raise ValueError("bad period range")
    raw = np.exp(rng.uniform(math.log(lo), math.log(hi), size=n))
    return [int(min(max(round(v), lo), hi)) for v in raw]


def _draw_taskset(spec: WorkloadSpec, rng: np.random.Generator) -> Taskset:
    tmin, tmax = spec.task_count_range()
    m = int(rng.integers(tmin, tmax + 1))
    u_lo, u_hi = spec.utilization_range()
    total_u = float(rng.uniform(u_lo, u_hi))
    utils = randfixedsum(m, total_u, 0.0, 1.0, rng)
    periods = gen_periods(m, spec.period_min_us, spec.period_max_us, rng)

    width = len(str(m - 1))
    tasks = []
    for idx in range(m):
        period = periods[idx]
        wcet = max(1, round(float(utils[idx]) * period))
        if spec.n_fixed is not None:
            n_cmd = spec.n_fixed
        else:
            n_lo, n_hi = SCENARIO_COMMANDS[spec.scenario]
            n_cmd = int(rng.integers(n_lo, n_hi + 1))
        if spec.overhead_preset is not None:
            overhead = OVERHEAD_PRESETS_US[spec.overhead_preset]
        else:
            overhead = max(1, round(spec.overhead_fraction * wcet))
        tasks.append(
            Task(
                id=f"t{idx:0{width}d}",
                wcet=wcet,
                period=period,
                deadline=period,
                num_commands=n_cmd,
                min_checks=math.ceil(spec.min_checks_fraction * n_cmd),
                weights=(1.0,) * n_cmd,
                check_overhead=overhead,
            )
        )
    platform = balanced_partition_by_response_bound(tasks, spec.num_cores)
    return Taskset(tasks=tuple(tasks), platform=platform)


def draw_taskset(spec: WorkloadSpec, rng: np.random.Generator) -> Taskset | None:
    """One draw with no retry: None when the draw fits on no partition.

    Sweep experiments count unplaceable draws as unschedulable tasksets
    instead of redrawing, so the acceptance-ratio denominator stays the
    number of generated tasksets.
    """
    spec.check()
    try:
        return _draw_taskset(spec, rng)
    except PartitionError:
        return None


def gen_taskset(
    spec: WorkloadSpec,
    rng: np.random.Generator,
    retry_budget: int = RETRY_BUDGET,
) -> Taskset:
    """One random taskset for the spec's bucket and scenario.

    Placement admits tasks by the vanilla response bound, so anything
    returned is schedulable with checking disabled; draws whose tasks fit
    on no core are retried up to retry_budget times.
    """
    spec.check()
    for _ in range(retry_budget):
        try:
            return _draw_taskset(spec, rng)
        except PartitionError:
            continue
    raise GenerationError(
        f"no acceptable taskset in {retry_budget} draws "
        f"(bucket {spec.utilization_bucket}, scenario {spec.scenario})"
    )


def taskset_rng(seed: int, *path: int) -> np.random.Generator:
    """Deterministic generator for one (seed, ...) derivation path."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, *path))))
