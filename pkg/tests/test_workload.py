import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from selcheck.model import assignment_at, validate
from selcheck.schedulability import is_schedulable
from selcheck.workload import (
    SCENARIO_COMMANDS,
    GenerationError,
    WorkloadSpec,
    draw_taskset,
    gen_periods,
    gen_taskset,
    randfixedsum,
    taskset_rng,
)


def test_randfixedsum_single_value(rng):
    assert randfixedsum(1, 0.4, 0.0, 1.0, rng) == pytest.approx([0.4])


def test_randfixedsum_forced_corner(rng):
    assert randfixedsum(3, 3.0, 0.0, 1.0, rng) == pytest.approx([1.0, 1.0, 1.0])


def test_randfixedsum_infeasible_total(rng):
    with pytest.raises(ValueError):
        randfixedsum(3, 3.5, 0.0, 1.0, rng)
    with pytest.raises(ValueError):
        randfixedsum(3, -0.1, 0.0, 1.0, rng)


def test_randfixedsum_sums_and_bounds(rng):
    x = randfixedsum(8, 2.0, 0.0, 1.0, rng, size=5000)
    assert x.shape == (5000, 8)
    assert np.abs(x.sum(axis=1) - 2.0).max() < 1e-9
    assert x.min() >= 0.0 and x.max() <= 1.0


def test_randfixedsum_general_bounds(rng):
    x = randfixedsum(4, 2.0, 0.2, 0.8, rng, size=2000)
    assert np.abs(x.sum(axis=1) - 2.0).max() < 1e-9
    assert x.min() >= 0.2 - 1e-12 and x.max() <= 0.8 + 1e-12


def test_randfixedsum_coordinates_exchangeable(rng):
    """Any two coordinates should follow the same marginal distribution."""
    x = randfixedsum(5, 1.7, 0.0, 1.0, rng, size=20000)
    stat = ks_2samp(x[:, 0], x[:, 3])
    assert stat.pvalue > 0.01


def test_gen_periods_degenerate_range(rng):
    assert gen_periods(5, 10, 10, rng) == [10] * 5


def test_gen_periods_bounds_and_median(rng):
    periods = gen_periods(100_000, 10_000, 1_000_000, rng)
    assert min(periods) >= 10_000 and max(periods) <= 1_000_000
    median = float(np.median(periods))
    assert abs(median - 100_000) / 100_000 < 0.05  # geometric mean of the range


def test_workload_spec_validation():
    with pytest.raises(ValueError):
        WorkloadSpec(utilization_bucket=10).check()
    with pytest.raises(ValueError):
        WorkloadSpec(scenario="extreme").check()
    with pytest.raises(ValueError):
        WorkloadSpec(overhead_preset="bare-metal").check()
    WorkloadSpec(scenario="medium").check()


def test_bucket_utilization_range():
    spec = WorkloadSpec(num_cores=4, utilization_bucket=0)
    assert spec.utilization_range() == (pytest.approx(0.04), pytest.approx(0.4))
    spec = WorkloadSpec(num_cores=4, utilization_bucket=9)
    assert spec.utilization_range() == (pytest.approx(3.64), pytest.approx(4.0))


def test_gen_taskset_valid_and_in_scenario():
    spec = WorkloadSpec(utilization_bucket=3, scenario="medium", seed=7)
    ts = gen_taskset(spec, taskset_rng(7, 0, 3, 0))
    assert validate(ts) == []
    lo, hi = SCENARIO_COMMANDS["medium"]
    for t in ts.tasks:
        assert lo <= t.num_commands <= hi
        assert t.min_checks == math.ceil(0.2 * t.num_commands)
        assert t.check_overhead == max(1, round(0.1 * t.wcet))
        assert t.deadline == t.period
        assert t.weights == (1.0,) * t.num_commands
    m = len(ts.tasks)
    assert 12 <= m <= 40
    total_u = sum(t.utilization for t in ts.tasks)
    u_lo, u_hi = spec.utilization_range()
    # wcet rounding moves utilization a hair off the drawn total
    assert u_lo - 0.05 <= total_u <= u_hi + 0.05


def test_gen_taskset_vanilla_schedulable_by_construction():
    for bucket in (0, 2, 4, 6):
        spec = WorkloadSpec(utilization_bucket=bucket, scenario="high", seed=3)
        ts = gen_taskset(spec, taskset_rng(3, 1, bucket, 0))
        assert is_schedulable(ts, assignment_at(ts, "zero"))


def test_gen_taskset_reproducible():
    spec = WorkloadSpec(utilization_bucket=4, scenario="medium", seed=11)
    a = gen_taskset(spec, taskset_rng(11, 0, 4, 0))
    b = gen_taskset(spec, taskset_rng(11, 0, 4, 0))
    assert a == b


def test_gen_taskset_overhead_preset():
    spec = WorkloadSpec(utilization_bucket=0, scenario="medium", seed=5,
                        overhead_preset="freertos")
    ts = gen_taskset(spec, taskset_rng(5, 0, 0, 0))
    assert all(t.check_overhead == 2_000 for t in ts.tasks)


def test_gen_taskset_exhausts_retries_at_saturation():
    spec = WorkloadSpec(utilization_bucket=9, scenario="high", seed=1)
    with pytest.raises(GenerationError):
        gen_taskset(spec, taskset_rng(1, 1, 9, 0), retry_budget=5)


def test_draw_taskset_returns_none_when_unplaceable():
    spec = WorkloadSpec(utilization_bucket=9, scenario="high", seed=1)
    rng = taskset_rng(1, 1, 9, 0)
    outcomes = {draw_taskset(spec, rng) is None for _ in range(10)}
    assert True in outcomes  # bucket 9 draws mostly fit on no partition


def test_n_fixed_overrides_scenario():
    spec = WorkloadSpec(utilization_bucket=1, scenario="medium", n_fixed=5, seed=2)
    ts = gen_taskset(spec, taskset_rng(2, 2, 1, 0))
    assert all(t.num_commands == 5 for t in ts.tasks)
