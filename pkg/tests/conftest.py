import numpy as np
import pytest

from selcheck.model import Platform, Task, Taskset


def make_task(tid="t0", wcet=2, period=10, deadline=None, n=3, n_min=1,
              weights=None, overhead=1):
    return Task(
        id=tid,
        wcet=wcet,
        period=period,
        deadline=period if deadline is None else deadline,
        num_commands=n,
        min_checks=n_min,
        weights=tuple(weights) if weights is not None else (1.0,) * n,
        check_overhead=overhead,
    )


def make_taskset(tasks, num_cores=1, cores=None, priorities=None):
    """Taskset with explicit or index-derived partition/priorities."""
    cores = cores or {t.id: 0 for t in tasks}
    priorities = priorities or {t.id: i for i, t in enumerate(tasks)}
    return Taskset(
        tasks=tuple(tasks),
        platform=Platform(num_cores=num_cores, partition=dict(cores), priority=dict(priorities)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
