"""Response-time bounds and feasibility tests under per-command checking overhead.

The bound is the closed linear form

    R_i = C_i^chk + sum_{h in hp(i)} (1 + D_i / T_h) * C_h^chk

with C^chk = C + k * C^o for the assigned number of checks k.  It is an
upper bound, not the iterative fixed-point recurrence, and it is monotone
non-decreasing in every task's k; the planner's binary search relies on
that monotonicity.  D_i / T_h is evaluated in double precision and all
deadline comparisons use an absolute tolerance.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

from .model import CheckAssignment, Task, Taskset, assignment_at

# Absolute tolerance for comparing the (non-integral) bound to deadlines.
TIME_TOL = 1e-9


def tee_wcet(task: Task, k: int) -> int:
    """Execution time with k checked commands: C + k * C^o."""
    if not 0 <= k <= task.num_commands:
        raise ValueError(f"task {task.id}: k={k} outside [0, {task.num_commands}]")
    return task.wcet + k * task.check_overhead


def response_time_bound(task: Task, taskset: Taskset, assignment: CheckAssignment) -> float:
    """Upper bound on the worst-case response time of `task` under `assignment`.

    Interference is taken only from higher-priority tasks on the task's core;
    the assignment must cover the task and all of those tasks.
    """
    if task.id not in taskset.platform.partition:
        raise ValueError(f"task {task.id} not in partition")
    r = float(tee_wcet(task, assignment[task.id]))
    for h in taskset.higher_priority(task.id):
        r += (1.0 + task.deadline / h.period) * tee_wcet(h, assignment[h.id])
    return r


def vanilla_response_time(task: Task, taskset: Taskset) -> float:
    """Response-time bound with no checking at all (every k = 0)."""
    return response_time_bound(task, taskset, assignment_at(taskset, "zero"))


def checking_overhead(task: Task, taskset: Taskset, assignment: CheckAssignment) -> float:
    """Total checking overhead O = R^chk - R, computed directly from k * C^o terms."""
    if task.id not in taskset.platform.partition:
        raise ValueError(f"task {task.id} not in partition")
    o = float(assignment[task.id] * task.check_overhead)
    for h in taskset.higher_priority(task.id):
        o += (1.0 + task.deadline / h.period) * assignment[h.id] * h.check_overhead
    return o


@dataclass(frozen=True)
class TaskTiming:
    task_id: object
    response_time: float        # vanilla bound (all k = 0)
    response_time_checked: float
    overhead: float
    deadline: int
    schedulable: bool


@dataclass(frozen=True)
class ResponseTimeReport:
    entries: tuple[TaskTiming, ...]
    schedulable: bool

    def entry(self, task_id) -> TaskTiming:
        for e in self.entries:
            if e.task_id == task_id:
                return e
        raise KeyError(task_id)


def analyze(taskset: Taskset, assignment: CheckAssignment) -> ResponseTimeReport:
    """Per-task response times and deadline flags for a complete assignment."""
    for t in taskset.tasks:
        if t.id not in assignment:
            raise ValueError(f"assignment missing task {t.id}")
    entries = []
    for t in taskset.priority_ordered():
        r_checked = response_time_bound(t, taskset, assignment)
        r_vanilla = vanilla_response_time(t, taskset)
        entries.append(
            TaskTiming(
                task_id=t.id,
                response_time=r_vanilla,
                response_time_checked=r_checked,
                overhead=checking_overhead(t, taskset, assignment),
                deadline=t.deadline,
                schedulable=r_checked <= t.deadline + TIME_TOL,
            )
        )
    return ResponseTimeReport(
        entries=tuple(entries), schedulable=all(e.schedulable for e in entries)
    )


def is_schedulable(taskset: Taskset, assignment: CheckAssignment) -> bool:
    """True iff every task's checked response-time bound meets its deadline."""
    for t in taskset.tasks:
        if t.id not in assignment:
            raise ValueError(f"assignment missing task {t.id}")
    for t in taskset.tasks:
        if response_time_bound(t, taskset, assignment) > t.deadline + TIME_TOL:
            return False
    return True


def report_csv(report: ResponseTimeReport) -> str:
    out = io.StringIO()
    out.write("task,R,R_TEE,O,deadline,schedulable\n")
    for e in report.entries:
        out.write(
            f"{e.task_id},{e.response_time!r},{e.response_time_checked!r},"
            f"{e.overhead!r},{e.deadline},{int(e.schedulable)}\n"
        )
    return out.getvalue()
