"""Check-budget selection for a whole taskset.

The system-wide pass first verifies the taskset carries its minimum
checking load (every task at min_checks); if not, the taskset is
infeasible.  It then walks each core from highest to lowest priority and
fixes each task's budget K* at the largest value that keeps the task
itself and everything below it on the same core schedulable, using binary
search over [min_checks, num_commands] (the response-time bound is
monotone in k).  Tasks with K* < N get a solved game distribution; tasks
checking all commands need none.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import game as game_mod
from .model import CheckAssignment, Platform, Task, TaskId, Taskset
from .schedulability import TIME_TOL, response_time_bound

INFEASIBLE_MESSAGE = "minimum QoS requirements cannot be met"


@dataclass(frozen=True)
class Infeasible:
    reason: str = INFEASIBLE_MESSAGE


@dataclass(frozen=True)
class TaskPlan:
    task_id: TaskId
    num_commands: int
    k_star: int
    # Empty when k_star == num_commands (deterministic full checking).
    strategies: tuple[tuple[int, ...], ...] = ()
    probabilities: tuple[float, ...] = ()
    attacker_strategy: int | None = None
    objective: float | None = None

    @property
    def deterministic(self) -> bool:
        return self.k_star == self.num_commands


@dataclass(frozen=True)
class CheckPlan:
    feasible: bool
    tasks: dict[TaskId, TaskPlan]

    def coverage_pairs(self) -> list[tuple[int, int]]:
        """(k_star, num_commands) for every task that issues commands."""
        return [(e.k_star, e.num_commands) for e in self.tasks.values() if e.num_commands > 0]


def _meets_deadlines(task: Task, taskset: Taskset, assignment: CheckAssignment) -> bool:
    """task and every lower-priority task on its core meet their deadlines."""
    for t in [task, *taskset.lower_priority(task.id)]:
        if response_time_bound(t, taskset, assignment) > t.deadline + TIME_TOL:
            return False
    return True


def max_feasible_k(task: Task, taskset: Taskset, fixed: CheckAssignment) -> int:
    """Largest k in [min_checks, num_commands] keeping this task's core schedulable.

    `fixed` supplies every other task's check count; the entry for `task`
    (if any) is ignored.  Requires feasibility at k = min_checks, which the
    system-wide pass guarantees before calling.
    """
    lo, hi = task.min_checks, task.num_commands
    assignment = dict(fixed)
    assignment[task.id] = lo
    if not _meets_deadlines(task, taskset, assignment):
        raise ValueError(f"task {task.id}: infeasible even at min_checks={lo}")
    best = lo
    lo += 1
    while lo <= hi:
        mid = (lo + hi) // 2
        assignment[task.id] = mid
        if _meets_deadlines(task, taskset, assignment):
            best = mid
            lo = mid + 1
        else:
            hi = mid - 1
    return best


def assign_check_budgets(taskset: Taskset) -> dict[TaskId, int] | Infeasible:
    """Per-task K* without game solutions; Infeasible when min_checks already overloads."""
    assignment = {t.id: t.min_checks for t in taskset.tasks}
    for t in taskset.tasks:
        if response_time_bound(t, taskset, assignment) > t.deadline + TIME_TOL:
            return Infeasible()
    for t in taskset.priority_ordered():
        assignment[t.id] = max_feasible_k(t, taskset, assignment)
    return assignment


def plan(
    taskset: Taskset,
    big_m: float = game_mod.DEFAULT_BIG_M,
    epsilon: float = game_mod.DEFAULT_EPSILON,
) -> CheckPlan | Infeasible:
    """Full selection pass: budgets plus a solved distribution where K* < N."""
    budgets = assign_check_budgets(taskset)
    if isinstance(budgets, Infeasible):
        return budgets
    entries: dict[TaskId, TaskPlan] = {}
    for t in taskset.priority_ordered():
        k = budgets[t.id]
        if k == t.num_commands:
            entries[t.id] = TaskPlan(task_id=t.id, num_commands=t.num_commands, k_star=k)
        elif k == 0:
            # Nothing is checked; the single empty strategy is chosen always.
            entries[t.id] = TaskPlan(
                task_id=t.id,
                num_commands=t.num_commands,
                k_star=0,
                strategies=((),),
                probabilities=(1.0,),
            )
        else:
            instance = game_mod.build_game(t, k, big_m)
            solution = game_mod.solve_game(instance, epsilon)
            entries[t.id] = TaskPlan(
                task_id=t.id,
                num_commands=t.num_commands,
                k_star=k,
                strategies=instance.designer_strategies,
                probabilities=solution.probabilities,
                attacker_strategy=solution.attacker_strategy,
                objective=solution.objective,
            )
    return CheckPlan(feasible=True, tasks=entries)


# ---------------------------------------------------------------------------
# Partitioning and priority assignment for generated workloads.
# ---------------------------------------------------------------------------


class PartitionError(RuntimeError):
    """No core can host a task under the unit-utilization capacity bound."""


def rate_monotonic_priorities(tasks: list[Task]) -> list[TaskId]:
    """Task ids ordered highest priority first: shorter period wins, ties by id."""
    return [t.id for t in sorted(tasks, key=lambda t: (t.period, t.id))]


def first_fit_partition(tasks: list[Task], num_cores: int) -> Platform:
    """Place tasks on cores first-fit in priority order, capping each core at sum(U) <= 1."""
    if num_cores < 1:
        raise ValueError("need at least one core")
    order = rate_monotonic_priorities(tasks)
    by_id = {t.id: t for t in tasks}
    load = [0.0] * num_cores
    partition: dict[TaskId, int] = {}
    priority: dict[TaskId, int] = {}
    for rank, tid in enumerate(order):
        u = by_id[tid].utilization
        for core in range(num_cores):
            if load[core] + u <= 1.0 + 1e-12:
                load[core] += u
                partition[tid] = core
                break
        else:
            raise PartitionError(f"task {tid} (U={u:.3f}) fits on no core")
        priority[tid] = rank
    return Platform(num_cores=num_cores, partition=partition, priority=priority)


def balanced_partition_by_response_bound(tasks: list[Task], num_cores: int) -> Platform:
    """Load-balancing placement with the vanilla response bound as admission test.

    Tasks arrive in priority order and go to the least-utilized core whose
    admission test passes (lowest index on ties).  A newcomer is always the
    lowest priority on its core, so only its own bound needs checking.
    Every placement this produces is schedulable with checking disabled;
    raises PartitionError when some task's bound fails on every core.
    """
    if num_cores < 1:
        raise ValueError("need at least one core")
    order = rate_monotonic_priorities(tasks)
    by_id = {t.id: t for t in tasks}
    members: list[list[Task]] = [[] for _ in range(num_cores)]
    load = [0.0] * num_cores
    partition: dict[TaskId, int] = {}
    priority: dict[TaskId, int] = {}
    for rank, tid in enumerate(order):
        t = by_id[tid]
        placed = False
        for core in sorted(range(num_cores), key=lambda c: load[c]):
            bound = t.wcet + sum((1.0 + t.deadline / h.period) * h.wcet for h in members[core])
            if bound <= t.deadline + TIME_TOL:
                members[core].append(t)
                load[core] += t.utilization
                partition[tid] = core
                placed = True
                break
        if not placed:
            raise PartitionError(f"task {tid} is unschedulable on every core")
        priority[tid] = rank
    return Platform(num_cores=num_cores, partition=partition, priority=priority)


# ---------------------------------------------------------------------------
# Plan file format (JSON): per task id, K*, strategy list, x vector, the
# pinned attacker strategy index and objective.
# ---------------------------------------------------------------------------


def plan_to_dict(check_plan: CheckPlan) -> dict:
    tasks = []
    for e in check_plan.tasks.values():
        tasks.append(
            {
                "id": e.task_id,
                "num_commands": e.num_commands,
                "k_star": e.k_star,
                "strategies": [list(s) for s in e.strategies],
                "probabilities": list(e.probabilities),
                "attacker_strategy": e.attacker_strategy,
                "objective": e.objective,
            }
        )
    return {"feasible": check_plan.feasible, "tasks": tasks}


def plan_from_dict(doc: dict) -> CheckPlan:
    entries: dict[TaskId, TaskPlan] = {}
    for entry in doc["tasks"]:
        entries[entry["id"]] = TaskPlan(
            task_id=entry["id"],
            num_commands=entry["num_commands"],
            k_star=entry["k_star"],
            strategies=tuple(tuple(s) for s in entry["strategies"]),
            probabilities=tuple(entry["probabilities"]),
            attacker_strategy=entry.get("attacker_strategy"),
            objective=entry.get("objective"),
        )
    return CheckPlan(feasible=doc["feasible"], tasks=entries)


def save_plan(check_plan: CheckPlan, path: str | Path) -> None:
    Path(path).write_text(json.dumps(plan_to_dict(check_plan), indent=2) + "\n")


def load_plan(path: str | Path) -> CheckPlan:
    return plan_from_dict(json.loads(Path(path).read_text()))
