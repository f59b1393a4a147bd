"""Domain types: tasks, platforms, tasksets and the taskset file format.

All timing fields are positive integers in one fixed time unit
(microseconds).  Millisecond-scale inputs must be scaled by 1000 before
construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Union

TaskId = Union[str, int]

TIME_UNIT = "us"

# Mode-switch + in-enclave check cost per command, by platform stack.
OVERHEAD_PRESETS_US = {
    "linux-optee": 66_000,
    "freertos": 2_000,
}


@dataclass(frozen=True)
class Task:
    """One periodic task with its actuation-checking parameters.

    wcet/period/deadline/check_overhead are integer time units.  weights
    has one positive entry per actuation command; commands are numbered
    1..num_commands throughout.
    """

    id: TaskId
    wcet: int
    period: int
    deadline: int
    num_commands: int = 0
    min_checks: int = 0
    weights: tuple[float, ...] = ()
    check_overhead: int = 0

    @property
    def utilization(self) -> float:
        return self.wcet / self.period


@dataclass(frozen=True)
class Platform:
    """Static partition of tasks onto cores with per-core fixed priorities.

    priority maps task id to a rank; a smaller rank means higher priority.
    Ranks must be unique within a core (strict total order).
    """

    num_cores: int
    partition: dict[TaskId, int]
    priority: dict[TaskId, int]


@dataclass(frozen=True)
class Taskset:
    tasks: tuple[Task, ...]
    platform: Platform

    @cached_property
    def _by_id(self) -> dict[TaskId, Task]:
        return {t.id: t for t in self.tasks}

    def task(self, task_id: TaskId) -> Task:
        return self._by_id[task_id]

    def core_of(self, task_id: TaskId) -> int:
        return self.platform.partition[task_id]

    def tasks_on_core(self, core: int) -> list[Task]:
        """Tasks on one core, highest priority first."""
        members = [t for t in self.tasks if self.platform.partition.get(t.id) == core]
        members.sort(key=lambda t: self.platform.priority[t.id])
        return members

    def higher_priority(self, task_id: TaskId) -> list[Task]:
        """Same-core tasks with higher priority than task_id."""
        rank = self.platform.priority[task_id]
        core = self.platform.partition[task_id]
        return [t for t in self.tasks_on_core(core) if self.platform.priority[t.id] < rank]

    def lower_priority(self, task_id: TaskId) -> list[Task]:
        rank = self.platform.priority[task_id]
        core = self.platform.partition[task_id]
        return [t for t in self.tasks_on_core(core) if self.platform.priority[t.id] > rank]

    def priority_ordered(self) -> list[Task]:
        """All tasks, grouped by core index, highest priority first per core."""
        out: list[Task] = []
        for core in range(self.platform.num_cores):
            out.extend(self.tasks_on_core(core))
        return out


# CheckAssignment: commands checked per job, keyed by task id.
CheckAssignment = dict


def assignment_at(taskset: Taskset, level: str) -> CheckAssignment:
    """Uniform assignment: 'zero' (no checks), 'min' (N_min) or 'full' (N)."""
    if level == "zero":
        return {t.id: 0 for t in taskset.tasks}
    if level == "min":
        return {t.id: t.min_checks for t in taskset.tasks}
    if level == "full":
        return {t.id: t.num_commands for t in taskset.tasks}
    raise ValueError(f"unknown assignment level: {level!r}")


@dataclass(frozen=True)
class Violation:
    task_id: TaskId | None
    field: str
    message: str

    def __str__(self) -> str:
        where = "taskset" if self.task_id is None else f"task {self.task_id}"
        return f"{where}: {self.field}: {self.message}"


def _validate_task(task: Task) -> list[Violation]:
    v: list[Violation] = []

    def bad(fieldname: str, message: str) -> None:
        v.append(Violation(task.id, fieldname, message))

    for name in ("wcet", "period", "deadline", "check_overhead"):
        value = getattr(task, name)
        if not isinstance(value, int) or isinstance(value, bool):
            bad(name, "time fields must be integers")
    if isinstance(task.wcet, int) and task.wcet <= 0:
        bad("wcet", "wcet must be positive")
    if isinstance(task.wcet, int) and isinstance(task.deadline, int) and task.wcet > task.deadline:
        bad("deadline", "wcet > deadline")
    if isinstance(task.deadline, int) and isinstance(task.period, int) and task.deadline > task.period:
        bad("deadline", "deadline > period")
    if task.num_commands < 0:
        bad("num_commands", "num_commands must be >= 0")
    if not 0 <= task.min_checks <= task.num_commands:
        bad("min_checks", "min_checks outside [0, num_commands]")
    if len(task.weights) != task.num_commands:
        bad("weights", "weight-vector length mismatch")
    if any(w <= 0 for w in task.weights):
        bad("weights", "weights must be positive")
    if isinstance(task.check_overhead, int) and task.check_overhead < 0:
        bad("check_overhead", "check_overhead must be >= 0")
    return v


def validate(taskset: Taskset) -> list[Violation]:
    """Every invariant violation in the taskset; empty list means ok.

    Violations are data, not faults: malformed tasksets never raise here.
    """
    v: list[Violation] = []
    seen: set[TaskId] = set()
    for task in taskset.tasks:
        if task.id in seen:
            v.append(Violation(task.id, "id", "duplicate task id"))
        seen.add(task.id)
        v.extend(_validate_task(task))

    plat = taskset.platform
    for tid in plat.partition:
        if tid not in seen:
            v.append(Violation(tid, "partition", "partition references unknown task"))
    for task in taskset.tasks:
        if task.id not in plat.partition:
            v.append(Violation(task.id, "partition", "task not assigned to a core"))
            continue
        core = plat.partition[task.id]
        if not 0 <= core < plat.num_cores:
            v.append(Violation(task.id, "partition", f"core index {core} out of range"))
        if task.id not in plat.priority:
            v.append(Violation(task.id, "priority", "task has no priority"))
    per_core_ranks: dict[int, set[int]] = {}
    for tid, rank in plat.priority.items():
        if tid not in plat.partition:
            continue
        ranks = per_core_ranks.setdefault(plat.partition[tid], set())
        if rank in ranks:
            v.append(Violation(tid, "priority", "duplicate priority on core"))
        ranks.add(rank)
    return v


# ---------------------------------------------------------------------------
# Taskset file format (JSON).  Field names are part of the interface:
# time_unit, cores, tasks[] with id, wcet, period, deadline, num_commands,
# min_checks, weights, check_overhead, core, priority.
# ---------------------------------------------------------------------------


def taskset_to_dict(taskset: Taskset) -> dict:
    tasks = []
    for t in taskset.tasks:
        tasks.append(
            {
                "id": t.id,
                "wcet": t.wcet,
                "period": t.period,
                "deadline": t.deadline,
                "num_commands": t.num_commands,
                "min_checks": t.min_checks,
                "weights": list(t.weights),
                "check_overhead": t.check_overhead,
                "core": taskset.platform.partition[t.id],
                "priority": taskset.platform.priority[t.id],
            }
        )
    return {"time_unit": TIME_UNIT, "cores": taskset.platform.num_cores, "tasks": tasks}


def taskset_from_dict(doc: dict) -> Taskset:
    if doc.get("time_unit") != TIME_UNIT:
        raise ValueError(f"unsupported time_unit {doc.get('time_unit')!r}; expected {TIME_UNIT!r}")
    tasks = []
    partition: dict[TaskId, int] = {}
    priority: dict[TaskId, int] = {}
    for entry in doc["tasks"]:
        task = Task(
            id=entry["id"],
            wcet=entry["wcet"],
            period=entry["period"],
            deadline=entry["deadline"],
            num_commands=entry["num_commands"],
            min_checks=entry["min_checks"],
            weights=tuple(entry["weights"]),
            check_overhead=entry["check_overhead"],
        )
        tasks.append(task)
        partition[task.id] = entry["core"]
        priority[task.id] = entry["priority"]
    platform = Platform(num_cores=doc["cores"], partition=partition, priority=priority)
    return Taskset(tasks=tuple(tasks), platform=platform)


def save_taskset(taskset: Taskset, path: str | Path) -> None:
    Path(path).write_text(json.dumps(taskset_to_dict(taskset), indent=2) + "\n")


def load_taskset(path: str | Path) -> Taskset:
    return taskset_from_dict(json.loads(Path(path).read_text()))
