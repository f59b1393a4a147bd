from conftest import make_task, make_taskset

from selcheck.model import (
    OVERHEAD_PRESETS_US,
    Task,
    assignment_at,
    load_taskset,
    save_taskset,
    taskset_from_dict,
    taskset_to_dict,
    validate,
)


def test_valid_taskset_has_no_violations():
    ts = make_taskset([make_task(wcet=2, period=10, n=3, n_min=1)])
    assert validate(ts) == []


def test_deadline_after_period_flagged():
    ts = make_taskset([make_task(period=10, deadline=12)])
    violations = validate(ts)
    assert any(v.field == "deadline" and "deadline > period" in v.message for v in violations)


def test_weight_length_mismatch_flagged():
    bad = Task(id="t0", wcet=2, period=10, deadline=10,
               num_commands=3, min_checks=1, weights=(1.0, 1.0), check_overhead=1)
    violations = validate(make_taskset([bad]))
    assert any(v.field == "weights" and "length mismatch" in v.message for v in violations)


def test_violations_carry_task_id_and_field():
    bad = make_task(tid="weird", wcet=0, period=10)
    ts = make_taskset([bad])
    violations = validate(ts)
    assert violations
    assert all(v.task_id == "weird" for v in violations)
    assert {v.field for v in violations} == {"wcet"}


def test_non_integer_time_fields_flagged():
    bad = Task(id="t0", wcet=2.5, period=10, deadline=10,
               num_commands=0, min_checks=0, weights=(), check_overhead=0)
    violations = validate(make_taskset([bad]))
    assert any(v.field == "wcet" and "integer" in v.message for v in violations)


def test_duplicate_ids_and_bad_partition_flagged():
    a = make_task(tid="x")
    b = make_task(tid="x")
    ts = make_taskset([a, b], cores={"x": 0}, priorities={"x": 0})
    fields = {v.field for v in validate(ts)}
    assert "id" in fields


def test_duplicate_priority_on_core_flagged():
    a, b = make_task(tid="a"), make_task(tid="b")
    ts = make_taskset([a, b], cores={"a": 0, "b": 0}, priorities={"a": 0, "b": 0})
    assert any(v.field == "priority" for v in validate(ts))


def test_commandless_task_satisfies_invariants():
    ts = make_taskset([make_task(n=0, n_min=0, weights=())])
    assert validate(ts) == []


def test_serialization_round_trip(tmp_path):
    tasks = [
        make_task(tid="a", wcet=3, period=20, n=4, n_min=2, weights=(1.0, 2.0, 0.5, 1.5), overhead=2),
        make_task(tid="b", wcet=5, period=40, n=0, n_min=0, weights=(), overhead=0),
    ]
    ts = make_taskset(tasks, num_cores=2, cores={"a": 0, "b": 1}, priorities={"a": 0, "b": 1})
    path = tmp_path / "ts.json"
    save_taskset(ts, path)
    assert load_taskset(path) == ts


def test_file_format_field_names(tmp_path):
    ts = make_taskset([make_task(tid="a")])
    doc = taskset_to_dict(ts)
    assert doc["time_unit"] == "us"
    assert doc["cores"] == 1
    entry = doc["tasks"][0]
    assert set(entry) == {
        "id", "wcet", "period", "deadline", "num_commands", "min_checks",
        "weights", "check_overhead", "core", "priority",
    }


def test_unknown_time_unit_rejected():
    ts = make_taskset([make_task()])
    doc = taskset_to_dict(ts)
    doc["time_unit"] = "ms"
    try:
        taskset_from_dict(doc)
    except ValueError as exc:
        assert "time_unit" in str(exc)
    else:
        raise AssertionError("expected ValueError")


def test_overhead_presets():
    assert OVERHEAD_PRESETS_US["linux-optee"] == 66_000
    assert OVERHEAD_PRESETS_US["freertos"] == 2_000


def test_assignment_levels():
    ts = make_taskset([make_task(n=3, n_min=2)])
    assert assignment_at(ts, "zero") == {"t0": 0}
    assert assignment_at(ts, "min") == {"t0": 2}
    assert assignment_at(ts, "full") == {"t0": 3}
