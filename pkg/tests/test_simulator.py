import numpy as np
import pytest

from conftest import make_task, make_taskset

from selcheck.game import build_game_from_weights, marginal_check_probability, solve_game
from selcheck.planner import CheckPlan, TaskPlan
from selcheck.simulator import (
    AttackSpec,
    acceptance_ratio,
    coverage_ratio,
    result_csv,
    roulette_select,
    run_detection_experiment,
)


def randomized_plan(n=4, k=2):
    """CheckPlan for one task with a solved k-of-n game distribution."""
    game = build_game_from_weights((1.0,) * n, k)
    sol = solve_game(game)
    entry = TaskPlan(
        task_id="victim",
        num_commands=n,
        k_star=k,
        strategies=game.designer_strategies,
        probabilities=sol.probabilities,
    )
    return CheckPlan(feasible=True, tasks={"victim": entry}), game, sol


def full_plan(n=3):
    entry = TaskPlan(task_id="victim", num_commands=n, k_star=n)
    return CheckPlan(feasible=True, tasks={"victim": entry})


def test_roulette_degenerate_vectors(rng):
    assert roulette_select([1.0], rng) == 0
    for _ in range(20):
        assert roulette_select([0.0, 1.0], rng) == 1


def test_roulette_rejects_malformed(rng):
    with pytest.raises(ValueError):
        roulette_select([], rng)
    with pytest.raises(ValueError):
        roulette_select([0.5, 0.4], rng)  # sums to 0.9
    with pytest.raises(ValueError):
        roulette_select([1.5, -0.5], rng)


def test_roulette_empirical_frequencies(rng):
    x = [0.25, 0.25, 0.5]
    counts = np.zeros(3)
    draws = 100_000
    for _ in range(draws):
        counts[roulette_select(x, rng)] += 1
    freq = counts / draws
    assert np.abs(freq - x).max() < 0.01


def test_full_checking_always_detects_in_one_job():
    result = run_detection_experiment(
        full_plan(), AttackSpec(victim="victim", commands=(2,), trigger=0), trials=50, seed=5
    )
    assert result.delays == (1,) * 50
    assert result.undetected == 0
    assert result.mean_delay == 1.0
    assert result.p99_delay == 1


def test_compromising_everything_detected_immediately():
    plan_, _, _ = randomized_plan(4, 2)
    result = run_detection_experiment(
        plan_, AttackSpec(victim="victim", commands=(1, 2, 3, 4), trigger=0), trials=50, seed=5
    )
    assert result.delays == (1,) * 50


def test_detection_delay_matches_geometric_mean():
    plan_, game, sol = randomized_plan(4, 2)
    marginal = marginal_check_probability(game, sol)[0]
    result = run_detection_experiment(
        plan_, AttackSpec(victim="victim", commands=(1,), trigger=0), trials=4000, seed=7
    )
    assert result.mean_delay == pytest.approx(1.0 / marginal, rel=0.15)


def test_seed_determinism():
    plan_, _, _ = randomized_plan(4, 2)
    attack = AttackSpec(victim="victim", commands="random", trigger="random")
    a = run_detection_experiment(plan_, attack, trials=200, seed=3)
    b = run_detection_experiment(plan_, attack, trials=200, seed=3)
    assert a == b
    c = run_detection_experiment(plan_, attack, trials=200, seed=4)
    assert a != c


def test_one_shot_mode_records_undetected():
    plan_, _, _ = randomized_plan(4, 2)
    result = run_detection_experiment(
        plan_,
        AttackSpec(victim="victim", commands=(1,), trigger=0, mode="one-shot"),
        trials=2000,
        seed=11,
    )
    assert 0 < result.undetected < 2000  # hit probability is 1/2 per job
    assert result.mean_delay == 1.0  # detected one-shot attacks are caught at the trigger
    frac = result.undetected / 2000
    assert frac == pytest.approx(0.5, abs=0.05)


def test_zero_accuracy_never_detects_one_shot():
    plan_, _, _ = randomized_plan(4, 2)
    result = run_detection_experiment(
        plan_,
        AttackSpec(victim="victim", commands=(1,), trigger=0, mode="one-shot"),
        trials=100,
        seed=2,
        detection_accuracy=0.0,
    )
    assert result.undetected == 100


def test_imperfect_detection_stretches_delay():
    plan_, game, sol = randomized_plan(4, 2)
    attack = AttackSpec(victim="victim", commands=(1,), trigger=0)
    sharp = run_detection_experiment(plan_, attack, trials=3000, seed=9)
    fuzzy = run_detection_experiment(plan_, attack, trials=3000, seed=9, detection_accuracy=0.5)
    # per-job success halves: 0.25 instead of 0.5
    assert fuzzy.mean_delay == pytest.approx(4.0, rel=0.15)
    assert fuzzy.mean_delay > sharp.mean_delay


def test_attack_spec_validation():
    plan_, _, _ = randomized_plan(4, 2)
    with pytest.raises(ValueError):
        run_detection_experiment(plan_, AttackSpec(victim="victim", commands=()), trials=10)
    with pytest.raises(ValueError):
        run_detection_experiment(plan_, AttackSpec(victim="victim", commands=(9,)), trials=10)
    with pytest.raises(ValueError):
        run_detection_experiment(plan_, AttackSpec(victim="victim", mode="sometimes"), trials=10)
    with pytest.raises(KeyError):
        run_detection_experiment(plan_, AttackSpec(victim="ghost"), trials=10)


def test_long_run_check_frequency_converges_to_marginals(rng):
    plan_, game, sol = randomized_plan(4, 2)
    entry = plan_.tasks["victim"]
    marginals = np.array(marginal_check_probability(game, sol))
    counts = np.zeros(4)
    jobs = 100_000
    for _ in range(jobs):
        subset = entry.strategies[roulette_select(entry.probabilities, rng)]
        for c in subset:
            counts[c - 1] += 1
    freq = counts / jobs
    assert np.abs(freq - marginals).max() < 0.01
    assert marginals.min() > 0  # positivity floor keeps every command reachable


def test_result_csv_layout():
    plan_, _, _ = randomized_plan(4, 2)
    result = run_detection_experiment(
        plan_, AttackSpec(victim="victim", commands=(1,), trigger=0), trials=5, seed=1
    )
    lines = result_csv(result).strip().splitlines()
    assert lines[0] == "trial,delay_jobs,detected"
    assert len(lines) == 7
    assert lines[-1].startswith("summary,")


def test_coverage_ratio_bounds_and_values():
    entries = {
        "a": TaskPlan(task_id="a", num_commands=4, k_star=4),
        "b": TaskPlan(task_id="b", num_commands=5, k_star=5),
    }
    assert coverage_ratio(CheckPlan(feasible=True, tasks=entries)) == 1.0

    table = [(2, 4), (2, 5), (2, 4), (3, 7)]
    entries = {
        str(i): TaskPlan(task_id=str(i), num_commands=n, k_star=k)
        for i, (k, n) in enumerate(table)
    }
    cr = coverage_ratio(CheckPlan(feasible=True, tasks=entries))
    assert cr == pytest.approx((0.5 + 0.4 + 0.5 + 3 / 7) / 4)
    assert cr == pytest.approx(0.4571, abs=1e-4)

    single = {"a": TaskPlan(task_id="a", num_commands=5, k_star=1)}
    assert coverage_ratio(CheckPlan(feasible=True, tasks=single)) == pytest.approx(0.2)


def test_coverage_ratio_ignores_commandless_tasks():
    entries = {
        "a": TaskPlan(task_id="a", num_commands=4, k_star=2),
        "quiet": TaskPlan(task_id="quiet", num_commands=0, k_star=0),
    }
    assert coverage_ratio(CheckPlan(feasible=True, tasks=entries)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        coverage_ratio(CheckPlan(feasible=True, tasks={}))


def _underloaded_batch():
    out = []
    for i in range(4):
        t = make_task(tid=f"t{i}", wcet=1, period=1000, n=3, n_min=1, overhead=1)
        out.append(make_taskset([t]))
    return out


def test_acceptance_ratio_underloaded_batch():
    batch = _underloaded_batch()
    for scheme in ("unsecured", "fine-grain", "scate"):
        assert acceptance_ratio(batch, scheme) == 1.0


def test_acceptance_ratio_scheme_ordering():
    # checking all N commands alone busts the deadline, minimum load fits
    squeezed = make_taskset([make_task(wcet=10, period=25, n=4, n_min=1, overhead=5)])
    batch = _underloaded_batch() + [squeezed]
    u = acceptance_ratio(batch, "unsecured")
    s = acceptance_ratio(batch, "scate")
    f = acceptance_ratio(batch, "fine-grain")
    assert u >= s >= f
    assert u == 1.0
    assert f == pytest.approx(0.8)


def test_acceptance_ratio_finegrain_collapse():
    # N * C^o alone exceeds all slack: fine-grain 0.0, unsecured 1.0
    batch = [make_taskset([make_task(wcet=10, period=30, n=4, n_min=0, overhead=10)])
             for _ in range(3)]
    assert acceptance_ratio(batch, "unsecured") == 1.0
    assert acceptance_ratio(batch, "fine-grain") == 0.0
    assert acceptance_ratio(batch, "scate") == 1.0


def test_acceptance_ratio_counts_unplaceable_as_unschedulable():
    batch = _underloaded_batch() + [None]
    assert acceptance_ratio(batch, "unsecured") == pytest.approx(0.8)
    with pytest.raises(ValueError):
        acceptance_ratio([], "unsecured")
    with pytest.raises(ValueError):
        acceptance_ratio(batch, "paranoid")
