"""Leader-follower game over command subsets and its LP solution.

The checker (leader) commits to a distribution over K-subsets of the N
commands; the attacker (follower) picks any subset of commands to tamper
with, knowing that distribution.  Cell scores: full-overlap means the
attack is caught (reward +M, cost -M), zero overlap with a non-empty
attack means a clean miss (reward -M, cost +M), and partial overlap is
scored by weight fractions over the union of both subsets.

For each attacker strategy l the checker's best committed distribution is
a linear program: maximize expected reward, subject to l being the
attacker's best response (highest expected cost), probabilities summing
to one, and a strict positivity floor epsilon so every subset keeps a
nonzero selection chance.  The solved strategy is the distribution of the
feasible l with the highest objective (lowest index on ties).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .lp import LinearProgram, LpSolution, solve_lp
from .model import Task

DEFAULT_BIG_M = 100.0
DEFAULT_EPSILON = 1e-6

# Objectives closer than this are tied; ties break toward the lower index.
OBJECTIVE_TIE_TOL = 1e-9

# 2^N attacker subsets; beyond this the enumeration is refused outright.
MAX_COMMANDS = 20

Strategy = tuple[int, ...]  # 1-based command indices, ascending


class GameInfeasibleError(RuntimeError):
    """Raised when no attacker strategy admits a feasible checker LP."""


def enumerate_designer_strategies(n: int, k: int) -> list[Strategy]:
    """All C(n, k) k-subsets of commands {1..n}, lexicographically ordered."""
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    return list(combinations(range(1, n + 1), k))


def enumerate_attacker_strategies(n: int) -> list[Strategy]:
    """All 2^n command subsets in binary-counting order; index 0 is no attack."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > MAX_COMMANDS:
        raise ValueError(f"n={n} exceeds the 2^N enumeration cap ({MAX_COMMANDS})")
    return [tuple(c + 1 for c in range(n) if (mask >> c) & 1) for mask in range(1 << n)]


def reward_cost(
    designer: Strategy, attacker: Strategy, weights: tuple[float, ...], big_m: float = DEFAULT_BIG_M
) -> tuple[float, float]:
    """Score one (checker, attacker) strategy pair.

    An empty attacker subset means no attack and falls under the general
    weight-fraction formula (reward 1, cost 0); only a non-empty attack
    that dodges every checked command counts as a miss.
    """
    checked = frozenset(designer)
    attacked = frozenset(attacker)
    if not checked:
        raise ValueError("designer strategy must be non-empty")
    if checked == attacked:
        return big_m, -big_m
    if attacked and not (checked & attacked):
        return -big_m, big_m
    denom = sum(weights[c - 1] for c in checked | attacked)
    reward = sum(weights[c - 1] for c in checked) / denom
    cost = sum(weights[c - 1] for c in attacked) / denom
    return reward, cost


@dataclass(frozen=True)
class GameInstance:
    num_commands: int
    budget: int
    weights: tuple[float, ...]
    designer_strategies: tuple[Strategy, ...]
    attacker_strategies: tuple[Strategy, ...]
    reward: np.ndarray  # |X| x |Q|
    cost: np.ndarray    # |X| x |Q|
    big_m: float


@dataclass(frozen=True)
class GameSolution:
    attacker_strategy: int            # l*, index into attacker_strategies
    probabilities: tuple[float, ...]  # over designer_strategies
    objective: float
    statuses: tuple[str, ...]         # per-l LP status


def build_game_from_weights(
    weights: tuple[float, ...], k: int, big_m: float = DEFAULT_BIG_M
) -> GameInstance:
    n = len(weights)
    if n < 1:
        raise ValueError("need at least one command")
    if not 1 <= k < n:
        raise ValueError(f"k={k} must satisfy 1 <= k < {n} (k = n needs no game)")
    if big_m <= 0:
        raise ValueError("big_m must be positive")
    designer = enumerate_designer_strategies(n, k)
    attacker = enumerate_attacker_strategies(n)
    reward = np.empty((len(designer), len(attacker)))
    cost = np.empty_like(reward)
    for j, xj in enumerate(designer):
        for l, ql in enumerate(attacker):
            reward[j, l], cost[j, l] = reward_cost(xj, ql, weights, big_m)
    return GameInstance(
        num_commands=n,
        budget=k,
        weights=tuple(weights),
        designer_strategies=tuple(designer),
        attacker_strategies=tuple(attacker),
        reward=reward,
        cost=cost,
        big_m=big_m,
    )


def build_game(task: Task, k: int, big_m: float = DEFAULT_BIG_M) -> GameInstance:
    if task.num_commands < 1:
        raise ValueError(f"task {task.id} issues no commands")
    if k < task.min_checks:
        raise ValueError(f"task {task.id}: k={k} below min_checks={task.min_checks}")
    return build_game_from_weights(task.weights, k, big_m)


def lp_for_attacker_strategy(game: GameInstance, l: int, epsilon: float = DEFAULT_EPSILON) -> LinearProgram:
    """The checker's LP pinned to attacker strategy l.

    max  sum_j x_j * reward[j, l]
    s.t. sum_j x_j * cost[j, l] >= sum_j x_j * cost[j, l']   for all l' != l
         sum_j x_j = 1
         x_j >= epsilon
    """
    num_q = len(game.attacker_strategies)
    if not 0 <= l < num_q:
        raise ValueError(f"attacker strategy index {l} out of range")
    if epsilon <= 0:
        raise ValueError("epsilon must be strictly positive")
    num_x = len(game.designer_strategies)
    constraints: list[tuple[list[float], str, float]] = []
    for lp in range(num_q):
        if lp == l:
            continue
        constraints.append(((game.cost[:, l] - game.cost[:, lp]).tolist(), ">=", 0.0))
    constraints.append(([1.0] * num_x, "=", 1.0))
    return LinearProgram(
        objective=game.reward[:, l].tolist(),
        constraints=constraints,
        lower_bounds=[epsilon] * num_x,
    )


def solve_game(game: GameInstance, epsilon: float = DEFAULT_EPSILON) -> GameSolution:
    """Solve the LP for every attacker strategy and keep the best feasible one."""
    best_l = -1
    best: LpSolution | None = None
    statuses: list[str] = []
    for l in range(len(game.attacker_strategies)):
        sol = solve_lp(lp_for_attacker_strategy(game, l, epsilon))
        statuses.append(sol.status)
        if sol.optimal and (best is None or sol.objective > best.objective + OBJECTIVE_TIE_TOL):
            best = sol
            best_l = l
    if best is None:
        raise GameInfeasibleError("no attacker strategy admits a feasible checker LP")
    return GameSolution(
        attacker_strategy=best_l,
        probabilities=best.x,
        objective=best.objective,
        statuses=tuple(statuses),
    )


def apply_detection_accuracy(game: GameInstance, p: float) -> GameInstance:
    """Rescale scores for a checker that only flags a caught attack with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("detection accuracy must be within [0, 1]")
    miss = 1.0 - p
    return replace(game, reward=game.reward * (1.0 - miss), cost=game.cost * (1.0 + miss))


def marginal_check_probability(game: GameInstance, solution: GameSolution) -> tuple[float, ...]:
    """Per-command probability of being checked in one job under the solution."""
    marginals = [0.0] * game.num_commands
    for xj, prob in zip(game.designer_strategies, solution.probabilities):
        for c in xj:
            marginals[c - 1] += prob
    return tuple(marginals)
