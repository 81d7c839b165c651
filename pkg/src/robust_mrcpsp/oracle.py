"""Brute-force ground truth for tiny instances, plus a seeded instance generator.

The search is deliberately simple: every non-renewable-feasible mode vector
is tried, and sufficient selections are reached by repeatedly ordering one
pair inside a minimal forbidden set.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass

from .instance import Instance, make_instance, nonrenewable_feasible
from .network import (
    ExtendedRelation,
    base_relation,
    check_gamma,
    find_forbidden_set,
    transitive_closure,
    worst_case_longest_path,
)

MAX_ACTIVITIES = 6
MAX_MODE_COMBINATIONS = 64


class OracleLimitError(ValueError):
    """Instance too large for exhaustive search."""


class NoFeasibleSolution(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    makespan: int
    modes: tuple[int, ...]
    selection: frozenset[tuple[int, int]]  # arcs added on top of the project network
    relation: ExtendedRelation  # closure of network plus selection
    explored: int = 0


def _usable(instance: Instance, i: int, m: int) -> bool:
    req = instance.mode(i, m).renewable_req
    return all(r <= c for r, c in zip(req, instance.renewable_caps))


def mode_vectors(instance: Instance):
    """Mode vectors that respect non-renewable budgets and per-mode capacities."""
    choices = [
        [m for m in range(instance.num_modes(i)) if _usable(instance, i, m)] for i in range(instance.num_activities)
    ]
    for combo in itertools.product(*choices):
        if nonrenewable_feasible(instance, combo):
            yield combo


def brute_force_solve(instance: Instance, gamma: int) -> OracleResult:
    """Exact robust optimum by exhaustive search.

    For each mode vector, a node is a closed extended relation.  If it still
    holds a forbidden set, any sufficient selection containing it must order
    some pair of that set, so branching over those ordered pairs covers all
    of them.  Adding arcs never shortens a path, so a node whose worst case
    already reaches the incumbent is dropped.
    """
    n = instance.n
    combos = math.prod(instance.num_modes(i) for i in range(instance.num_activities))
    if n > MAX_ACTIVITIES or combos > MAX_MODE_COMBINATIONS:
        raise OracleLimitError(
            f"oracle limited to n <= {MAX_ACTIVITIES} and {MAX_MODE_COMBINATIONS} mode combinations "
            f"(got n={n}, {combos})"
        )
    gamma = check_gamma(gamma, n)
    base = base_relation(instance)
    best: list = [math.inf, None, None, None]
    explored = 0

    for modes in mode_vectors(instance):
        seen: set = set()
        stack = [(base, frozenset())]
        while stack:
            rel, added = stack.pop()
            if rel.succ in seen:
                continue
            seen.add(rel.succ)
            explored += 1
            value = worst_case_longest_path(instance, modes, rel, gamma).makespan
            if value >= best[0]:
                continue
            forbidden = find_forbidden_set(instance, modes, rel)
            if forbidden is None:
                best[:] = [value, modes, rel, added]
                continue
            members = sorted(forbidden)
            for a, b in itertools.permutations(members, 2):
                child = transitive_closure(list(rel.pairs()) + [(a, b)], instance.num_activities)
                stack.append((child, added | {(a, b)}))

    if best[1] is None:
        raise NoFeasibleSolution("no mode vector admits a sufficient selection")
    return OracleResult(int(best[0]), tuple(best[1]), best[3], best[2], explored)


# -- random tiny instances -----------------------------------------------------


def random_instance(
    rng: random.Random,
    n: int | None = None,
    max_modes: int = 2,
    renewables: int | None = None,
    edge_prob: float = 0.3,
    max_duration: int = 6,
    name: str = "",
) -> Instance:
    """Small random instance with one non-renewable resource.

    Capacities are drawn so that resource conflicts are likely and at least
    the cheapest mode vector meets the non-renewable budget.
    """
    n = n if n is not None else rng.randint(3, 5)
    nk = renewables if renewables is not None else rng.randint(1, 2)
    caps = [rng.randint(3, 6) for _ in range(nk)]
    acts = []
    cheapest = 0
    for _ in range(n):
        modes = []
        for _ in range(rng.randint(1, max_modes)):
            d = rng.randint(1, max_duration)
            dev = rng.randint(0, max(1, d - 1))
            r = tuple(rng.randint(0, c) for c in caps)
            rp = (rng.randint(0, 4),)
            modes.append((d, dev, r, rp))
        cheapest += min(m[3][0] for m in modes)
        acts.append(modes)
    budget = cheapest + rng.randint(0, 3)
    edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if rng.random() < edge_prob]
    return make_instance(acts, edges, caps, (budget,), name=name)


def random_battery(seed: int, count: int) -> list[Instance]:
    """Deterministic list of tiny instances for cross-checking solvers."""
    rng = random.Random(seed)
    return [random_instance(rng, name=f"tiny_{seed}_{k}") for k in range(count)]


# -- worked example ----------------------------------------------------------


def example_instance() -> Instance:
    """Five activities, one renewable resource with capacity 4.

    Activities 2 and 5 have two modes.  Nominal optimum 11.  With two
    delays the robust optimum is 15, reached with every activity in its
    first mode plus the extra arc (3, 2); delaying activity 1 together with
    any other activity realises it.
    """
    return make_instance(
        [
            [(2, 2, (2,))],
            [(2, 1, (3,)), (6, 5, (2,))],
            [(5, 1, (2,))],
            [(3, 3, (1,))],
            [(3, 1, (2,)), (1, 0, (4,))],
        ],
        [(1, 2), (1, 3), (2, 5), (3, 4)],
        [4],
        name="example",
    )
