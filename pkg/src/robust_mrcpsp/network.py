"""Precedence-network algorithms over extended (closed) precedence relations."""

from __future__ import annotations

import itertools
import numbers
from dataclasses import dataclass
from typing import Iterable, Sequence

from .instance import Instance
from .instance import durations as realized_durations


class CycleError(ValueError):
    pass


@dataclass(frozen=True)
class ExtendedRelation:
    """Transitively closed strict order on activities ``0..size-1``.

    ``succ[i]`` is a bitmask of every activity that ``i`` must precede.
    """

    size: int
    succ: tuple[int, ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], size: int) -> "ExtendedRelation":
        return transitive_closure(pairs, size)

    def __contains__(self, pair: tuple[int, int]) -> bool:
        i, j = pair
        return bool(self.succ[i] >> j & 1)

    def __len__(self) -> int:
        return sum(bin(s).count("1") for s in self.succ)

    def __iter__(self):
        return iter(self.pairs())

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.size) for j in _bits(self.succ[i])]

    def successors(self, i: int) -> list[int]:
        return list(_bits(self.succ[i]))

    def predecessors(self, j: int) -> list[int]:
        return [i for i in range(self.size) if self.succ[i] >> j & 1]

    def comparable(self, i: int, j: int) -> bool:
        return bool(self.succ[i] >> j & 1 or self.succ[j] >> i & 1)

    def topological_order(self) -> list[int]:
        # in a closed DAG every predecessor has strictly fewer predecessors
        npred = [0] * self.size
        for i in range(self.size):
            for j in _bits(self.succ[i]):
                npred[j] += 1
        return sorted(range(self.size), key=lambda v: (npred[v], v))

    def matrix(self) -> list[list[bool]]:
        return [[bool(self.succ[i] >> j & 1) for j in range(self.size)] for i in range(self.size)]

    def add(self, i: int, j: int) -> "ExtendedRelation":
        """Closure of this relation plus the pair ``(i, j)``."""
        return transitive_closure(self.pairs() + [(i, j)], self.size)

    def is_transitive(self) -> bool:
        for i in range(self.size):
            reach = self.succ[i]
            for p in _bits(reach):
                if self.succ[p] & ~reach:
                    return False
        return True

    def is_irreflexive(self) -> bool:
        return all(not (self.succ[i] >> i & 1) for i in range(self.size))


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def transitive_closure(edges: Iterable[tuple[int, int]], size: int) -> ExtendedRelation:
    """Smallest transitive relation containing ``edges``; raises on cycles."""
    adj = [0] * size
    indeg = [0] * size
    for i, j in set(edges):
        if i == j:
            raise CycleError(f"self-loop on activity {i}")
        if not adj[i] >> j & 1:
            adj[i] |= 1 << j
            indeg[j] += 1
    order = []
    ready = [v for v in range(size) if indeg[v] == 0]
    while ready:
        v = ready.pop()
        order.append(v)
        for w in _bits(adj[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    if len(order) != size:
        stuck = sorted(v for v in range(size) if indeg[v] > 0)
        raise CycleError(f"precedence relation has a cycle through {stuck}")
    reach = [0] * size
    for v in reversed(order):
        r = adj[v]
        for w in _bits(adj[v]):
            r |= reach[w]
        reach[v] = r
    return ExtendedRelation(size, tuple(reach))


def base_relation(instance: Instance) -> ExtendedRelation:
    return transitive_closure(instance.precedences, instance.num_activities)


# -- forbidden sets -------------------------------------------------------


def find_forbidden_set(
    instance: Instance, modes: Sequence[int], relation: ExtendedRelation
) -> frozenset[int] | None:
    """Smallest antichain whose renewable demand exceeds some capacity.

    Returns ``None`` when ``relation`` is a sufficient selection for
    ``modes``.  Antichains are searched by increasing cardinality, so the
    returned set is minimal.
    """
    caps = instance.renewable_caps
    demand = [instance.mode(i, m).renewable_req for i, m in enumerate(modes)]
    cand = [i for i in range(instance.num_activities) if any(demand[i])]
    if not cand:
        return None
    # pairwise incomparability among candidates, as bitmasks over positions
    free = []
    for a, i in enumerate(cand):
        mask = 0
        for b, j in enumerate(cand):
            if a != b and not relation.comparable(i, j):
                mask |= 1 << b
        free.append(mask)

    def forbidden(members: list[int]) -> bool:
        return any(sum(demand[cand[p]][k] for p in members) > caps[k] for k in range(len(caps)))

    def search(chosen: list[int], allowed: int, size: int) -> list[int] | None:
        if len(chosen) == size:
            return chosen if forbidden(chosen) else None
        need = size - len(chosen)
        while allowed and bin(allowed).count("1") >= need:
            low = allowed & -allowed
            p = low.bit_length() - 1
            allowed ^= low
            found = search(chosen + [p], allowed & free[p], size)
            if found is not None:
                return found
        return None

    for size in range(1, len(cand) + 1):
        found = search([], (1 << len(cand)) - 1, size)
        if found is not None:
            return frozenset(cand[p] for p in found)
    return None


def is_sufficient_selection(instance: Instance, modes: Sequence[int], relation: ExtendedRelation) -> bool:
    return find_forbidden_set(instance, modes, relation) is None


# -- schedules --------------------------------------------------------------


@dataclass(frozen=True)
class ScheduleResult:
    starts: tuple
    makespan: float


def earliest_start_schedule(
    instance: Instance, modes: Sequence[int], relation: ExtendedRelation, durations: Sequence
) -> ScheduleResult:
    """CPM forward pass: every activity starts as soon as its predecessors end."""
    size = relation.size
    starts = [0] * size
    for j in relation.topological_order():
        best = 0
        for i in relation.predecessors(j):
            best = max(best, starts[i] + durations[i])
        starts[j] = best
    return ScheduleResult(tuple(starts), starts[size - 1])


# -- worst case -----------------------------------------------------------


@dataclass(frozen=True)
class WorstCaseResult:
    makespan: int
    delays: tuple[int, ...]
    path: tuple[int, ...]

    @property
    def delayed(self) -> list[int]:
        return [i for i, x in enumerate(self.delays) if x]

    @property
    def path_edges(self) -> list[tuple[int, int]]:
        return list(zip(self.path, self.path[1:]))


def check_gamma(gamma, n: int) -> int:
    """Validate the delay budget; values above ``n`` are clamped."""
    if isinstance(gamma, bool) or not isinstance(gamma, numbers.Real):
        raise TypeError(f"budget must be an integer, got {gamma!r}")
    if gamma != int(gamma):
        raise ValueError(f"budget must be integer-valued, got {gamma}")
    gamma = int(gamma)
    if gamma < 0:
        raise ValueError("budget must be nonnegative")
    return min(gamma, n)


def worst_case_longest_path(
    instance: Instance, modes: Sequence[int], relation: ExtendedRelation, gamma: int
) -> WorstCaseResult:
    """Exact adversarial makespan over the budgeted uncertainty set.

    Longest path on ``gamma + 1`` stacked copies of the network, where
    moving up a copy means the activity just left took its worst-case
    duration.  ``best[j][g]`` is the latest start of ``j`` with at most
    ``g`` delays spent.  Ties prefer the lower-indexed predecessor, then no
    delay.
    """
    size = relation.size
    g_max = check_gamma(gamma, size - 2)
    nominal = [instance.mode(i, m).nominal_duration for i, m in enumerate(modes)]
    dev = [instance.mode(i, m).max_deviation for i, m in enumerate(modes)]
    best = [[0] * (g_max + 1) for _ in range(size)]
    back: list[list[tuple[int, bool] | None]] = [[None] * (g_max + 1) for _ in range(size)]
    for j in relation.topological_order():
        preds = relation.predecessors(j)
        if not preds:
            continue
        for g in range(g_max + 1):
            val, arg = None, None
            for i in preds:
                v = best[i][g] + nominal[i]
                if val is None or v > val:
                    val, arg = v, (i, False)
                if g > 0:
                    v = best[i][g - 1] + nominal[i] + dev[i]
                    if v > val:
                        val, arg = v, (i, True)
            best[j][g] = val
            back[j][g] = arg

    sink = size - 1
    delays = [0] * size
    path = [sink]
    j, g = sink, g_max
    while back[j][g] is not None:
        i, delayed = back[j][g]
        if delayed:
            delays[i] = 1
            g -= 1
        path.append(i)
        j = i
    return WorstCaseResult(best[sink][g_max], tuple(delays), tuple(reversed(path)))


def delay_subsets(candidates: Sequence[int], gamma: int):
    """All subsets of ``candidates`` with at most ``gamma`` members."""
    for r in range(min(gamma, len(candidates)) + 1):
        yield from itertools.combinations(candidates, r)


def worst_case_by_enumeration(
    instance: Instance, modes: Sequence[int], relation: ExtendedRelation, gamma: int
) -> int:
    """Reference evaluation: try every binary delay set of size at most ``gamma``."""
    size = relation.size
    g_max = check_gamma(gamma, size - 2)
    worst = 0
    for subset in delay_subsets(range(1, size - 1), g_max):
        xi = [0] * size
        for i in subset:
            xi[i] = 1
        d = realized_durations(instance, modes, xi)
        worst = max(worst, earliest_start_schedule(instance, modes, relation, d).makespan)
    return worst


# -- resource audit ---------------------------------------------------------


def resource_feasible(
    instance: Instance, modes: Sequence[int], relation: ExtendedRelation, durations: Sequence
) -> bool:
    """Simulate the earliest-start schedule and check renewable usage over time."""
    sched = earliest_start_schedule(instance, modes, relation, durations)
    events: dict = {}
    for i, m in enumerate(modes):
        if durations[i] <= 0:
            continue
        req = instance.mode(i, m).renewable_req
        if not any(req):
            continue
        s, f = sched.starts[i], sched.starts[i] + durations[i]
        events.setdefault(s, []).append((1, req))
        events.setdefault(f, []).append((-1, req))
    usage = [0] * len(instance.renewable_caps)
    for t in sorted(events):
        for sign, req in events[t]:
            for k, r in enumerate(req):
                usage[k] += sign * r
        if any(u > c for u, c in zip(usage, instance.renewable_caps)):
            return False
    return True
