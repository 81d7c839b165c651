"""Project data model for the robust multi-mode RCPSP.

Activities are indexed densely ``0..n+1``; ``0`` is the dummy source and
``n+1`` the dummy sink.  All time and resource quantities are integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence


@dataclass(frozen=True)
class Mode:
    nominal_duration: int
    max_deviation: int = 0
    renewable_req: tuple[int, ...] = ()
    nonrenewable_req: tuple[int, ...] = ()

    @property
    def worst_duration(self) -> int:
        return self.nominal_duration + self.max_deviation


@dataclass(frozen=True)
class Activity:
    modes: tuple[Mode, ...]


@dataclass(frozen=True)
class Instance:
    activities: tuple[Activity, ...]
    precedences: frozenset[tuple[int, int]]
    renewable_caps: tuple[int, ...]
    nonrenewable_caps: tuple[int, ...] = ()
    name: str = ""

    @property
    def n(self) -> int:
        return len(self.activities) - 2

    @property
    def sink(self) -> int:
        return len(self.activities) - 1

    @property
    def num_activities(self) -> int:
        return len(self.activities)

    @property
    def renewables(self) -> range:
        return range(len(self.renewable_caps))

    @property
    def nonrenewables(self) -> range:
        return range(len(self.nonrenewable_caps))

    def mode(self, i: int, m: int) -> Mode:
        return self.activities[i].modes[m]

    def num_modes(self, i: int) -> int:
        return len(self.activities[i].modes)

    def with_modes(self, activities: Sequence[Activity]) -> "Instance":
        return replace(self, activities=tuple(activities))


def make_instance(
    modes: Sequence[Sequence[tuple]],
    precedences: Iterable[tuple[int, int]],
    renewable_caps: Sequence[int],
    nonrenewable_caps: Sequence[int] = (),
    name: str = "",
    add_dummies: bool = True,
    link_dummies: bool = True,
) -> Instance:
    """Build an instance from compact per-activity mode tuples.

    Each mode is ``(d_nominal, d_deviation, renewable_reqs, nonrenewable_reqs)``
    where the trailing fields may be omitted.  With ``add_dummies`` the
    given activities are numbered ``1..n`` and zero-duration source/sink
    activities are added; ``link_dummies`` then connects the source to
    every activity without a predecessor and every activity without a
    successor to the sink.
    """
    nk, nkp = len(renewable_caps), len(nonrenewable_caps)

    def to_mode(t: tuple) -> Mode:
        d = int(t[0])
        dev = int(t[1]) if len(t) > 1 else 0
        r = tuple(int(v) for v in t[2]) if len(t) > 2 else (0,) * nk
        rp = tuple(int(v) for v in t[3]) if len(t) > 3 else (0,) * nkp
        return Mode(d, dev, r, rp)

    acts = [Activity(tuple(to_mode(t) for t in ms)) for ms in modes]
    edges = {(int(i), int(j)) for i, j in precedences}
    if add_dummies:
        dummy = Activity((Mode(0, 0, (0,) * nk, (0,) * nkp),))
        acts = [dummy] + acts + [dummy]
        if link_dummies:
            sink = len(acts) - 1
            has_pred = {j for _, j in edges}
            has_succ = {i for i, _ in edges}
            for a in range(1, sink):
                if a not in has_pred:
                    edges.add((0, a))
                if a not in has_succ:
                    edges.add((a, sink))
            if sink == 1:
                edges.add((0, 1))
    return Instance(
        activities=tuple(acts),
        precedences=frozenset(edges),
        renewable_caps=tuple(int(c) for c in renewable_caps),
        nonrenewable_caps=tuple(int(c) for c in nonrenewable_caps),
        name=name,
    )


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return not self.violations

    @property
    def ok(self) -> bool:
        return not self.violations

    def has(self, kind: str) -> bool:
        return any(v.startswith(kind + ":") for v in self.violations)


def _find_cycle(num: int, edges: Iterable[tuple[int, int]]) -> list[int] | None:
    succ: dict[int, list[int]] = {v: [] for v in range(num)}
    for i, j in edges:
        if 0 <= i < num and 0 <= j < num:
            succ[i].append(j)
    color = [0] * num
    parent = [-1] * num
    for root in range(num):
        if color[root]:
            continue
        stack = [(root, iter(sorted(succ[root])))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[v] = 2
                stack.pop()
                continue
            if color[nxt] == 1:
                cycle = [nxt]
                u = v
                while u != nxt:
                    cycle.append(u)
                    u = parent[u]
                return cycle[::-1]
            if color[nxt] == 0:
                color[nxt] = 1
                parent[nxt] = v
                stack.append((nxt, iter(sorted(succ[nxt]))))
    return None


def _reachable(num: int, edges: Iterable[tuple[int, int]], start: int, reverse: bool = False) -> set[int]:
    adj: dict[int, list[int]] = {v: [] for v in range(num)}
    for i, j in edges:
        if reverse:
            i, j = j, i
        if i in adj:
            adj[i].append(j)
    seen = {start}
    todo = [start]
    while todo:
        v = todo.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def validate(instance: Instance) -> ValidationReport:
    """Collect every violated structural invariant of ``instance``."""
    report = ValidationReport()
    out = report.violations
    num = instance.num_activities
    if num < 2:
        out.append("size: an instance needs at least the two dummy activities")
        return report
    sink = instance.sink
    nk, nkp = len(instance.renewable_caps), len(instance.nonrenewable_caps)

    for i, j in sorted(instance.precedences):
        if not (0 <= i < num and 0 <= j < num):
            out.append(f"edge: ({i},{j}) references an unknown activity")
        elif i == j:
            out.append(f"cycle: self-loop on activity {i}")
    cycle = _find_cycle(num, instance.precedences)
    if cycle is not None:
        out.append("cycle: " + " -> ".join(map(str, cycle + cycle[:1])))

    from_source = _reachable(num, instance.precedences, 0)
    to_sink = _reachable(num, instance.precedences, sink, reverse=True)
    for a in range(num):
        if a not in from_source:
            out.append(f"unreachable: activity {a} is not preceded by the source")
        if a not in to_sink:
            out.append(f"unreachable: activity {a} does not precede the sink")

    for c in instance.renewable_caps + instance.nonrenewable_caps:
        if c < 0:
            out.append(f"capacity: negative availability {c}")

    for i, act in enumerate(instance.activities):
        if not act.modes:
            out.append(f"modes: activity {i} has no modes")
            continue
        for m, mode in enumerate(act.modes):
            if len(mode.renewable_req) != nk or len(mode.nonrenewable_req) != nkp:
                out.append(f"shape: activity {i} mode {m} has wrong resource vector length")
                continue
            if mode.nominal_duration < 0 or mode.max_deviation < 0:
                out.append(f"duration: activity {i} mode {m} has a negative duration")
            if any(r < 0 for r in mode.renewable_req + mode.nonrenewable_req):
                out.append(f"demand: activity {i} mode {m} has a negative requirement")
            for k, (r, cap) in enumerate(zip(mode.renewable_req, instance.renewable_caps)):
                if r > cap:
                    out.append(f"capacity: activity {i} mode {m} needs {r} of resource {k}, only {cap} available")
        if i in (0, sink):
            mode = act.modes[0]
            if (
                len(act.modes) != 1
                or mode.nominal_duration
                or mode.max_deviation
                or any(mode.renewable_req)
                or any(mode.nonrenewable_req)
            ):
                out.append(f"dummy: activity {i} must have one all-zero mode")
    return report


def makespan_upper_bound(instance: Instance) -> int:
    """Sum over activities of the longest worst-case mode duration."""
    return sum(max(m.worst_duration for m in act.modes) for act in instance.activities)


def max_flow_bound(instance: Instance, i: int, j: int, k: int) -> int:
    """Largest amount of renewable ``k`` that can pass from ``i`` to ``j``."""
    return min(
        max(m.renewable_req[k] for m in instance.activities[i].modes),
        max(m.renewable_req[k] for m in instance.activities[j].modes),
    )


def nonrenewable_feasible(instance: Instance, modes: Sequence[int]) -> bool:
    for k in instance.nonrenewables:
        used = sum(instance.mode(i, m).nonrenewable_req[k] for i, m in enumerate(modes))
        if used > instance.nonrenewable_caps[k]:
            return False
    return True


def check_mode_vector(instance: Instance, modes: Sequence[int]) -> None:
    if len(modes) != instance.num_activities:
        raise ValueError(f"mode vector has length {len(modes)}, expected {instance.num_activities}")
    for i, m in enumerate(modes):
        if not 0 <= m < instance.num_modes(i):
            raise ValueError(f"activity {i} has no mode {m}")


def durations(instance: Instance, modes: Sequence[int], delays: Sequence[float] | None = None) -> list:
    """Realized per-activity durations for a mode vector and delay vector."""
    out = []
    for i, m in enumerate(modes):
        mode = instance.mode(i, m)
        if delays is None or not delays[i]:
            out.append(mode.nominal_duration)
        else:
            out.append(mode.nominal_duration + delays[i] * mode.max_deviation)
    return out
