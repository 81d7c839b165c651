"""Compact MILP for the two-stage robust MRCPSP.

Start-time variables ``S[i][g]`` live on ``gamma + 1`` stacked copies of the
project network (level ``g`` = ``g`` activities already delayed), so the
adversarial longest path is dualized straight into the first-stage model.
The first stage is a mode assignment ``x``, a transitively closed
precedence relation ``y`` and resource flows ``f`` certifying that ``y``
leaves no forbidden set.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

from .instance import Instance, makespan_upper_bound, validate
from .milp import EQ, GE, LE, MipModel, SolveOutcome, SolverBackend, solve
from .milp.backends import FEASIBLE, OPTIMAL
from .network import (
    CycleError,
    ExtendedRelation,
    WorstCaseResult,
    base_relation,
    check_gamma,
    transitive_closure,
    worst_case_longest_path,
)

log = logging.getLogger(__name__)


class ExtractionError(RuntimeError):
    """Rounded solver output does not form a valid first-stage solution."""


class ModelBugError(RuntimeError):
    pass


@dataclass(frozen=True)
class FirstStageSolution:
    modes: tuple[int, ...]
    relation: ExtendedRelation
    flows: dict = field(default_factory=dict, compare=False)

    def selection(self, instance: Instance) -> list[tuple[int, int]]:
        """Added precedences: the relation minus the closure of the project edges."""
        base = base_relation(instance)
        return [p for p in self.relation.pairs() if p not in base]


def flow_capacity(instance: Instance, i: int, k: int) -> int:
    """Renewable amount activity ``i`` passes on; dummies hand over the full capacity."""
    if i in (0, instance.sink):
        return instance.renewable_caps[k]
    return max(m.renewable_req[k] for m in instance.activities[i].modes)


def flow_demand_terms(instance: Instance, x, i: int, k: int):
    """``(terms, constant)`` for the amount of ``k`` activity ``i`` consumes."""
    if i in (0, instance.sink):
        return [], instance.renewable_caps[k]
    return [(x[i][m], mode.renewable_req[k]) for m, mode in enumerate(instance.activities[i].modes)], 0


@dataclass
class Formulation:
    """A built model plus index maps back to the problem variables.

    ``y[(i, j)]`` is a variable index, or the int 0/1 when the pair is fixed
    by the project network and was left out of the model.
    """

    model: MipModel
    instance: Instance
    gamma: int
    S: list[list[int]]
    x: list[list[int]]
    y: dict
    f: dict
    eta: int | None = None
    big_m: int = 0
    cuts: int = 0


class _Const(int):
    """Marker for pairs fixed outside the model."""


ONE, ZERO = _Const(1), _Const(0)


def _is_const(v) -> bool:
    return isinstance(v, _Const)


def _add_first_stage(
    model: MipModel, instance: Instance, reduce: bool
) -> tuple[list[list[int]], dict, dict]:
    """Mode, sequencing and flow variables with their linking constraints."""
    size = instance.num_activities
    sink = instance.sink
    V = range(size)
    closure = base_relation(instance)

    x = [[model.add_binary(f"x_{i}_{m}") for m in range(instance.num_modes(i))] for i in V]

    y: dict = {}
    for i in V:
        for j in V:
            if reduce:
                if (i, j) in closure or (i == j == sink):
                    y[(i, j)] = ONE
                    continue
                if i == j or (j, i) in closure:
                    y[(i, j)] = ZERO
                    continue
            y[(i, j)] = model.add_binary(f"y_{i}_{j}")

    def yterm(i, j, coef=1):
        v = y[(i, j)]
        return ([], coef * int(v)) if _is_const(v) else ([(v, coef)], 0)

    if not reduce:
        for i, j in sorted(instance.precedences) + [(sink, sink)]:
            model.add_constraint(f"fix_{i}_{j}", [(y[(i, j)], 1)], EQ, 1)

    for i in V:
        for j in V:
            if i < j:
                ti, ci = yterm(i, j)
                tj, cj = yterm(j, i)
                if reduce and not ti and not tj:
                    continue
                model.add_constraint(f"asym_{i}_{j}", ti + tj, LE, 1 - ci - cj)

    for i in V:
        for j in V:
            if i == j:
                continue
            for p in V:
                if p == i or p == j:
                    continue
                # y_ij >= y_ip + y_pj - 1
                if reduce:
                    vij, vip, vpj = y[(i, j)], y[(i, p)], y[(p, j)]
                    if (_is_const(vij) and vij == 1) or (_is_const(vip) and vip == 0) or (_is_const(vpj) and vpj == 0):
                        continue
                t1, c1 = yterm(i, j)
                t2, c2 = yterm(i, p, -1)
                t3, c3 = yterm(p, j, -1)
                model.add_constraint(f"trans_{i}_{j}_{p}", t1 + t2 + t3, GE, -1 - c1 - c2 - c3)

    f: dict = {}
    for k in instance.renewables:
        for i in V:
            if i == sink:
                continue
            for j in V:
                if j == 0:
                    continue
                cap = min(flow_capacity(instance, i, k), flow_capacity(instance, j, k))
                if reduce and (cap == 0 or i == j or (_is_const(y[(i, j)]) and y[(i, j)] == 0)):
                    continue
                fv = model.add_variable(f"f_{i}_{j}_{k}")
                f[(i, j, k)] = fv
                t, c = yterm(i, j, -cap)
                model.add_constraint(f"flowcap_{i}_{j}_{k}", [(fv, 1)] + t, LE, -c)
        for j in V:
            if j == 0:
                continue
            dem, const = flow_demand_terms(instance, x, j, k)
            inflow = [(f[(i, j, k)], 1) for i in V if (i, j, k) in f]
            model.add_constraint(f"flowin_{j}_{k}", inflow + [(v, -r) for v, r in dem], EQ, const)
        for i in V:
            if i == sink:
                continue
            dem, const = flow_demand_terms(instance, x, i, k)
            outflow = [(f[(i, j, k)], 1) for j in V if (i, j, k) in f]
            model.add_constraint(f"flowout_{i}_{k}", outflow + [(v, -r) for v, r in dem], EQ, const)

    for i in V:
        model.add_constraint(f"onemode_{i}", [(v, 1) for v in x[i]], EQ, 1)

    for k in instance.nonrenewables:
        terms = [
            (x[i][m], mode.nonrenewable_req[k])
            for i in V
            for m, mode in enumerate(instance.activities[i].modes)
            if mode.nonrenewable_req[k]
        ]
        model.add_constraint(f"nonren_{k}", terms, LE, instance.nonrenewable_caps[k])
    return x, y, f


def _add_precedence_levels(
    model: MipModel,
    instance: Instance,
    S: list[list[int]],
    x,
    y,
    levels: int,
    big_m: int,
    reduce: bool,
    aggregate_modes: bool,
) -> None:
    """Big-M start-time links within each level and from level g to g+1."""
    size = instance.num_activities
    sink = instance.sink

    def rows(i, j, src, dst, worst):
        v = y[(i, j)]
        if _is_const(v):
            if v == 0:
                if reduce:
                    return
                ycoef, yconst = [], 0
            else:
                ycoef, yconst = [], 1
        else:
            ycoef, yconst = [(v, -big_m)], 0
        # S_dst - S_src - d x_im - M y_ij >= -M  (constant y folded into rhs)
        rhs = -big_m + big_m * yconst
        modes = instance.activities[i].modes
        if aggregate_modes:
            terms = [(S[dst[0]][dst[1]], 1), (S[src[0]][src[1]], -1)]
            terms += [(x[i][m], -(md.worst_duration if worst else md.nominal_duration)) for m, md in enumerate(modes)]
            yield terms + ycoef, rhs, None
        else:
            for m, md in enumerate(modes):
                d = md.worst_duration if worst else md.nominal_duration
                terms = [(S[dst[0]][dst[1]], 1), (S[src[0]][src[1]], -1), (x[i][m], -d)]
                yield terms + ycoef, rhs, m

    for g in range(levels):
        for i in range(size):
            for j in range(size):
                if i == j and (reduce or i == sink):
                    continue
                for terms, rhs, m in rows(i, j, (i, g), (j, g), False):
                    tag = "a" if m is None else m
                    model.add_constraint(f"nom_{i}_{j}_{tag}_{g}", terms, GE, rhs)
    for g in range(levels - 1):
        for i in range(size):
            for j in range(size):
                if i == j and reduce and i != sink:
                    continue
                for terms, rhs, m in rows(i, j, (i, g), (j, g + 1), True):
                    tag = "a" if m is None else m
                    model.add_constraint(f"dev_{i}_{j}_{tag}_{g}", terms, GE, rhs)


def build_compact(
    instance: Instance, gamma: int, reduce: bool = True, aggregate_modes: bool = False
) -> Formulation:
    """Compact robust model with budget ``gamma``.

    ``reduce`` drops variables and rows whose value is forced by the
    project network (pairs ordered by precedence, self pairs, zero-capacity
    flows).  ``aggregate_modes`` writes one big-M row per pair using the
    mode-weighted duration instead of one per mode.
    """
    gamma = check_gamma(gamma, instance.n)
    model = MipModel(name=f"compact_{instance.name or 'instance'}_G{gamma}")
    big_m = makespan_upper_bound(instance)
    size = instance.num_activities
    S = [[model.add_variable(f"S_{i}_{g}") for g in range(gamma + 1)] for i in range(size)]
    x, y, f = _add_first_stage(model, instance, reduce)
    model.add_constraint("source_start", [(S[0][0], 1)], EQ, 0)
    _add_precedence_levels(model, instance, S, x, y, gamma + 1, big_m, reduce, aggregate_modes)
    model.set_objective([(S[instance.sink][gamma], 1)])
    return Formulation(model, instance, gamma, S, x, y, f, big_m=big_m)


def extract_first_stage(form: Formulation, values: Sequence[float]) -> FirstStageSolution:
    """Round ``x`` and ``y`` at 0.5 and verify the relation is closed and acyclic."""
    inst = form.instance
    modes = tuple(max(range(len(row)), key=lambda m: values[row[m]]) for row in form.x)
    for i, row in enumerate(form.x):
        if values[row[modes[i]]] < 0.5:
            raise ExtractionError(f"no mode of activity {i} is selected")
    pairs = []
    for (i, j), v in form.y.items():
        if i == j:
            continue
        on = int(v) == 1 if _is_const(v) else values[v] > 0.5
        if on:
            pairs.append((i, j))
    try:
        rel = transitive_closure(pairs, inst.num_activities)
    except CycleError as exc:
        raise ExtractionError(f"rounded precedence relation is cyclic: {exc}") from exc
    if len(rel) != len(set(pairs)):
        raise ExtractionError("rounded precedence relation is not transitively closed")
    flows = {key: values[v] for key, v in form.f.items() if values[v] > 1e-9}
    return FirstStageSolution(modes, rel, flows)


def solve_compact(
    instance: Instance,
    gamma: int,
    backend: SolverBackend,
    time_limit: float | None = None,
    reduce: bool = True,
    aggregate_modes: bool = False,
    tol: float = 1e-3,
) -> tuple[FirstStageSolution | None, WorstCaseResult | None, SolveOutcome]:
    """Solve the compact model and re-evaluate the extracted solution exactly.

    The returned worst case comes from the longest-path evaluation, not the
    solver's floating-point objective.
    """
    report = validate(instance)
    if not report.ok:
        raise ValueError("invalid instance: " + "; ".join(report.violations))
    form = build_compact(instance, gamma, reduce=reduce, aggregate_modes=aggregate_modes)
    outcome = solve(form.model, backend, time_limit=time_limit)
    if outcome.status not in (OPTIMAL, FEASIBLE):
        if outcome.status == "infeasible":
            raise ModelBugError(f"compact model infeasible on a valid instance {instance.name!r}")
        return None, None, outcome
    first = extract_first_stage(form, outcome.values)
    worst = worst_case_longest_path(instance, first.modes, first.relation, form.gamma)
    if outcome.status == OPTIMAL and abs(worst.makespan - outcome.objective) > tol:
        raise ExtractionError(
            f"solver objective {outcome.objective} disagrees with exact worst case {worst.makespan}"
        )
    return first, worst, outcome


def solution_to_dict(instance: Instance, first: FirstStageSolution, worst: WorstCaseResult, **extra) -> dict:
    """JSON-ready view; modes are 1-based as in PSPLIB files."""
    return {
        "instance": instance.name,
        **extra,
        "modes": [m + 1 for m in first.modes],
        "selection": [list(p) for p in first.selection(instance)],
        "flows": [[i, j, k, round(v, 9)] for (i, j, k), v in sorted(first.flows.items())],
        "worst_case_makespan": worst.makespan,
        "delayed_activities": worst.delayed,
        "critical_path": list(worst.path),
    }


def solution_to_json(instance: Instance, first: FirstStageSolution, worst: WorstCaseResult, **extra) -> str:
    return json.dumps(solution_to_dict(instance, first, worst, **extra), indent=2) + "\n"
