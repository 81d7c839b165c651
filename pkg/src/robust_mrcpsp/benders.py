"""Benders decomposition with a nominal compact master problem.

The master picks modes and a sufficient selection using nominal durations
only; the subproblem prices the worst case of that choice; each round adds
an optimality cut on the critical path.  The loop stops when the best
master value meets the best evaluated worst case.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Sequence

from .compact import (
    FirstStageSolution,
    Formulation,
    _add_first_stage,
    _add_precedence_levels,
    _is_const,
    extract_first_stage,
)
from .instance import Instance, makespan_upper_bound, validate
from .milp import EQ, GE, LE, MAXIMIZE, MipModel, SolveOutcome, SolverBackend, solve
from .milp.backends import FEASIBLE, NO_SOLUTION, OPTIMAL, default_backend
from .network import ExtendedRelation, WorstCaseResult, check_gamma, worst_case_longest_path

log = logging.getLogger(__name__)

DEFAULT_TIME_LIMIT = 7200.0


@dataclass(frozen=True)
class CutRecord:
    path: tuple[tuple[int, int], ...]
    modes: tuple[int, ...]
    value: int
    lb: int
    iteration: int = 0


@dataclass
class IterationRecord:
    t: int
    lb: float
    ub: float
    eta: int | None
    value: int | None
    modes: tuple[int, ...] | None
    path: tuple[int, ...] | None
    master_seconds: float = 0.0
    sub_seconds: float = 0.0


@dataclass
class BendersState:
    lb: float = -math.inf
    ub: float = math.inf
    t: int = 1
    cuts: list[CutRecord] = field(default_factory=list)
    trace: list[IterationRecord] = field(default_factory=list)
    status: str = "running"
    message: str = ""
    seconds: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def completed_iterations(self) -> int:
        """Rounds whose cut made it into the master."""
        return len(self.cuts)

    @property
    def gap(self) -> float | None:
        if not math.isfinite(self.ub) or not math.isfinite(self.lb) or self.ub == 0:
            return None
        return 100.0 * (self.ub - self.lb) / self.ub


# Big-M rows let HiGHS return objectives a few 1e-5 off an integral optimum.
INTEGRALITY_TOL = 1e-3


def _as_int(value: float, what: str) -> int:
    r = round(value)
    if abs(value - r) > INTEGRALITY_TOL:
        raise ArithmeticError(f"{what} {value} is not integral")
    return int(r)


# -- master -----------------------------------------------------------------


def build_master(instance: Instance, cuts: Sequence[CutRecord] = (), reduce: bool = True) -> Formulation:
    """Single-level compact model with objective ``eta`` and the given cuts."""
    model = MipModel(name=f"master_{instance.name or 'instance'}")
    big_m = makespan_upper_bound(instance)
    size = instance.num_activities
    S = [[model.add_variable(f"S_{i}")] for i in range(size)]
    eta = model.add_variable("eta")
    x, y, f = _add_first_stage(model, instance, reduce)
    model.add_constraint("eta_makespan", [(eta, 1), (S[instance.sink][0], -1)], GE, 0)
    model.add_constraint("source_start", [(S[0][0], 1)], EQ, 0)
    _add_precedence_levels(model, instance, S, x, y, 1, big_m, reduce, False)
    model.set_objective([(eta, 1)])
    form = Formulation(model, instance, 0, S, x, y, f, eta=eta, big_m=big_m)
    for cut in cuts:
        add_cut(form, cut)
    return form


def cut_terms(form: Formulation, record: CutRecord) -> tuple[list[tuple[int, int]], int]:
    """Cut as integer row ``terms >= rhs``, scaled by 3 to clear the 1/3.

    Unscaled: eta >= D * sum_e[(y_e + x_i + x_j)/3 - (3 - y_e - x_i - x_j)]
    - D * (|path| - 1) + LB with D = V - LB.  Each bracket equals
    (4 s_e - 9) / 3 for s_e = y_e + x_i + x_j.
    """
    D = record.value - record.lb
    if D < 0:
        raise ValueError("cut value below its lower bound")
    L = len(record.path)
    terms: dict[int, int] = {form.eta: 3}
    rhs = -12 * D * L + 3 * D + 3 * record.lb
    for i, j in record.path:
        yv = form.y[(i, j)]
        if _is_const(yv):
            rhs += 4 * D * int(yv)
        else:
            terms[yv] = terms.get(yv, 0) - 4 * D
        for a in (i, j):
            xv = form.x[a][record.modes[a]]
            terms[xv] = terms.get(xv, 0) - 4 * D
    return [(v, c) for v, c in terms.items() if c != 0], rhs


def cut_rhs(record: CutRecord, y_on_path: Sequence[int], x_match: Sequence[tuple[int, int]]):
    """Unscaled right-hand side at a given 0/1 point, as an exact fraction.

    ``y_on_path[e]`` is y on the e-th path edge and ``x_match[e]`` holds the
    two ``x`` values of its endpoints under the recorded modes.
    """
    D = record.value - record.lb
    total = Fraction(0)
    for ye, (xi, xj) in zip(y_on_path, x_match):
        s = ye + xi + xj
        total += Fraction(s, 3) - (3 - s)
    return D * total - D * (len(record.path) - 1) + record.lb


def add_cut(form: Formulation, record: CutRecord) -> None:
    terms, rhs = cut_terms(form, record)
    form.cuts += 1
    form.model.add_constraint(f"cut_{form.cuts}", terms, GE, rhs)


# -- subproblem ---------------------------------------------------------------


@dataclass
class SubproblemModel:
    model: MipModel
    alpha: dict
    w: dict
    xi: list[int]


def build_subproblem_milp(
    instance: Instance, modes: Sequence[int], relation: ExtendedRelation, gamma: int
) -> SubproblemModel:
    """Path-flow MILP for the adversarial longest path over the closed relation."""
    gamma = check_gamma(gamma, instance.n)
    size = instance.num_activities
    sink = instance.sink
    model = MipModel(name="subproblem")
    arcs = relation.pairs()
    alpha = {a: model.add_binary(f"a_{a[0]}_{a[1]}") for a in arcs}
    w = {a: model.add_variable(f"w_{a[0]}_{a[1]}") for a in arcs}
    xi = [model.add_variable(f"xi_{i}", 0, 1) for i in range(size)]
    model.add_constraint("into_sink", [(alpha[(i, j)], 1) for i, j in arcs if j == sink], EQ, 1)
    model.add_constraint("out_of_source", [(alpha[(i, j)], 1) for i, j in arcs if i == 0], EQ, 1)
    for v in range(1, sink):
        terms = [(alpha[(i, j)], 1) for i, j in arcs if i == v] + [(alpha[(i, j)], -1) for i, j in arcs if j == v]
        model.add_constraint(f"conserve_{v}", terms, EQ, 0)
    for a in arcs:
        model.add_constraint(f"w_xi_{a[0]}_{a[1]}", [(w[a], 1), (xi[a[0]], -1)], LE, 0)
        model.add_constraint(f"w_a_{a[0]}_{a[1]}", [(w[a], 1), (alpha[a], -1)], LE, 0)
    model.add_constraint("budget", [(v, 1) for v in xi], LE, gamma)
    obj = []
    for i, j in arcs:
        mode = instance.mode(i, modes[i])
        obj.append((alpha[(i, j)], mode.nominal_duration))
        obj.append((w[(i, j)], mode.max_deviation))
    model.set_objective(obj, MAXIMIZE)
    return SubproblemModel(model, alpha, w, xi)


def _delays_on_path(instance: Instance, modes, path: Sequence[int], gamma: int) -> tuple[int, ...]:
    dev = [(instance.mode(i, modes[i]).max_deviation, i) for i in path]
    chosen = sorted((d for d in dev if d[0] > 0), key=lambda t: (-t[0], t[1]))[:gamma]
    delays = [0] * instance.num_activities
    for _, i in chosen:
        delays[i] = 1
    return tuple(delays)


def solve_subproblem(
    instance: Instance,
    modes: Sequence[int],
    relation: ExtendedRelation,
    gamma: int,
    engine: str = "dp",
    backend: SolverBackend | None = None,
) -> WorstCaseResult:
    """Worst-case makespan and critical path of a fixed first-stage choice."""
    if engine == "dp":
        return worst_case_longest_path(instance, modes, relation, gamma)
    if engine != "milp":
        raise ValueError(f"unknown subproblem engine {engine!r}")
    gamma = check_gamma(gamma, instance.n)
    sub = build_subproblem_milp(instance, modes, relation, gamma)
    out = solve(sub.model, backend or default_backend())
    if out.status != OPTIMAL:
        raise RuntimeError(f"subproblem MILP ended with status {out.status}")
    value = _as_int(out.objective, "subproblem value")
    nxt = {i: j for (i, j), v in sub.alpha.items() if out.values[v] > 0.5}
    path = [0]
    while path[-1] != instance.sink:
        path.append(nxt[path[-1]])
    return WorstCaseResult(value, _delays_on_path(instance, modes, path, gamma), tuple(path))


# -- main loop ----------------------------------------------------------------


def run_benders(
    instance: Instance,
    gamma: int,
    backend: SolverBackend,
    time_limit: float | None = DEFAULT_TIME_LIMIT,
    engine: str = "dp",
    audit: bool = False,
    warm_start: bool = True,
    max_iterations: int | None = None,
) -> tuple[FirstStageSolution | None, WorstCaseResult | None, BendersState]:
    """Iterate master and subproblem until the bounds meet or time runs out.

    The master is not re-solved from scratch: cuts are appended to one
    model.  With ``audit`` the subproblem is solved by both engines and
    they must agree.
    """
    report = validate(instance)
    if not report.ok:
        raise ValueError("invalid instance: " + "; ".join(report.violations))
    gamma = check_gamma(gamma, instance.n)
    start = time.perf_counter()
    state = BendersState()
    master = build_master(instance)
    incumbent: tuple[FirstStageSolution, WorstCaseResult] | None = None
    incumbent_values = None

    def remaining() -> float | None:
        if time_limit is None:
            return None
        return time_limit - (time.perf_counter() - start)

    while state.ub > state.lb:
        left = remaining()
        if left is not None and left <= 0:
            state.status = "time_limit"
            break
        if max_iterations is not None and state.t > max_iterations:
            state.status = "iteration_limit"
            break
        ws = None
        if warm_start and incumbent_values is not None and backend.supports_warm_start:
            ws = dict(enumerate(incumbent_values))
        t0 = time.perf_counter()
        out: SolveOutcome = solve(master.model, backend, time_limit=left, warm_start=ws)
        master_seconds = time.perf_counter() - t0
        if out.status != OPTIMAL:
            if out.status in (FEASIBLE, NO_SOLUTION):
                if out.best_bound is not None:
                    state.lb = max(state.lb, math.ceil(out.best_bound - 1e-6))
                state.status = "time_limit"
            else:
                state.status = "error"
                state.message = f"master ended with status {out.status}"
            break
        eta = _as_int(out.objective, "master objective")
        state.lb = max(state.lb, eta)
        first = extract_first_stage(master, out.values)
        if state.lb >= state.ub:
            state.trace.append(IterationRecord(state.t, state.lb, state.ub, eta, None, first.modes, None, master_seconds))
            break

        t0 = time.perf_counter()
        worst = solve_subproblem(instance, first.modes, first.relation, gamma, engine, backend)
        if audit:
            other = solve_subproblem(
                instance, first.modes, first.relation, gamma, "milp" if engine == "dp" else "dp", backend
            )
            if other.makespan != worst.makespan:
                raise AssertionError(f"subproblem engines disagree: {worst.makespan} vs {other.makespan}")
        sub_seconds = time.perf_counter() - t0
        if worst.makespan < state.ub:
            state.ub = worst.makespan
            incumbent = (first, worst)
            values = list(out.values)
            values[master.eta] = float(worst.makespan)
            incumbent_values = values
        record = CutRecord(tuple(worst.path_edges), first.modes, worst.makespan, int(state.lb), state.t)
        add_cut(master, record)
        state.cuts.append(record)
        state.trace.append(
            IterationRecord(state.t, state.lb, state.ub, eta, worst.makespan, first.modes, worst.path, master_seconds, sub_seconds)
        )
        state.t += 1

    if state.status == "running":
        state.status = "optimal"
    state.seconds = time.perf_counter() - start
    if incumbent is None:
        return None, None, state
    return incumbent[0], incumbent[1], state


TRACE_COLUMNS = ["t", "LB", "UB", "eta", "V", "modes", "path", "master_seconds", "subproblem_seconds"]


def _fmt_bound(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else "-inf"
    return str(int(v))


def trace_to_csv(state: BendersState) -> str:
    """Per-iteration trace; modes are 1-based for the real activities only."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for r in state.trace:
        modes = ",".join(str(m + 1) for m in r.modes[1:-1]) if r.modes else "-"
        path = "->".join(map(str, r.path)) if r.path else "-"
        writer.writerow(
            [r.t, _fmt_bound(r.lb), _fmt_bound(r.ub), _fmt_bound(r.eta), _fmt_bound(r.value), modes, path,
             f"{r.master_seconds:.4f}", f"{r.sub_seconds:.4f}"]
        )
    return buf.getvalue()
