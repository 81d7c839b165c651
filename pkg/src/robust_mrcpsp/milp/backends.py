from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .model import MAXIMIZE, MipModel
from .simplex import INFEASIBLE, UNBOUNDED, solve_lp

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
FEASIBLE = "feasible"
NO_SOLUTION = "no_solution"  # stopped at the time limit without an incumbent
ERROR = "error"
STATUSES = (OPTIMAL, FEASIBLE, INFEASIBLE, UNBOUNDED, NO_SOLUTION, ERROR)


class BackendUnavailable(RuntimeError):
    pass


@dataclass
class SolveOutcome:
    status: str
    objective: float | None = None
    values: list | None = None
    seconds: float = 0.0
    best_bound: float | None = None
    backend: str = ""
    params: dict = field(default_factory=dict)
    message: str = ""

    @property
    def has_solution(self) -> bool:
        return self.status in (OPTIMAL, FEASIBLE) and self.values is not None

    def value(self, model: MipModel, name: str) -> float:
        return self.values[model.var(name)]


class SolverBackend:
    """Interface every MIP backend implements."""

    name = "abstract"
    supports_time_limit = True
    supports_warm_start = False
    concurrent_safe = True

    def available(self) -> bool:
        return True

    def solve(self, model: MipModel, time_limit: float | None = None, warm_start: Mapping[int, float] | None = None) -> SolveOutcome:
        raise NotImplementedError

    def describe(self) -> dict:
        return {
            "backend": self.name,
            "supports_time_limit": self.supports_time_limit,
            "supports_warm_start": self.supports_warm_start,
        }


def solve(model: MipModel, backend: SolverBackend, time_limit: float | None = None, warm_start=None) -> SolveOutcome:
    """Run ``model`` on ``backend``; raises :class:`BackendUnavailable` if it cannot run."""
    if not backend.available():
        raise BackendUnavailable(f"backend {backend.name!r} is not available")
    if warm_start is not None and not backend.supports_warm_start:
        warm_start = None
    return backend.solve(model, time_limit=time_limit, warm_start=warm_start)


# -- HiGHS ------------------------------------------------------------------------


# Primal heuristics that cost more than they save on many small, repeated solves.
LIGHT_HEURISTICS = {
    "mip_heuristic_run_rins": False,
    "mip_heuristic_run_rens": False,
    "mip_heuristic_run_root_reduced_cost": False,
    "mip_heuristic_run_zi_round": False,
    "mip_heuristic_run_shifting": False,
}


class HighsBackend(SolverBackend):
    """HiGHS through its ``highspy`` bindings, with a zero relative MIP gap.

    ``options`` are passed straight to HiGHS, e.g. :data:`LIGHT_HEURISTICS`.
    """

    name = "highs"
    supports_warm_start = True

    def __init__(
        self,
        threads: int = 1,
        mip_rel_gap: float = 0.0,
        presolve: str = "choose",
        output: bool = False,
        options: dict | None = None,
    ):
        self.threads = threads
        self.mip_rel_gap = mip_rel_gap
        self.presolve = presolve
        self.output = output
        self.options = dict(options or {})

    def available(self) -> bool:
        try:
            import highspy  # noqa: F401
        except ImportError:
            return False
        return True

    def describe(self) -> dict:
        d = super().describe()
        d.update(threads=self.threads, mip_rel_gap=self.mip_rel_gap, presolve=self.presolve, **self.options)
        return d

    def solve(self, model: MipModel, time_limit=None, warm_start=None) -> SolveOutcome:
        import highspy
        import numpy as np

        start = time.perf_counter()
        h = highspy.Highs()
        h.setOptionValue("output_flag", self.output)
        h.setOptionValue("threads", self.threads)
        h.setOptionValue("mip_rel_gap", self.mip_rel_gap)
        h.setOptionValue("presolve", self.presolve)
        for key, val in self.options.items():
            h.setOptionValue(key, val)
        if time_limit is not None:
            h.setOptionValue("time_limit", max(float(time_limit), 0.01))

        nvar = model.num_variables
        lp = highspy.HighsLp()
        lp.num_col_ = nvar
        lp.num_row_ = model.num_constraints
        sign = -1.0 if model.sense == MAXIMIZE else 1.0
        cost = np.zeros(nvar)
        for v, c in model.objective.items():
            cost[v] = sign * float(c)
        lp.col_cost_ = cost
        inf = highspy.kHighsInf
        lp.col_lower_ = np.array([float(v.lb) if v.lb != -math.inf else -inf for v in model.variables])
        lp.col_upper_ = np.array([float(v.ub) if v.ub != math.inf else inf for v in model.variables])
        lo, hi, starts, index, value = [], [], [0], [], []
        for con in model.constraints:
            rhs = float(con.rhs)
            lo.append(rhs if con.sense != "<=" else -inf)
            hi.append(rhs if con.sense != ">=" else inf)
            for v, c in con.terms:
                index.append(v)
                value.append(float(c))
            starts.append(len(index))
        lp.row_lower_ = np.array(lo)
        lp.row_upper_ = np.array(hi)
        lp.a_matrix_.format_ = highspy.MatrixFormat.kRowwise
        lp.a_matrix_.num_col_ = nvar
        lp.a_matrix_.num_row_ = model.num_constraints
        lp.a_matrix_.start_ = np.array(starts, dtype=np.int32)
        lp.a_matrix_.index_ = np.array(index, dtype=np.int32)
        lp.a_matrix_.value_ = np.array(value)
        if model.is_mip:
            lp.integrality_ = [
                highspy.HighsVarType.kInteger if v.integer else highspy.HighsVarType.kContinuous for v in model.variables
            ]
        h.passModel(lp)
        if warm_start:
            sol = highspy.HighsSolution()
            col = [0.0] * nvar
            for k, x in warm_start.items():
                col[k] = float(x)
            sol.col_value = col
            h.setSolution(sol)
        h.run()
        seconds = time.perf_counter() - start

        status = h.getModelStatus()
        info = h.getInfo()
        ms = highspy.HighsModelStatus
        has_primal = info.primal_solution_status == 2
        values = list(h.getSolution().col_value) if has_primal else None
        obj = sign * info.objective_function_value if has_primal else None
        if model.is_mip:
            bound = sign * info.mip_dual_bound if math.isfinite(info.mip_dual_bound) else None
        else:
            bound = obj
        params = self.describe()
        if status == ms.kOptimal:
            return SolveOutcome(OPTIMAL, obj, values, seconds, obj if bound is None else bound, self.name, params)
        if status == ms.kInfeasible:
            return SolveOutcome(INFEASIBLE, seconds=seconds, backend=self.name, params=params)
        if status in (ms.kUnbounded, ms.kUnboundedOrInfeasible):
            return SolveOutcome(UNBOUNDED, seconds=seconds, backend=self.name, params=params)
        if status in (ms.kTimeLimit, ms.kIterationLimit, ms.kInterrupt, ms.kSolutionLimit):
            if has_primal:
                return SolveOutcome(FEASIBLE, obj, values, seconds, bound, self.name, params)
            return SolveOutcome(NO_SOLUTION, seconds=seconds, best_bound=bound, backend=self.name, params=params)
        return SolveOutcome(ERROR, seconds=seconds, backend=self.name, params=params, message=str(status))


# -- bundled branch and bound ---------------------------------------------------


class BranchAndBoundBackend(SolverBackend):
    """Exact LP-based branch and bound over the rational simplex.

    Best-bound node selection, branching on the most fractional integer
    variable.  Zero optimality gap.  Practical up to a few hundred
    variables.
    """

    name = "bnb"

    def __init__(self, node_limit: int | None = None):
        self.node_limit = node_limit

    def solve(self, model: MipModel, time_limit=None, warm_start=None) -> SolveOutcome:
        start = time.perf_counter()
        deadline = None if time_limit is None else start + time_limit
        sign = -1 if model.sense == MAXIMIZE else 1
        n = model.num_variables
        c = [0] * n
        for v, coef in model.objective.items():
            c[v] = sign * Fraction(coef) if not isinstance(coef, float) else sign * coef
        rows = [(dict(con.terms), con.sense, con.rhs) for con in model.constraints]
        ints = [v.index for v in model.variables if v.integer]
        lb0 = [v.lb if not v.integer or v.lb == -math.inf else math.ceil(v.lb) for v in model.variables]
        ub0 = [v.ub if not v.integer or v.ub == math.inf else math.floor(v.ub) for v in model.variables]
        params = self.describe()

        incumbent, best = None, None
        counter = itertools.count()
        root = solve_lp(c, rows, lb0, ub0)
        if root.status == INFEASIBLE:
            return SolveOutcome(INFEASIBLE, seconds=time.perf_counter() - start, backend=self.name, params=params)
        if root.status == UNBOUNDED:
            return SolveOutcome(UNBOUNDED, seconds=time.perf_counter() - start, backend=self.name, params=params)
        heap = [(root.objective, next(counter), lb0, ub0, root)]
        nodes = 0
        timed_out = False
        while heap:
            bound, _, lb, ub, res = heapq.heappop(heap)
            if best is not None and bound >= best:
                heap.clear()
                break
            nodes += 1
            if (deadline is not None and time.perf_counter() > deadline) or (
                self.node_limit is not None and nodes > self.node_limit
            ):
                heapq.heappush(heap, (bound, next(counter), lb, ub, res))
                timed_out = True
                break
            frac_var, frac_dist = None, Fraction(0)
            for j in ints:
                x = res.x[j]
                dist = min(x - math.floor(x), math.ceil(x) - x)
                if dist > frac_dist:
                    frac_var, frac_dist = j, dist
            if frac_var is None:
                if best is None or res.objective < best:
                    best, incumbent = res.objective, res.x
                continue
            x = res.x[frac_var]
            for new_lb, new_ub in ((lb[frac_var], math.floor(x)), (math.ceil(x), ub[frac_var])):
                if new_lb > new_ub:
                    continue
                clb, cub = list(lb), list(ub)
                clb[frac_var], cub[frac_var] = new_lb, new_ub
                child = solve_lp(c, rows, clb, cub)
                if child.status == UNBOUNDED:
                    return SolveOutcome(UNBOUNDED, seconds=time.perf_counter() - start, backend=self.name, params=params)
                if child.status != INFEASIBLE and (best is None or child.objective < best):
                    heapq.heappush(heap, (child.objective, next(counter), clb, cub, child))

        seconds = time.perf_counter() - start
        params["nodes"] = nodes
        if timed_out:
            open_bound = min(h[0] for h in heap) if heap else best
            bound = open_bound if best is None else min(open_bound, best)
            if incumbent is None:
                return SolveOutcome(NO_SOLUTION, seconds=seconds, best_bound=float(sign * bound), backend=self.name, params=params)
            return SolveOutcome(
                FEASIBLE, float(sign * best), [float(v) for v in incumbent], seconds, float(sign * bound), self.name, params
            )
        if incumbent is None:
            return SolveOutcome(INFEASIBLE, seconds=seconds, backend=self.name, params=params)
        obj = float(sign * best)
        return SolveOutcome(OPTIMAL, obj, [float(v) for v in incumbent], seconds, obj, self.name, params)


BACKENDS = {"highs": HighsBackend, "bnb": BranchAndBoundBackend}


def make_backend(name: str = "highs", **options) -> SolverBackend:
    """Instantiate a backend by configuration name (``highs`` or ``bnb``)."""
    try:
        cls = BACKENDS[name]
    except KeyError:
        raise BackendUnavailable(f"unknown backend {name!r}; choose from {sorted(BACKENDS)}") from None
    backend = cls(**options)
    if not backend.available():
        raise BackendUnavailable(f"backend {name!r} is not installed")
    return backend


def default_backend() -> SolverBackend:
    highs = HighsBackend()
    return highs if highs.available() else BranchAndBoundBackend()
