"""Summary tables, performance profiles and gap curves from run records."""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, fields
from statistics import mean
from typing import Iterable, Sequence

from .records import RunRecord


@dataclass
class SummaryRow:
    instance_set: str
    gamma: str  # an integer, or "avg" for the per-set average row
    method: str
    count: int
    pct_solved: float
    mean_gap: float | None
    mean_seconds: float
    mean_iterations: float | None = None
    mean_iteration_seconds: float | None = None


@dataclass(frozen=True)
class ProfilePoint:
    method: str
    tau: float
    pct: float


@dataclass(frozen=True)
class GapPoint:
    method: str
    gap: float
    pct: float


def _mean(values) -> float | None:
    values = [v for v in values if v is not None]
    return mean(values) if values else None


def _summary_row(set_name, gamma, method, recs: Sequence[RunRecord]) -> SummaryRow:
    feasible = [r.gap for r in recs if r.has_solution and r.gap is not None]
    row = SummaryRow(
        set_name,
        str(gamma),
        method,
        len(recs),
        100.0 * sum(r.solved for r in recs) / len(recs),
        _mean(feasible),
        mean(r.seconds for r in recs),
    )
    if method == "benders":
        row.mean_iterations = _mean([r.iterations for r in recs])
        row.mean_iteration_seconds = _mean([r.iteration_seconds for r in recs])
    return row


def summarize(records: Iterable[RunRecord]) -> list[SummaryRow]:
    """Per (set, gamma, method) statistics, then one averaged row per (set, method).

    Gaps are averaged over runs that found a feasible solution; times
    include unsolved runs at their recorded time limit.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to summarize")
    groups: dict = defaultdict(list)
    for r in records:
        groups[(r.instance_set, r.gamma, r.method)].append(r)
    rows = []
    sets = sorted({k[0] for k in groups})
    methods = [m for m in ("compact", "benders") if any(k[2] == m for k in groups)]
    methods += sorted({k[2] for k in groups} - set(methods))
    for s in sets:
        gammas = sorted({k[1] for k in groups if k[0] == s})
        for g in gammas:
            for m in methods:
                if (s, g, m) in groups:
                    rows.append(_summary_row(s, g, m, groups[(s, g, m)]))
        for m in methods:
            per = [row for row in rows if row.instance_set == s and row.method == m and row.gamma != "avg"]
            if not per:
                continue
            rows.append(
                SummaryRow(
                    s, "avg", m, sum(p.count for p in per),
                    mean(p.pct_solved for p in per),
                    _mean([p.mean_gap for p in per]),
                    mean(p.mean_seconds for p in per),
                    _mean([p.mean_iterations for p in per]),
                    _mean([p.mean_iteration_seconds for p in per]),
                )
            )
    return rows


def objective_means(records: Iterable[RunRecord]) -> list[dict]:
    """Mean optimal objective per (set, gamma).

    Only instances solved to optimality at every swept gamma (by some method)
    take part, so columns stay comparable across gamma.
    """
    optimal: dict = defaultdict(dict)
    gammas_of: dict = defaultdict(set)
    for r in records:
        gammas_of[r.instance_set].add(r.gamma)
        if r.solved and r.objective is not None:
            optimal[(r.instance_set, r.instance)][r.gamma] = r.objective
    rows = []
    for s in sorted(gammas_of):
        gammas = sorted(gammas_of[s])
        complete = [vals for (ss, _), vals in optimal.items() if ss == s and all(g in vals for g in gammas)]
        for g in gammas:
            rows.append(
                {
                    "instance_set": s,
                    "gamma": g,
                    "instances": len(complete),
                    "mean_objective": mean(v[g] for v in complete) if complete else None,
                }
            )
    return rows


def performance_profile(records: Iterable[RunRecord], ratio_cap: float | None = None) -> list[ProfilePoint]:
    """Share of problems each method solves within a factor ``tau`` of the fastest.

    A problem is one (set, instance, gamma).  Unsolved runs get ratio
    ``ratio_cap`` (default: the largest finite ratio) and never count as
    solved, so each curve ends at that method's solved percentage.
    """
    runs: dict = defaultdict(dict)
    for r in records:
        runs[(r.instance_set, r.instance, r.gamma)][r.method] = r
    methods = sorted({m for per in runs.values() for m in per})
    if len(methods) < 2:
        raise ValueError("a performance profile needs at least two methods")
    ratios: dict = {m: [] for m in methods}
    for per in runs.values():
        times = [r.seconds for r in per.values() if r.solved]
        best = min(times) if times else None
        for m in methods:
            r = per.get(m)
            if r is not None and r.solved and best is not None:
                ratios[m].append(r.seconds / best if best > 0 else 1.0)
            else:
                ratios[m].append(None)
    finite = [x for xs in ratios.values() for x in xs if x is not None]
    cap = ratio_cap if ratio_cap is not None else max(finite, default=1.0)
    if finite and cap < max(finite):
        raise ValueError("ratio cap below the largest observed ratio")
    taus = sorted({1.0, cap, *finite})
    total = len(runs)
    points = []
    for m in methods:
        solved = sorted(x for x in ratios[m] if x is not None)
        for tau in taus:
            within = sum(1 for x in solved if x <= tau)
            points.append(ProfilePoint(m, tau, 100.0 * within / total))
    return points


def gap_curve(records: Iterable[RunRecord]) -> list[GapPoint]:
    """Percentage of runs per method whose gap is at most each threshold.

    Runs without a feasible solution stay in the denominator but are never
    counted.
    """
    records = list(records)
    if not records:
        raise ValueError("no records for a gap curve")
    by_method: dict = defaultdict(list)
    for r in records:
        by_method[r.method].append(r)
    thresholds = sorted({0.0, *(r.gap for r in records if r.has_solution and r.gap is not None)})
    points = []
    for m in sorted(by_method):
        recs = by_method[m]
        gaps = [r.gap for r in recs if r.has_solution and r.gap is not None]
        for g in thresholds:
            points.append(GapPoint(m, g, 100.0 * sum(1 for x in gaps if x <= g + 1e-12) / len(recs)))
    return points


@dataclass
class MonotonicityRow:
    instance: str
    method: str
    gammas: tuple[int, ...]
    objectives: tuple[int, ...]
    nondecreasing: bool
    concave: bool


def monotonicity(records: Iterable[RunRecord]) -> list[MonotonicityRow]:
    """Per instance and method: do optimal objectives rise with gamma, with shrinking steps?"""
    series: dict = defaultdict(dict)
    for r in records:
        if r.solved and r.objective is not None:
            series[(r.instance, r.method)][r.gamma] = r.objective
    rows = []
    for (inst, method), vals in sorted(series.items()):
        if len(vals) < 2:
            continue
        gs = tuple(sorted(vals))
        objs = tuple(vals[g] for g in gs)
        steps = [objs[k + 1] - objs[k] for k in range(len(objs) - 1)]
        rows.append(
            MonotonicityRow(
                inst, method, gs, objs,
                all(s >= 0 for s in steps),
                all(steps[k + 1] <= steps[k] for k in range(len(steps) - 1)),
            )
        )
    return rows


def rows_to_csv(rows: Sequence, columns: Sequence[str] | None = None) -> str:
    """Render dataclass instances or dicts as CSV text."""
    buf = io.StringIO()
    if not rows:
        return ""
    first = rows[0]
    if columns is None:
        columns = list(first) if isinstance(first, dict) else [f.name for f in fields(first)]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        d = row if isinstance(row, dict) else asdict(row)
        out = []
        for c in columns:
            v = d[c]
            if v is None:
                out.append("")
            elif isinstance(v, float):
                out.append(f"{v:.4f}" if math.isfinite(v) else str(v))
            elif isinstance(v, tuple):
                out.append(" ".join(map(str, v)))
            else:
                out.append(str(v))
        writer.writerow(out)
    return buf.getvalue()
