"""Dense two-phase primal simplex in exact rational arithmetic.

Bland's rule throughout, so it terminates on degenerate problems.  Meant
for the small relaxations solved by the bundled branch-and-bound backend;
cost grows with rows x columns per pivot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass
class LpResult:
    status: str
    x: list[Fraction] | None = None
    objective: Fraction | None = None


def _frac(v) -> Fraction:
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**9) if not v.is_integer() else Fraction(int(v))
    return Fraction(v)


def solve_lp(
    c: Sequence,
    rows: Sequence[tuple[dict[int, object], str, object]],
    lower: Sequence,
    upper: Sequence,
) -> LpResult:
    """Minimize ``c.x`` subject to ``rows`` and ``lower <= x <= upper``.

    Each row is ``(coefficients by column, sense, rhs)`` with sense one of
    ``"<="``, ``"="``, ``">="``.  Infinite bounds are ``math.inf``.
    """
    n = len(c)
    # column map: x_j = offset_j + sum(sign * y_col)
    cols: list[list[tuple[int, int]]] = []
    offset: list[Fraction] = []
    ncol = 0
    extra_rows: list[tuple[dict[int, Fraction], str, Fraction]] = []
    for j in range(n):
        lo, hi = lower[j], upper[j]
        if lo != -math.inf:
            offset.append(_frac(lo))
            cols.append([(ncol, 1)])
            if hi != math.inf:
                if hi < lo:
                    return LpResult(INFEASIBLE)
                extra_rows.append(({ncol: Fraction(1)}, "<=", _frac(hi) - _frac(lo)))
            ncol += 1
        elif hi != math.inf:
            offset.append(_frac(hi))
            cols.append([(ncol, -1)])
            ncol += 1
        else:
            offset.append(Fraction(0))
            cols.append([(ncol, 1), (ncol + 1, -1)])
            ncol += 2

    std_rows: list[tuple[dict[int, Fraction], str, Fraction]] = []
    for coeffs, sense, rhs in rows:
        row: dict[int, Fraction] = {}
        b = _frac(rhs)
        for j, a in coeffs.items():
            a = _frac(a)
            if a == 0:
                continue
            b -= a * offset[j]
            for col, sgn in cols[j]:
                row[col] = row.get(col, Fraction(0)) + sgn * a
        std_rows.append((row, sense, b))
    std_rows.extend(extra_rows)

    cost = [Fraction(0)] * ncol
    const = Fraction(0)
    for j in range(n):
        cj = _frac(c[j])
        const += cj * offset[j]
        for col, sgn in cols[j]:
            cost[col] += sgn * cj

    res = _solve_standard(cost, std_rows, ncol)
    if res.status != OPTIMAL:
        return res
    y = res.x
    x = []
    for j in range(n):
        x.append(offset[j] + sum(sgn * y[col] for col, sgn in cols[j]))
    return LpResult(OPTIMAL, x, res.objective + const)


def _solve_standard(cost: list[Fraction], rows, ncol: int) -> LpResult:
    """min cost.y, rows, y >= 0."""
    m = len(rows)
    # slack/surplus columns then artificials
    slack_of: list[int | None] = []
    nslack = 0
    norm_rows = []
    for coeffs, sense, b in rows:
        if b < 0:
            coeffs = {k: -v for k, v in coeffs.items()}
            b = -b
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        norm_rows.append((coeffs, sense, b))
        if sense == "=":
            slack_of.append(None)
        else:
            slack_of.append(nslack)
            nslack += 1
    width = ncol + nslack
    tab: list[list[Fraction]] = []
    basis: list[int] = []
    art_rows = []
    for r, (coeffs, sense, b) in enumerate(norm_rows):
        line = [Fraction(0)] * width
        for k, v in coeffs.items():
            line[k] = v
        if sense == "<=":
            line[ncol + slack_of[r]] = Fraction(1)
            basis.append(ncol + slack_of[r])
        else:
            if sense == ">=":
                line[ncol + slack_of[r]] = Fraction(-1)
            basis.append(-1)
            art_rows.append(r)
        tab.append(line + [b])

    nart = len(art_rows)
    if nart:
        for a, r in enumerate(art_rows):
            for line in tab:
                line.insert(width + a, Fraction(0))
            tab[r][width + a] = Fraction(1)
            basis[r] = width + a
        total = width + nart
        obj = [Fraction(0)] * (total + 1)
        for r in art_rows:
            for k in range(total + 1):
                obj[k] -= tab[r][k]
        for a in range(nart):
            obj[width + a] += 1
        status = _iterate(tab, basis, obj, total)
        if status == UNBOUNDED:  # pragma: no cover - phase 1 is bounded below
            raise RuntimeError("phase 1 unbounded")
        if -obj[-1] != 0:
            return LpResult(INFEASIBLE)
        # drive artificials out of the basis
        for r in range(len(tab) - 1, -1, -1):
            if basis[r] >= width:
                pivot_col = next((k for k in range(width) if tab[r][k] != 0), None)
                if pivot_col is None:
                    del tab[r]
                    del basis[r]
                else:
                    _pivot(tab, None, r, pivot_col)
                    basis[r] = pivot_col
        for line in tab:
            del line[width:width + nart]

    obj = [Fraction(0)] * (width + 1)
    for k in range(ncol):
        obj[k] = cost[k]
    for r, bcol in enumerate(basis):
        cb = obj[bcol]
        if cb != 0:
            for k in range(width + 1):
                obj[k] -= cb * tab[r][k]
    status = _iterate(tab, basis, obj, width)
    if status == UNBOUNDED:
        return LpResult(UNBOUNDED)
    y = [Fraction(0)] * width
    for r, bcol in enumerate(basis):
        y[bcol] = tab[r][-1]
    return LpResult(OPTIMAL, y[:ncol], -obj[-1])


def _pivot(tab, obj, r: int, col: int) -> None:
    prow = tab[r]
    p = prow[col]
    if p != 1:
        inv = 1 / p
        for k in range(len(prow)):
            if prow[k]:
                prow[k] *= inv
    nz = [k for k in range(len(prow)) if prow[k]]
    for i, line in enumerate(tab):
        if i != r:
            f = line[col]
            if f:
                for k in nz:
                    line[k] -= f * prow[k]
    if obj is not None:
        f = obj[col]
        if f:
            for k in nz:
                obj[k] -= f * prow[k]


def _iterate(tab, basis, obj, ncols: int) -> str:
    while True:
        col = next((k for k in range(ncols) if obj[k] < 0), None)
        if col is None:
            return OPTIMAL
        best_r, best_ratio = None, None
        for r, line in enumerate(tab):
            a = line[col]
            if a > 0:
                ratio = line[-1] / a
                if best_ratio is None or ratio < best_ratio or (ratio == best_ratio and basis[r] < basis[best_r]):
                    best_r, best_ratio = r, ratio
        if best_r is None:
            return UNBOUNDED
        _pivot(tab, obj, best_r, col)
        basis[best_r] = col
