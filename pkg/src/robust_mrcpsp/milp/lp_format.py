"""CPLEX LP-format export.

Sections appear as Minimize/Maximize, Subject To, Bounds, Generals,
Binaries, End.  Variables and rows keep declaration order, so identical
models give byte-identical text.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .model import EQ, MAXIMIZE, MipModel

_LINE_WIDTH = 200


def format_number(value) -> str:
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        value = float(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if value.is_integer():
            return str(int(value))
        return repr(value)
    return str(value)


def _expr(terms, names) -> list[str]:
    parts = []
    for idx, coef in terms:
        sign = "-" if coef < 0 else "+"
        mag = -coef if coef < 0 else coef
        text = names[idx] if mag == 1 else f"{format_number(mag)} {names[idx]}"
        if not parts:
            parts.append(f"- {text}" if sign == "-" else text)
        else:
            parts.append(f"{sign} {text}")
    return parts


def _wrap(head: str, parts: list[str], tail: str = "") -> list[str]:
    lines, cur = [], head
    for p in parts + ([tail] if tail else []):
        if len(cur) + len(p) + 1 > _LINE_WIDTH and cur.strip():
            lines.append(cur)
            cur = "   "
        cur = f"{cur} {p}" if cur else p
    lines.append(cur)
    return lines


def write_lp(model: MipModel) -> str:
    names = [v.name for v in model.variables]
    out = [f"\\ {model.name}"]
    out.append("Maximize" if model.sense == MAXIMIZE else "Minimize")
    obj = _expr(sorted(model.objective.items()), names)
    if not obj and names:
        obj = [f"0 {names[0]}"]
    out.extend(_wrap(" obj:", obj))
    out.append("Subject To")
    for con in model.constraints:
        parts = _expr(con.terms, names)
        if not parts:
            parts = [f"0 {names[0]}"] if names else ["0"]
        sense = "=" if con.sense == EQ else con.sense
        out.extend(_wrap(f" {con.name}:", parts, f"{sense} {format_number(con.rhs)}"))
    out.append("Bounds")
    for v in model.variables:
        if v.is_binary:
            continue
        lb, ub = v.lb, v.ub
        if lb == -math.inf and ub == math.inf:
            out.append(f" {v.name} free")
        elif lb == ub:
            out.append(f" {v.name} = {format_number(lb)}")
        elif ub == math.inf:
            if lb != 0:
                out.append(f" {v.name} >= {format_number(lb)}")
        else:
            out.append(f" {format_number(lb)} <= {v.name} <= {format_number(ub)}")
    generals = [v.name for v in model.variables if v.integer and not v.is_binary]
    binaries = [v.name for v in model.variables if v.is_binary]
    if generals:
        out.append("Generals")
        out.extend(f" {n}" for n in generals)
    if binaries:
        out.append("Binaries")
        out.extend(f" {n}" for n in binaries)
    out.append("End")
    return "\n".join(out) + "\n"
