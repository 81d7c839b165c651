from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

Number = Union[int, Fraction, float]
INF = math.inf

LE, EQ, GE = "<=", "=", ">="
MINIMIZE, MAXIMIZE = "min", "max"

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    index: int
    name: str
    lb: Number
    ub: Number
    integer: bool

    @property
    def is_binary(self) -> bool:
        return self.integer and self.lb == 0 and self.ub == 1


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[int, Number], ...]
    sense: str
    rhs: Number

    def activity(self, values) -> float:
        return sum(c * values[v] for v, c in self.terms)


@dataclass
class MipModel:
    """Append-only linear model: variables, linear constraints, objective."""

    name: str = "model"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, Number] = field(default_factory=dict)
    sense: str = MINIMIZE
    _var_index: dict[str, int] = field(default_factory=dict, repr=False)
    _con_names: set[str] = field(default_factory=set, repr=False)

    # -- building ---------------------------------------------------------

    def add_variable(self, name: str, lb: Number = 0, ub: Number = INF, integer: bool = False) -> int:
        if not _NAME.match(name):
            raise ModelError(f"invalid variable name {name!r}")
        if name in self._var_index:
            raise ModelError(f"duplicate variable {name!r}")
        if lb > ub:
            raise ModelError(f"variable {name!r} has lb {lb} > ub {ub}")
        idx = len(self.variables)
        self.variables.append(Variable(idx, name, lb, ub, integer))
        self._var_index[name] = idx
        return idx

    def add_binary(self, name: str, lb: int = 0, ub: int = 1) -> int:
        return self.add_variable(name, lb, ub, integer=True)

    def var(self, name: str) -> int:
        try:
            return self._var_index[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def _resolve_terms(self, terms) -> tuple[tuple[int, Number], ...]:
        if isinstance(terms, Mapping):
            terms = terms.items()
        acc: dict[int, Number] = {}
        for v, c in terms:
            if isinstance(v, str):
                v = self.var(v)
            elif not (isinstance(v, int) and 0 <= v < len(self.variables)):
                raise ModelError(f"reference to undeclared variable {v!r}")
            acc[v] = acc.get(v, 0) + c
        return tuple((v, c) for v, c in acc.items() if c != 0)

    def add_constraint(self, name: str, terms, sense: str, rhs: Number) -> Constraint:
        if not _NAME.match(name):
            raise ModelError(f"invalid constraint name {name!r}")
        if name in self._con_names:
            raise ModelError(f"duplicate constraint {name!r}")
        if sense not in (LE, EQ, GE):
            raise ModelError(f"unknown sense {sense!r}")
        con = Constraint(name, self._resolve_terms(terms), sense, rhs)
        self.constraints.append(con)
        self._con_names.add(name)
        return con

    def set_objective(self, terms, sense: str = MINIMIZE) -> None:
        if sense not in (MINIMIZE, MAXIMIZE):
            raise ModelError(f"unknown objective sense {sense!r}")
        self.objective = dict(self._resolve_terms(terms))
        self.sense = sense

    # -- inspection ---------------------------------------------------------

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def is_mip(self) -> bool:
        return any(v.integer for v in self.variables)

    def objective_value(self, values) -> float:
        return sum(c * values[v] for v, c in self.objective.items())

    def violations(self, values, tol: float = 1e-6) -> list[str]:
        """Names of constraints and bounds that ``values`` breaks by more than ``tol``."""
        bad = []
        for var in self.variables:
            x = values[var.index]
            if x < var.lb - tol or x > var.ub + tol:
                bad.append(f"bound:{var.name}")
            elif var.integer and abs(x - round(x)) > tol:
                bad.append(f"integrality:{var.name}")
        for con in self.constraints:
            lhs = con.activity(values)
            if (
                (con.sense == LE and lhs > con.rhs + tol)
                or (con.sense == GE and lhs < con.rhs - tol)
                or (con.sense == EQ and abs(lhs - con.rhs) > tol)
            ):
                bad.append(con.name)
        return bad
