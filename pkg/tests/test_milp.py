from __future__ import annotations

import math
from fractions import Fraction

import pytest

from robust_mrcpsp.milp import (
    EQ,
    GE,
    INFEASIBLE,
    LE,
    MAXIMIZE,
    OPTIMAL,
    UNBOUNDED,
    BackendUnavailable,
    MipModel,
    ModelError,
    make_backend,
    solve,
    write_lp,
)


def knapsack() -> MipModel:
    """Integer tie forces x = y, so the best total is 1 + 1 + z = 3."""
    m = MipModel("knap")
    x = m.add_variable("x", 0, 10, integer=True)
    y = m.add_variable("y", 0, 10, integer=True)
    z = m.add_binary("z")
    m.add_constraint("cap", [(x, 2), (y, 2), (z, 1)], LE, 7)
    m.add_constraint("tie", [(x, 1), (y, -1)], EQ, 0)
    m.set_objective([(x, 1), (y, 1), (z, 1)], MAXIMIZE)
    return m


GOLDEN_LP = """\\ knap
Maximize
 obj: x + y + z
Subject To
 cap: 2 x + 2 y + z <= 7
 tie: x - y = 0
Bounds
 0 <= x <= 10
 0 <= y <= 10
Generals
 x
 y
Binaries
 z
End
"""


# -- builder --------------------------------------------------------------------


def test_builder_rejects_bad_input():
    m = MipModel()
    m.add_variable("a")
    with pytest.raises(ModelError):
        m.add_variable("a")
    with pytest.raises(ModelError):
        m.add_variable("1bad")
    with pytest.raises(ModelError):
        m.add_variable("b", 3, 2)
    with pytest.raises(ModelError):
        m.add_constraint("c", [(5, 1)], LE, 0)
    with pytest.raises(ModelError):
        m.add_constraint("c", [("nope", 1)], LE, 0)
    with pytest.raises(ModelError):
        m.add_constraint("c", [("a", 1)], "<>", 0)
    m.add_constraint("c", [("a", 1)], LE, 0)
    with pytest.raises(ModelError):
        m.add_constraint("c", [("a", 1)], LE, 0)
    with pytest.raises(ModelError):
        m.set_objective([("a", 1)], "sideways")


def test_repeated_terms_are_merged_and_zeros_dropped():
    m = MipModel()
    a = m.add_variable("a")
    b = m.add_variable("b")
    con = m.add_constraint("c", [(a, 1), (b, 2), (a, 2), (b, -2)], GE, 1)
    assert con.terms == ((a, 3),)


# -- LP text ----------------------------------------------------------------------


def test_lp_golden_text():
    assert write_lp(knapsack()) == GOLDEN_LP


def test_lp_is_deterministic():
    assert write_lp(knapsack()) == write_lp(knapsack())


def test_lp_of_empty_model():
    text = write_lp(MipModel("empty"))
    assert text.splitlines() == ["\\ empty", "Minimize", " obj:", "Subject To", "Bounds", "End"]


def test_lp_bounds_and_fractions():
    m = MipModel("b")
    m.add_variable("free_v", -math.inf, math.inf)
    m.add_variable("fixed", 2, 2)
    m.add_variable("low", 1)
    m.add_constraint("r", [("low", Fraction(1, 2))], LE, Fraction(3))
    text = write_lp(m)
    assert " free_v free" in text
    assert " fixed = 2" in text
    assert " low >= 1" in text
    assert " r: 0.5 low <= 3" in text


def test_highs_reads_our_lp_file(tmp_path):
    highspy = pytest.importorskip("highspy")
    path = tmp_path / "knap.lp"
    path.write_text(write_lp(knapsack()))
    h = highspy.Highs()
    h.silent()
    h.readModel(str(path))
    assert h.getNumCol() == 3
    assert h.getNumRow() == 2
    h.run()
    assert h.getInfo().objective_function_value == pytest.approx(3.0)


# -- exact LP ------------------------------------------------------------------


def test_simplex_exact_fraction():
    # max x + y, x + 2y <= 4, 3x + y <= 6  ->  (8/5, 6/5), value 14/5
    m = MipModel()
    x = m.add_variable("x")
    y = m.add_variable("y")
    m.add_constraint("a", [(x, 1), (y, 2)], LE, 4)
    m.add_constraint("b", [(x, 3), (y, 1)], LE, 6)
    m.set_objective([(x, 1), (y, 1)], MAXIMIZE)
    out = solve(m, make_backend("bnb"))
    assert out.status == OPTIMAL
    assert Fraction(out.objective).limit_denominator(100) == Fraction(14, 5)
    assert out.values[x] == pytest.approx(1.6) and out.values[y] == pytest.approx(1.2)


# -- backends --------------------------------------------------------------------------


def infeasible_model() -> MipModel:
    m = MipModel()
    x = m.add_binary("x")
    m.add_constraint("lo", [(x, 1)], GE, 2)
    return m


def unbounded_model() -> MipModel:
    m = MipModel()
    x = m.add_variable("x", integer=True)
    m.add_constraint("lo", [(x, 1)], GE, 1)
    m.set_objective([(x, 1)], MAXIMIZE)
    return m


@pytest.fixture(params=["highs", "bnb"])
def backend(request):
    try:
        b = make_backend(request.param)
    except BackendUnavailable:
        pytest.skip(f"{request.param} unavailable")
    if not b.available():
        pytest.skip(f"{request.param} unavailable")
    return b


def test_backend_solves_knapsack(backend):
    model = knapsack()
    out = solve(model, backend)
    assert out.status == OPTIMAL
    assert out.objective == pytest.approx(3.0)
    assert model.violations(out.values) == []
    assert out.value(model, "x") == pytest.approx(out.value(model, "y"))


def test_backend_reports_infeasible(backend):
    assert solve(infeasible_model(), backend).status == INFEASIBLE


def test_backend_reports_unbounded(backend):
    assert solve(unbounded_model(), backend).status in (UNBOUNDED, "unbounded_or_infeasible")


def test_violations_flag_each_kind():
    m = knapsack()
    assert m.violations([1, 1, 1]) == []
    bad = m.violations([1.5, 1, 1.2])
    assert "integrality:x" in bad and "bound:z" in bad and "tie" in bad
    assert m.violations([1 + 1e-7, 1, 0]) == []


def test_unknown_backend_name():
    with pytest.raises((BackendUnavailable, ValueError)):
        make_backend("gurobi-please")
