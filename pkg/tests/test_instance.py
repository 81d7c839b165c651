from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from robust_mrcpsp.instance import (
    Activity,
    Instance,
    Mode,
    durations,
    make_instance,
    makespan_upper_bound,
    max_flow_bound,
    nonrenewable_feasible,
    validate,
)


def test_chain_is_valid():
    inst = make_instance([[(2, 1, (1,))], [(3, 0, (1,))]], [(1, 2)], [2])
    rep = validate(inst)
    assert rep.ok and not rep.violations
    assert inst.n == 2 and inst.sink == 3


def test_two_cycle_reported():
    inst = make_instance([[(1,)], [(1,)]], [(1, 2), (2, 1), (0, 1), (2, 3)], [], link_dummies=False)
    assert validate(inst).has("cycle")


def test_capacity_violation_reported():
    inst = make_instance([[(1, 0, (5,))]], [], [4])
    assert validate(inst).has("capacity")


def test_unreachable_and_dummy_reported():
    acts = (
        Activity((Mode(0, 0, (0,)),)),
        Activity((Mode(2, 0, (0,)),)),
        Activity((Mode(1, 0, (1,)),)),
    )
    inst = Instance(acts, frozenset(), (1,))
    rep = validate(inst)
    assert rep.has("unreachable") and rep.has("dummy")


def test_validate_is_pure():
    inst = make_instance([[(1, 0, (5,))]], [], [4])
    assert validate(inst).violations == validate(inst).violations


def test_upper_bound_examples():
    assert makespan_upper_bound(make_instance([[(0, 0)], [(0, 0)]], [], [])) == 0
    assert makespan_upper_bound(make_instance([[(3, 2)], [(4, 1), (6, 0)]], [], [])) == 11
    assert makespan_upper_bound(make_instance([[(10, 7)]], [], [])) == 17


def test_flow_bound_examples():
    inst = make_instance([[(1, 0, (2,)), (1, 0, (3,))], [(1, 0, (1,))], [(1, 0, (4,))], [(1, 0, (4,))]], [], [4])
    assert max_flow_bound(inst, 1, 2, 0) == 1
    assert max_flow_bound(inst, 1, inst.sink, 0) == 0
    assert max_flow_bound(inst, 3, 4, 0) == 4


@given(st.lists(st.integers(0, 9), min_size=1, max_size=4), st.lists(st.integers(0, 9), min_size=1, max_size=4))
def test_flow_bound_is_min_of_maxima(ri, rj):
    inst = make_instance([[(1, 0, (r,)) for r in ri], [(1, 0, (r,)) for r in rj]], [], [10])
    assert max_flow_bound(inst, 1, 2, 0) == min(max(ri), max(rj)) == max_flow_bound(inst, 2, 1, 0)


def test_nonrenewable_budget_and_durations():
    inst = make_instance([[(2, 1, (), (3,)), (1, 0, (), (1,))], [(4, 2, (), (2,))]], [], [], [4])
    assert nonrenewable_feasible(inst, (0, 1, 0, 0))
    assert not nonrenewable_feasible(inst, (0, 0, 0, 0))
    assert durations(inst, (0, 0, 0, 0), (0, 1, 1, 0)) == [0, 3, 6, 0]
