from __future__ import annotations

import random

import pytest

from robust_mrcpsp.compact import build_compact, extract_first_stage, solve_compact
from robust_mrcpsp.instance import make_instance, makespan_upper_bound
from robust_mrcpsp.instance import durations as realized_durations
from robust_mrcpsp.milp import OPTIMAL, solve, write_lp
from robust_mrcpsp.network import is_sufficient_selection, resource_feasible, worst_case_longest_path
from robust_mrcpsp.oracle import brute_force_solve, example_instance, random_instance
from robust_mrcpsp.psplib import worst_case_instance


def small_battery(seed: int, count: int, n: int | None = None, max_modes: int = 2):
    rng = random.Random(seed)
    return [random_instance(rng, n=n, max_modes=max_modes, name=f"c{seed}_{k}") for k in range(count)]


def test_gamma_zero_has_one_level_and_no_deviation_rows():
    form = build_compact(example_instance(), 0)
    assert all(len(row) == 1 for row in form.S)
    assert not any(c.name.startswith("dev_") for c in form.model.constraints)


def test_deviation_rows_link_consecutive_levels():
    form = build_compact(example_instance(), 2)
    assert all(len(row) == 3 for row in form.S)
    assert any(c.name.startswith("dev_") and c.name.endswith("_1") for c in form.model.constraints)


def test_single_activity(highs):
    inst = make_instance([[(3, 2)]], [], [])
    for gamma, expected in [(0, 3), (1, 5), (4, 5)]:
        _, worst, out = solve_compact(inst, gamma, highs)
        assert out.status == OPTIMAL and worst.makespan == expected


def test_single_activity_picks_the_robust_mode(highs):
    inst = make_instance([[(3, 4), (5, 0)]], [], [])
    first, worst, _ = solve_compact(inst, 0, highs)
    assert first.modes[1] == 0 and worst.makespan == 3
    first, worst, _ = solve_compact(inst, 1, highs)
    assert first.modes[1] == 1 and worst.makespan == 5


@pytest.mark.parametrize("gamma, expected", [(0, 11), (1, 14), (2, 15), (5, 17)])
def test_example_optimum(highs, gamma, expected):
    first, worst, _ = solve_compact(example_instance(), gamma, highs)
    assert worst.makespan == expected


def test_example_gamma_two_solution(highs):
    inst = example_instance()
    first, worst, _ = solve_compact(inst, 2, highs)
    assert worst.makespan == 15
    assert is_sufficient_selection(inst, first.modes, first.relation)


def test_fidelity_and_reduced_builds_agree(highs):
    for inst in small_battery(11, 8):
        for gamma in (0, 2):
            _, a, _ = solve_compact(inst, gamma, highs, reduce=True)
            _, b, _ = solve_compact(inst, gamma, highs, reduce=False)
            assert a.makespan == b.makespan, inst.name


def test_fidelity_build_is_larger():
    inst = example_instance()
    reduced, full = build_compact(inst, 1), build_compact(inst, 1, reduce=False)
    assert full.model.num_variables > reduced.model.num_variables
    assert full.model.num_constraints > reduced.model.num_constraints
    assert any(c.name.startswith("fix_") for c in full.model.constraints)


def test_aggregated_mode_rows_agree(highs):
    for inst in small_battery(12, 6):
        _, a, _ = solve_compact(inst, 1, highs)
        _, b, _ = solve_compact(inst, 1, highs, aggregate_modes=True)
        assert a.makespan == b.makespan, inst.name


def test_extracted_solution_is_sufficient_under_worst_delays(highs):
    for inst in small_battery(13, 10):
        first, worst, _ = solve_compact(inst, 2, highs)
        assert is_sufficient_selection(inst, first.modes, first.relation)
        d = realized_durations(inst, first.modes, worst.delays)
        assert resource_feasible(inst, first.modes, first.relation, d)


def test_budget_equal_to_n_is_the_worst_duration_instance(highs):
    for inst in small_battery(14, 6):
        _, robust, _ = solve_compact(inst, inst.n, highs)
        _, det, _ = solve_compact(worst_case_instance(inst), 0, highs)
        assert robust.makespan == det.makespan, inst.name


def test_objective_is_monotone_in_budget(highs):
    for inst in small_battery(15, 6):
        values = [solve_compact(inst, g, highs)[1].makespan for g in range(inst.n + 1)]
        assert values == sorted(values), inst.name


def test_single_mode_instances_match_oracle(highs):
    for inst in small_battery(16, 8, max_modes=1):
        for gamma in (0, 1, 2):
            _, worst, _ = solve_compact(inst, gamma, highs)
            assert worst.makespan == brute_force_solve(inst, gamma).makespan, inst.name


@pytest.mark.slow
def test_bundled_backend_agrees_on_a_tiny_instance(highs, bnb):
    inst = make_instance([[(2, 1, (2,))], [(3, 1, (2,))], [(1, 1, (1,))]], [(1, 3)], [3])
    for gamma in (0, 1):
        _, a, _ = solve_compact(inst, gamma, highs)
        _, b, _ = solve_compact(inst, gamma, bnb)
        assert a.makespan == b.makespan == brute_force_solve(inst, gamma).makespan


def test_big_m_covers_every_makespan(highs):
    for inst in small_battery(17, 6):
        form = build_compact(inst, 2)
        assert form.big_m == makespan_upper_bound(inst)
        out = solve(form.model, highs)
        first = extract_first_stage(form, out.values)
        assert worst_case_longest_path(inst, first.modes, first.relation, inst.n).makespan <= form.big_m


def test_invalid_instance_is_refused(highs):
    inst = make_instance([[(1,)], [(1,)]], [(1, 2), (2, 1)], [], link_dummies=False)
    with pytest.raises(ValueError):
        solve_compact(inst, 0, highs)


def test_lp_export_is_stable():
    inst = example_instance()
    assert write_lp(build_compact(inst, 2).model) == write_lp(build_compact(inst, 2).model)
