import numpy as np
import pytest

from conftest import FAMILY_NAMES, small_instance
from logicmio import FeasibleSet, Regularizer
from logicmio.bruteforce import MAX_DIMENSION, DimensionTooLarge, enumerate_z
from logicmio.master import (
    GAP_LIMIT,
    INFEASIBLE,
    OPTIMAL,
    SolverConfig,
    add_feasibility_cut,
    relative_gap,
    solve,
    solve_multitree,
    solve_singletree,
)
from logicmio.oracles import EXCLUSION, FEASIBILITY, MONOTONE, BQPInstance, BQPOracle, ERMInstance, ERMOracle, FacilityInstance, FacilityOracle
from logicmio.pool import CutPool

BOTH = (solve_singletree, solve_multitree)


@pytest.fixture
def bqp():
    return BQPOracle(BQPInstance(np.array([[1.0, -2.0], [-2.0, 1.0]]))), FeasibleSet(2)


@pytest.mark.parametrize("solver", BOTH)
def test_erm_example(solver):
    o = ERMOracle(ERMInstance(np.eye(2), [1.0, 0.0]), Regularizer.ridge(1.0))
    rep = solver(o, FeasibleSet(2, k=1))
    assert rep.status == OPTIMAL
    assert rep.z.tolist() == [1, 0]
    assert rep.value == pytest.approx(0.25, abs=1e-9)


@pytest.mark.parametrize("solver", BOTH)
def test_bqp_example(solver, bqp):
    rep = solver(*bqp)
    assert rep.status == OPTIMAL and rep.z.tolist() == [1, 1] and rep.value == pytest.approx(-2)


def test_single_point_set_terminates_immediately(bqp):
    o, _ = bqp
    Z = FeasibleSet(2, lower=[1, 0], upper=[1, 0])
    rep = solve_multitree(o, Z)
    assert rep.status == OPTIMAL and rep.z.tolist() == [1, 0]
    assert rep.iterations <= 2


def test_facility_toy_agrees_across_solvers():
    o = FacilityOracle(FacilityInstance([5.0, 4.0], [[1.0, 3.0], [2.0, 1.0]], [6.0, 6.0], [4.0, 5.0]), Regularizer.bigm(100))
    Z = FeasibleSet(2)
    ref = enumerate_z(o, Z).best_value
    for solver in BOTH:
        assert solver(o, Z).value == pytest.approx(ref, rel=1e-9)


def test_capacity_shortfall_generates_monotone_cuts():
    # every single facility is too small; the budget keeps the all-on point out of Z
    o = FacilityOracle(FacilityInstance([1.0, 1.0, 9.0], [[1.0], [1.0], [1.0]], [3.0, 3.0, 6.0], [5.0]), Regularizer.bigm(100))
    Z = FeasibleSet(3, k=2)
    rep = solve_singletree(o, Z)
    assert rep.status == OPTIMAL
    assert rep.cuts_feasibility >= 1
    assert any(c.kind == MONOTONE for c in rep.cuts if c.origin == FEASIBILITY)
    assert rep.value == pytest.approx(enumerate_z(o, Z).best_value)


def test_all_infeasible_supports():
    o = FacilityOracle(FacilityInstance([1.0, 1.0], [[1.0], [1.0]], [3.0, 3.0], [5.0]), Regularizer.bigm(100))
    Z = FeasibleSet(2, k=1)
    assert enumerate_z(o, Z).all_infeasible
    for solver in BOTH:
        assert solver(o, Z).status == INFEASIBLE


@pytest.mark.parametrize("solver", BOTH)
def test_loose_eps_respects_gap_contract(solver):
    o, Z = small_instance("facility", 3).build()
    rep = solver(o, Z, config=SolverConfig(eps=0.5))
    assert rep.gap <= 0.5
    assert rep.lower_bound <= enumerate_z(o, Z).best_value + 1e-9


def test_node_limit_reports_gap_limit():
    o, Z = small_instance("bqp", 2).build()
    rep = solve_singletree(o, Z, config=SolverConfig(node_limit=1))
    assert rep.status in (GAP_LIMIT, OPTIMAL)
    assert rep.lower_bound <= rep.upper_bound + 1e-9


@pytest.mark.parametrize("family", FAMILY_NAMES)
@pytest.mark.parametrize("warm,heur", [(True, False), (False, True), (True, True)])
def test_ingredients_do_not_change_the_optimum(family, warm, heur):
    o, Z = small_instance(family, 6).build()
    ref = enumerate_z(o, Z)
    rep = solve(o, Z, config=SolverConfig(use_relaxation_warmstart=warm, use_heuristics=heur))
    if ref.all_infeasible:
        assert rep.status == INFEASIBLE
    else:
        assert rep.value == pytest.approx(ref.best_value, rel=1e-6, abs=1e-9)


def test_incumbent_hint_and_initial_cuts(bqp):
    o, Z = bqp
    seed = o.evaluate(np.array([1.0, 1.0]))
    rep = solve_singletree(o, Z, initial_cuts=[seed.cut], incumbent_hint=np.array([1, 1]))
    assert rep.value == pytest.approx(-2)


def test_report_serialises():
    o, Z = small_instance("erm", 1).build()
    d = solve(o, Z).to_dict()
    for key in ("status", "upper_bound", "lower_bound", "gap", "nodes_explored", "cuts_optimality", "stage_timings"):
        assert key in d


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(eps=-1)
    with pytest.raises(ValueError):
        SolverConfig(mode="dual")


def test_relative_gap():
    assert relative_gap(10.0, 9.0) == pytest.approx(0.1)
    assert relative_gap(0.5, 0.0) == pytest.approx(0.5)


def test_feasibility_cut_forms():
    pool = CutPool(2)
    ex = add_feasibility_cut(pool, np.array([1, 0]), EXCLUSION)
    # (1 - z1) + z2 >= 1
    for z, bad in [((1, 0), True), ((0, 0), False), ((1, 1), False), ((0, 1), False)]:
        assert (ex.violation(np.array(z, float)) > 0) == bad
    mono = add_feasibility_cut(pool, np.array([0, 0]), MONOTONE)
    np.testing.assert_allclose(mono.coefficients, [1, 1])
    assert mono.constant == pytest.approx(1)
    assert len(pool.feasibility) == 2


def test_pool_deduplicates():
    pool = CutPool(2)
    o = BQPOracle(BQPInstance(np.eye(2)))
    cut = o.evaluate(np.array([1.0, 0.0])).cut
    assert pool.add(cut) and not pool.add(cut)


# ---------------------------------------------------------------- brute force


def test_enumerate_examples(bqp):
    o, Z = bqp
    res = enumerate_z(o, Z, retain_table=True)
    assert res.best_z.tolist() == [1, 1] and res.best_value == pytest.approx(-2)
    assert len(res.table) == 4 and res.evaluated == 4
    single = enumerate_z(o, FeasibleSet(2, lower=[0, 1], upper=[0, 1]))
    assert single.best_z.tolist() == [0, 1]


def test_enumerate_is_repeatable():
    o, Z = small_instance("uc", 2).build()
    a, b = enumerate_z(o, Z, retain_table=True), enumerate_z(o, Z, retain_table=True)
    assert a.table == b.table and np.array_equal(a.best_z, b.best_z)


def test_enumerate_dimension_guard():
    o = BQPOracle(BQPInstance(np.zeros((MAX_DIMENSION + 1, MAX_DIMENSION + 1))))
    with pytest.raises(DimensionTooLarge):
        enumerate_z(o, FeasibleSet(MAX_DIMENSION + 1))
