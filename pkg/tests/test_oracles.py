import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FAMILY_NAMES, REGULARIZED, ridge_for, small_instance
from logicmio.numerics import QuadraticProgram, qp_solve
from logicmio.oracles import (
    EXCLUSION,
    FEASIBILITY,
    MONOTONE,
    OPTIMALITY,
    BQPInstance,
    BQPOracle,
    ERMInstance,
    ERMOracle,
    FacilityInstance,
    FacilityOracle,
    NetDesignInstance,
    NetDesignOracle,
    PortfolioInstance,
    PortfolioOracle,
    UCInstance,
    UCOracle,
    Unsupported,
    make_oracle,
    water_fill,
)
from logicmio.regularizers import Regularizer
from logicmio.relaxation import kelley_solve

RIDGE1 = Regularizer.ridge(1.0)


# ---------------------------------------------------------------- ERM


def test_erm_one_dimensional_examples():
    o = ERMOracle(ERMInstance([[1.0]], [1.0]), RIDGE1)
    r = o.evaluate([1])
    assert r.f_value == pytest.approx(0.25, abs=1e-10)
    assert r.x_star[0] == pytest.approx(0.5, abs=1e-10)
    assert o.evaluate_fractional([0.5]).f_value == pytest.approx(1 / 3, abs=1e-9)


def test_erm_empty_support_is_half_squared_norm():
    rng = np.random.default_rng(0)
    y = rng.normal(size=7)
    for reg in (RIDGE1, Regularizer.bigm(2.0)):
        o = ERMOracle(ERMInstance(rng.normal(size=(7, 3)), y), reg)
        assert o.evaluate(np.zeros(3)).f_value == pytest.approx(0.5 * y @ y, abs=1e-10)


def test_erm_identity_design_prefers_first_feature():
    o = ERMOracle(ERMInstance(np.eye(2), [1.0, 0.0]), RIDGE1)
    assert o.evaluate([1, 0]).f_value == pytest.approx(0.25, abs=1e-10)
    assert o.evaluate([0, 1]).f_value == pytest.approx(0.5, abs=1e-10)


def test_erm_h_oracle():
    rng = np.random.default_rng(1)
    o = ERMOracle(ERMInstance(rng.normal(size=(6, 3)), rng.normal(size=6)), RIDGE1)
    v0, vstar = o.h_eval(np.zeros(6))
    assert v0 == pytest.approx(0.0)
    np.testing.assert_allclose(vstar, o.y)
    for _ in range(20):
        theta, v = rng.normal(size=6), rng.normal(size=6)
        h, _ = o.h_eval(theta)
        assert h <= 0.5 * np.sum((o.y - v) ** 2) - v @ theta + 1e-12
    svm = ERMOracle(ERMInstance(rng.normal(size=(6, 3)), np.sign(rng.normal(size=6)), "SVM"), RIDGE1)
    with pytest.raises(Unsupported):
        svm.h_eval(np.zeros(6))


# ---------------------------------------------------------------- portfolio


def test_portfolio_examples():
    o = PortfolioOracle(PortfolioInstance([1.0, 0.0], np.eye(2), 1.0), RIDGE1)
    r = o.evaluate([1, 0])
    np.testing.assert_allclose(r.x_star, [1, 0], atol=1e-7)
    assert r.f_value == pytest.approx(0.0, abs=1e-7)
    bad = o.evaluate([0, 0])
    assert not bad.feasible
    assert bad.cut.origin == FEASIBILITY and bad.cut.kind == EXCLUSION


def test_portfolio_matches_restricted_qp():
    rng = np.random.default_rng(3)
    F = rng.normal(size=(3, 3))
    Sigma = F @ F.T + 0.1 * np.eye(3)
    mu = rng.uniform(0, 1, 3)
    o = PortfolioOracle(PortfolioInstance(mu, Sigma, 1.0), RIDGE1)
    for support in itertools.combinations(range(3), 2):
        s = list(support)
        qp = QuadraticProgram(c=-mu[s], P=Sigma[np.ix_(s, s)] + np.eye(2), A=np.ones((1, 2)), b=[1.0], lo=np.zeros(2), hi=np.full(2, np.inf))
        z = np.zeros(3)
        z[s] = 1
        assert o.evaluate(z).f_value == pytest.approx(qp_solve(qp).objective, abs=1e-6)


def test_portfolio_fractional_is_a_lower_bound():
    rng = np.random.default_rng(4)
    F = rng.normal(size=(2, 2))
    o = PortfolioOracle(PortfolioInstance(rng.uniform(size=2), F @ F.T + 0.1 * np.eye(2), 1.0), RIDGE1)
    best = min(o.evaluate([1, 0]).f_value, o.evaluate([0, 1]).f_value)
    assert o.evaluate_fractional([0.5, 0.5]).f_value <= best + 1e-9


# ---------------------------------------------------------------- facility


def test_facility_examples():
    o = FacilityOracle(FacilityInstance([0.0], [[2.0]], [10.0], [5.0]), Regularizer.bigm(10))
    assert o.evaluate([1]).f_value == pytest.approx(10.0, abs=1e-9)
    o = FacilityOracle(FacilityInstance([0.0, 0.0], [[1.0], [1.0]], [3.0, 3.0], [5.0]), Regularizer.bigm(10))
    r = o.evaluate([1, 0])
    assert not r.feasible and r.cut.kind == MONOTONE
    # reads z_2 >= 1
    np.testing.assert_allclose(r.cut.coefficients, [0, 1])
    assert r.cut.constant == pytest.approx(1)


def test_facility_rejects_insufficient_capacity():
    with pytest.raises(ValueError):
        FacilityInstance([1.0], [[1.0]], [2.0], [5.0])


def test_facility_two_by_two_matches_lp_enumeration():
    from scipy.optimize import linprog

    cost = np.array([[1.0, 4.0], [3.0, 1.5]])
    u, d = np.array([6.0, 6.0]), np.array([4.0, 5.0])
    o = FacilityOracle(FacilityInstance([0.0, 0.0], cost, u, d), Regularizer.bigm(100))
    for z in itertools.product((0, 1), repeat=2):
        r = o.evaluate(np.array(z, float))
        open_ = [i for i in range(2) if z[i]]
        if sum(u[open_]) < d.sum():
            assert not r.feasible
            continue
        # variables x_ij for open i
        c = np.concatenate([cost[i] for i in open_])
        A_eq = np.hstack([np.eye(2)] * len(open_))
        A_ub = np.kron(np.eye(len(open_)), np.ones((1, 2)))
        ref = linprog(c, A_ub=A_ub, b_ub=u[open_], A_eq=A_eq, b_eq=d)
        assert r.f_value == pytest.approx(ref.fun, abs=1e-7)


# ---------------------------------------------------------------- network design


def test_netdesign_single_edge():
    inst = NetDesignInstance(2, [0], [1], [[-1.0, 1.0]], [[2.0]], [0.0], [10.0])
    o = NetDesignOracle(inst, Regularizer.bigm(1.0))
    assert o.evaluate([1]).f_value == pytest.approx(1.0, abs=1e-7)
    np.testing.assert_allclose(o.evaluate([1]).x_star, [1.0], atol=1e-7)
    r = o.evaluate([0])
    assert not r.feasible and r.cut.kind == MONOTONE


@pytest.mark.parametrize("family", ["netdesign", "erm"])
def test_h_oracle_weak_and_strong_duality(family):
    rng = np.random.default_rng(5)
    inst = small_instance(family, 2)
    o, Z = inst.build(ridge_for(inst))
    pts = [np.asarray(p, float) for p in Z.points()][:12]
    for _ in range(5):
        alpha = o.h_project(o.h_start() + rng.normal(size=o.h_start().size))
        h, _ = o.h_eval(alpha)
        for p in pts:
            r = o.evaluate(p)
            if r.feasible:
                assert h - p @ o.coordinate_conjugate(alpha) <= r.f_value + 1e-6 * (1 + abs(r.f_value))
    for p in pts:
        r = o.evaluate(p)
        if r.feasible:
            h, _ = o.h_eval(r.alpha_star)
            q = h - p @ o.coordinate_conjugate(r.alpha_star)
            assert q == pytest.approx(r.f_value, abs=1e-5 * (1 + abs(r.f_value)))


# ---------------------------------------------------------------- unit commitment


def test_uc_examples():
    o = UCOracle(UCInstance([1.0], [0.0], [2.0], [1.0]), Regularizer.bigm(2))
    r = o.evaluate([1])
    assert r.f_value == pytest.approx(0.5, abs=1e-9)
    np.testing.assert_allclose(r.x_star.ravel(), [1.0], atol=1e-9)
    o = UCOracle(UCInstance([1.0, 1.0], [0.0, 0.0], [2.0, 2.0], [2.0]), Regularizer.bigm(2))
    assert o.evaluate([1, 1]).f_value == pytest.approx(1.0, abs=1e-9)
    r = UCOracle(UCInstance([1.0, 1.0], [0.0, 0.0], [2.0, 2.0], [3.0]), Regularizer.bigm(2)).evaluate([1, 0])
    assert not r.feasible and r.cut.kind == MONOTONE
    with pytest.raises(ValueError):
        UCInstance([1.0], [0.0], [2.0], [3.0])


def test_water_fill_multiplier():
    x, pi = water_fill(np.array([1.0]), np.array([0.0]), np.array([2.0]), 1.0)
    assert x[0] == pytest.approx(1.0, abs=1e-9)
    assert pi == pytest.approx(1.0, abs=1e-8)


def test_uc_matches_qp_dispatch():
    rng = np.random.default_rng(6)
    inst = UCInstance(rng.uniform(0.5, 2, 3), rng.uniform(0, 3, 3), rng.uniform(2, 5, 3), rng.uniform(1, 6, 2))
    o = UCOracle(inst, Regularizer.bigm(10))
    for z in itertools.product((0, 1), repeat=6):
        z = np.array(z, float)
        r = o.evaluate(z)
        if not r.feasible:
            on_cap = (z.reshape(2, 3) * inst.u).sum(axis=1)
            assert np.any(on_cap < inst.demand - 1e-12)
            continue
        ref = 0.0
        for t, row in enumerate(z.reshape(2, 3)):
            on = np.flatnonzero(row)
            qp = QuadraticProgram(c=inst.b[on], P=np.diag(inst.a[on]), C=-np.ones((1, on.size)), g=[-inst.demand[t]], hi=inst.u[on])
            ref += qp_solve(qp).objective
        assert r.f_value == pytest.approx(ref, abs=1e-6)


# ---------------------------------------------------------------- BQP


def test_bqp_examples():
    o = BQPOracle(BQPInstance(np.array([[1.0, -2.0], [-2.0, 1.0]])))
    assert o.evaluate([1, 1]).f_value == pytest.approx(-2.0)
    assert o.evaluate([0, 0]).f_value == 0.0
    with pytest.raises(ValueError):
        BQPOracle(BQPInstance(np.eye(2)), RIDGE1)


def test_bqp_fortet_relaxation_bounds_binary_minimum():
    from logicmio.feasible import FeasibleSet

    o = BQPOracle(BQPInstance(np.array([[1.0, -2.0], [-2.0, 1.0]])))
    binary_min = min(o.evaluate(np.array(z, float)).f_value for z in itertools.product((0, 1), repeat=2))
    rel = kelley_solve(o, FeasibleSet(2))
    assert rel.lower_bound <= binary_min + 1e-9
    # the LP value is convex in z and matches the integer points
    half = o.evaluate_fractional([0.5, 0.5]).f_value
    assert half <= 0.5 * (o.evaluate([1, 1]).f_value + o.evaluate([0, 0]).f_value) + 1e-9


def test_bqp_max_sense_is_negated():
    o = BQPOracle(BQPInstance(np.array([[1.0, 2.0], [2.0, -3.0]]), "max"))
    r = o.evaluate([1, 0])
    assert r.f_value == pytest.approx(-1.0)
    assert o.to_user_sense(r.f_value) == pytest.approx(1.0)


# ---------------------------------------------------------------- cross-family properties


def _regs(inst):
    if inst.family == "bqp":
        return [None]
    return [None, ridge_for(inst)]


CASES = [(fam, seed) for fam in FAMILY_NAMES for seed in range(3)]


@pytest.mark.parametrize("family,seed", CASES)
def test_cut_validity_and_tightness(family, seed):
    inst = small_instance(family, seed)
    for reg in _regs(inst):
        o, Z = inst.build(reg)
        pts = [np.asarray(p, float) for p in Z.points()]
        results = [o.evaluate(p) for p in pts]
        vals = np.array([r.f_value if r.feasible else np.inf for r in results])
        for p, r in zip(pts, results):
            if r.feasible:
                assert r.cut.origin == OPTIMALITY
                assert r.cut.value(p) == pytest.approx(r.f_value, abs=1e-7 * (1 + abs(r.f_value)))
                if family != "bqp":
                    assert np.all(r.cut.coefficients <= 1e-12)
                cut_vals = np.array([r.cut.value(q) for q in pts])
                ok = np.isinf(vals) | (vals >= cut_vals - 1e-6 * (1 + np.abs(cut_vals)))
                assert ok.all()
            else:
                assert r.cut.origin == FEASIBILITY
                assert r.cut.violation(p) > 0
                # no feasible point is cut off
                for q, v in zip(pts, vals):
                    if np.isfinite(v):
                        assert r.cut.violation(q) <= 1e-9
                if r.cut.kind == MONOTONE:
                    for q, v in zip(pts, vals):
                        if np.all(q <= p):
                            assert np.isinf(v)


@pytest.mark.parametrize("family", REGULARIZED)
def test_primal_dual_agreement(family):
    inst = small_instance(family, 7)
    rng = np.random.default_rng(0)
    for reg in _regs(inst):
        o, Z = inst.build(reg)
        for p in list(Z.points())[:20]:
            r = o.evaluate(np.asarray(p, float))
            if not r.feasible:
                continue
            scale = 1 + abs(r.f_value)
            assert o.primal_objective(p, r.x_star) == pytest.approx(r.f_value, abs=1e-6 * scale)
            assert o.dual_value(p, r) == pytest.approx(r.f_value, abs=1e-6 * scale)
        zf = np.clip(rng.uniform(0.2, 1, Z.n), Z.lower, Z.upper)
        r = o.evaluate_fractional(zf)
        if r.feasible:
            assert o.primal_objective(zf, r.x_star) == pytest.approx(r.f_value, abs=1e-6 * (1 + abs(r.f_value)))


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_fractional_agrees_with_binary(family):
    o, Z = small_instance(family, 4).build()
    for p in list(Z.points())[:10]:
        a, b = o.evaluate(np.asarray(p, float)), o.evaluate_fractional(np.asarray(p, float))
        assert a.status == b.status
        if a.feasible:
            assert b.f_value == pytest.approx(a.f_value, abs=1e-8 * (1 + abs(a.f_value)))


@given(seed=st.integers(0, 500), gamma=st.floats(0.2, 5))
@settings(max_examples=25, deadline=None)
def test_erm_fractional_cut_is_global_underestimator(seed, gamma):
    rng = np.random.default_rng(seed)
    o = ERMOracle(ERMInstance(rng.normal(size=(8, 4)), rng.normal(size=8)), Regularizer.ridge(gamma))
    zf = rng.uniform(size=4)
    cut = o.evaluate_fractional(zf).cut
    for p in itertools.product((0, 1), repeat=4):
        p = np.array(p, float)
        assert o.evaluate(p).f_value >= cut.value(p) - 1e-7


def test_make_oracle_dispatch():
    inst = small_instance("erm", 0)
    o = make_oracle("erm", inst.instance)
    assert o.reg.is_ridge
    with pytest.raises(ValueError):
        make_oracle("knapsack", inst.instance)
