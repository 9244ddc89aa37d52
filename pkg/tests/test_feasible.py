import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logicmio.feasible import EmptyFeasibleSet, FeasibleSet


def test_contains_examples():
    Z = FeasibleSet(2, k=1)
    assert Z.contains([1, 0])
    assert not Z.contains([1, 1])
    assert not FeasibleSet(2, lower=[1, 0]).contains([0, 1])
    assert not Z.contains([0.5, 0])
    with pytest.raises(ValueError):
        Z.contains([1, 0, 0])


def test_constructor_errors():
    with pytest.raises(EmptyFeasibleSet):
        FeasibleSet(2, lower=[1, 0], upper=[0, 1])
    with pytest.raises(EmptyFeasibleSet):
        FeasibleSet(3, lower=[1, 1, 0], k=1)
    with pytest.raises(ValueError):
        FeasibleSet(2, lower=[0, 0, 0])


def test_linear_minimize_examples():
    z, v = FeasibleSet(3, k=1).linear_minimize([-1, 2, -3])
    assert z.tolist() == [0, 0, 1] and v == -3
    z, v = FeasibleSet(3).linear_minimize([-1, 2, -3])
    assert z.tolist() == [1, 0, 1] and v == -4
    z, v = FeasibleSet(3).linear_minimize([1, 2, 3])
    assert z.tolist() == [0, 0, 0] and v == 0


def test_restore_feasibility_examples():
    Z = FeasibleSet(2, k=1)
    assert Z.restore_feasibility([1, 1], [5, 1]).tolist() == [1, 0]
    assert Z.restore_feasibility([0, 1], [5, 1]).tolist() == [0, 1]
    Z3 = FeasibleSet(3, lower=[1, 0, 0], k=1)
    assert Z3.restore_feasibility([1, 1, 1], [0, 9, 9]).tolist() == [1, 0, 0]


def test_points_enumeration_matches_filter():
    Z = FeasibleSet(4, lower=[0, 1, 0, 0], upper=[1, 1, 0, 1], k=2)
    brute = [list(b) for b in itertools.product((0, 1), repeat=4) if Z.contains(np.array(b))]
    assert [p.tolist() for p in Z.points()] == brute


def test_dict_round_trip():
    Z = FeasibleSet(3, lower=[1, 0, 0], k=2)
    assert FeasibleSet.from_dict(Z.to_dict()) == Z
    with pytest.raises(ValueError):
        FeasibleSet.from_dict({"n": 2, "budget": 1})


@st.composite
def sets_and_costs(draw):
    n = draw(st.integers(1, 9))
    lower = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    upper = [max(l, draw(st.integers(0, 1))) for l in lower]
    k = draw(st.one_of(st.none(), st.integers(sum(lower), n)))
    costs = draw(st.lists(st.floats(-5, 5, allow_nan=False), min_size=n, max_size=n))
    return FeasibleSet(n, lower, upper, k), np.array(costs)


@given(sets_and_costs())
@settings(max_examples=150)
def test_linear_minimize_is_exact(data):
    Z, costs = data
    z, v = Z.linear_minimize(costs)
    assert Z.contains(z)
    best = min(float(costs @ p) for p in Z.points())
    assert v == pytest.approx(best, abs=1e-9)


@given(sets_and_costs(), st.data())
@settings(max_examples=150)
def test_restore_feasibility_properties(data, draw):
    Z, priority = data
    z = np.maximum(np.array(draw.draw(st.lists(st.integers(0, 1), min_size=Z.n, max_size=Z.n))), Z.lower)
    z = np.minimum(z, Z.upper)
    out = Z.restore_feasibility(z, priority)
    assert Z.contains(out)
    assert np.all(out >= Z.lower)
    assert out.sum() <= z.sum()
    assert np.all(out <= z)
