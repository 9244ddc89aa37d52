"""Shared instance factories for the test suite."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from logicmio.io import generators as gen
from logicmio.regularizers import Regularizer

FAMILY_NAMES = ("erm", "portfolio", "facility", "netdesign", "uc", "bqp")
REGULARIZED = ("erm", "portfolio", "facility", "netdesign", "uc")


def small_instance(family: str, seed: int):
    """A seeded InstanceFile small enough to enumerate (n between 6 and 9)."""
    rng = np.random.default_rng(10_000 + seed)
    if family == "erm":
        p = int(rng.integers(6, 9))
        return gen.random_erm(int(rng.integers(12, 25)), p, seed, k=int(rng.integers(2, 4)))
    if family == "portfolio":
        return gen.random_portfolio(int(rng.integers(6, 9)), seed, k=int(rng.integers(2, 4)))
    if family == "facility":
        return gen.random_facility(int(rng.integers(5, 8)), int(rng.integers(4, 8)), seed)
    if family == "netdesign":
        return gen.random_netdesign(3, seed, budget_growth=1.0)
    if family == "uc":
        return gen.random_uc(int(rng.integers(2, 4)), 3, seed, alpha=float(rng.choice([0.3, 1.0, 3.0])))
    if family == "bqp":
        return gen.random_bqp(int(rng.integers(6, 10)), seed, k=None if seed % 2 else int(rng.integers(3, 6)))
    raise ValueError(family)


def ridge_for(inst) -> Regularizer:
    if inst.family == "netdesign":
        return Regularizer.ridge(inst.meta["ridge_gamma"])
    return Regularizer.ridge(1.0)


def binary_points(Z):
    """All binary points of Z in lexicographic order."""
    for bits in itertools.product((0, 1), repeat=Z.n):
        z = np.array(bits, dtype=float)
        if Z.contains(z):
            yield z


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
