"""Exhaustive enumeration of Z: the ground truth for exactness checks.

No pruning of any kind; every member of Z is evaluated in lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .feasible import FeasibleSet
from .oracles.base import Oracle

MAX_DIMENSION = 24


class DimensionTooLarge(ValueError):
    pass


@dataclass
class EnumerationResult:
    best_z: Optional[np.ndarray]
    best_value: float
    table: Optional[dict]  # tuple(z) -> c@z + f(z), inf when infeasible
    infeasible_count: int
    evaluated: int

    @property
    def all_infeasible(self) -> bool:
        return self.best_z is None

    @property
    def status(self) -> str:
        return "Infeasible" if self.all_infeasible else "Optimal"


def enumerate_z(oracle: Oracle, Z: FeasibleSet, c=None, retain_table: bool = False) -> EnumerationResult:
    if Z.n > MAX_DIMENSION:
        raise DimensionTooLarge(f"n={Z.n} exceeds the enumeration ceiling of {MAX_DIMENSION}")
    c = oracle.c if c is None else np.asarray(c, dtype=float)
    best_z, best_val = None, np.inf
    table = {} if retain_table else None
    bad = count = 0
    for z in Z.points():
        count += 1
        res = oracle.evaluate(z)
        if res.feasible:
            val = float(c @ z) + res.f_value
        else:
            val = np.inf
            bad += 1
        if table is not None:
            table[tuple(int(v) for v in z)] = val
        # strict comparison: lexicographic order makes the first minimiser win ties
        if val < best_val:
            best_z, best_val = z.copy(), val
    return EnumerationResult(best_z, best_val, table, bad, count)


# the operation is published under the name ``enumerate``; the alias avoids
# shadowing the builtin inside this module
enumerate = enumerate_z  # noqa: A001
