"""The discrete set Z: binary box bounds plus an optional cardinality budget."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


class EmptyFeasibleSet(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FeasibleSet:
    """Z = {z in {0,1}^n : lower <= z <= upper, sum(z) <= k}.

    ``lower`` marks forced-on coordinates, ``upper == 0`` marks forbidden ones.
    """

    n: int
    lower: np.ndarray
    upper: np.ndarray
    k: Optional[int] = None

    def __init__(self, n, lower=None, upper=None, k=None):
        lower = np.zeros(n, dtype=int) if lower is None else np.asarray(lower, dtype=int)
        upper = np.ones(n, dtype=int) if upper is None else np.asarray(upper, dtype=int)
        if lower.shape != (n,) or upper.shape != (n,):
            raise ValueError("bound vectors must have length n")
        if not (np.isin(lower, (0, 1)).all() and np.isin(upper, (0, 1)).all()):
            raise ValueError("bounds must be binary")
        if np.any(lower > upper):
            raise EmptyFeasibleSet("lower bound exceeds upper bound")
        if k is not None:
            k = int(k)
            if not lower.sum() <= k:
                raise EmptyFeasibleSet(f"{lower.sum()} forced coordinates exceed budget k={k}")
            k = min(k, int(upper.sum()))
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "k", k)

    @property
    def free(self) -> np.ndarray:
        return (self.lower == 0) & (self.upper == 1)

    def contains(self, z) -> bool:
        z = np.asarray(z)
        if z.shape != (self.n,):
            raise ValueError(f"expected a vector of length {self.n}, got shape {z.shape}")
        if not np.isin(z, (0, 1)).all():
            return False
        if np.any(z < self.lower) or np.any(z > self.upper):
            return False
        return self.k is None or int(z.sum()) <= self.k

    def contains_relaxed(self, z, tol=1e-9) -> bool:
        z = np.asarray(z, dtype=float)
        if np.any(z < self.lower - tol) or np.any(z > self.upper + tol):
            return False
        return self.k is None or z.sum() <= self.k + tol

    def linear_minimize(self, costs):
        """Minimise costs @ z over Bool(Z); the optimum is a binary vertex."""
        costs = np.asarray(costs, dtype=float)
        if costs.shape != (self.n,):
            raise ValueError("cost vector has wrong length")
        z = self.lower.astype(float).copy()
        free = np.flatnonzero(self.free & (costs < 0))
        # stable sort keeps lower index first on ties
        free = free[np.argsort(costs[free], kind="stable")]
        if self.k is not None:
            free = free[: max(self.k - int(self.lower.sum()), 0)]
        z[free] = 1.0
        return z, float(costs @ z)

    def restore_feasibility(self, z, priority):
        """Switch off the lowest-priority free active coordinates until sum(z) <= k."""
        z = np.asarray(z).astype(int).copy()
        if self.k is None or z.sum() <= self.k:
            return z
        priority = np.asarray(priority, dtype=float)
        droppable = np.flatnonzero((z == 1) & (self.lower == 0))
        droppable = droppable[np.argsort(priority[droppable], kind="stable")]
        excess = int(z.sum()) - self.k
        z[droppable[:excess]] = 0
        return z

    def points(self):
        """Yield every member of Z in lexicographic order."""
        free = np.flatnonzero(self.free)
        base = self.lower.astype(int)
        nfree = len(free)
        budget = None if self.k is None else self.k - int(base.sum())
        for code in range(1 << nfree):
            bits = [(code >> (nfree - 1 - b)) & 1 for b in range(nfree)]
            if budget is not None and sum(bits) > budget:
                continue
            z = base.copy()
            z[free] = bits
            yield z

    def to_dict(self) -> dict:
        out = {"n": self.n, "lower": self.lower.tolist(), "upper": self.upper.tolist()}
        if self.k is not None:
            out["k"] = self.k
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FeasibleSet":
        extra = set(data) - {"n", "lower", "upper", "k"}
        if extra:
            raise ValueError(f"unknown feasible-set fields: {sorted(extra)}")
        n = int(data["n"])
        return cls(n, data.get("lower"), data.get("upper"), data.get("k"))

    def __eq__(self, other):
        return (
            isinstance(other, FeasibleSet)
            and self.n == other.n
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
            and self.k == other.k
        )

    def __repr__(self):
        return f"FeasibleSet(n={self.n}, forced={int(self.lower.sum())}, forbidden={int((self.upper == 0).sum())}, k={self.k})"
