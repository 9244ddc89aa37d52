"""Cut storage and the LP rows it induces over the variables (z, eta)."""

from __future__ import annotations

import numpy as np

from .feasible import FeasibleSet
from .numerics import LinearProgram
from .oracles.base import FEASIBILITY, OPTIMALITY, Cut


class CutPool:
    """Global pool of optimality and feasibility cuts, deduplicated exactly."""

    def __init__(self, n: int, cuts=()):
        self.n = int(n)
        self.cuts: list[Cut] = []
        self._seen = set()
        for cut in cuts:
            self.add(cut)

    def add(self, cut: Cut) -> bool:
        if cut.coefficients.shape != (self.n,):
            raise ValueError(f"cut has {cut.coefficients.size} coefficients, pool expects {self.n}")
        key = (cut.origin, round(cut.constant, 12), tuple(np.round(cut.coefficients, 12)))
        if key in self._seen:
            return False
        self._seen.add(key)
        self.cuts.append(cut)
        return True

    def __len__(self):
        return len(self.cuts)

    def __iter__(self):
        return iter(self.cuts)

    @property
    def optimality(self):
        return [c for c in self.cuts if c.origin == OPTIMALITY]

    @property
    def feasibility(self):
        return [c for c in self.cuts if c.origin == FEASIBILITY]

    def model_value(self, z) -> float:
        """max over optimality cuts at z (the outer approximation of f)."""
        opt = self.optimality
        if not opt:
            return -np.inf
        return max(c.value(z) for c in opt)

    def excludes(self, z, tol=1e-9) -> bool:
        return any(c.violation(z) > tol for c in self.feasibility)

    def eta_lower(self, zlo, zhi) -> float:
        """Largest box minimum of a single optimality cut; redundant for the LP,
        but it keeps eta's bound at the scale of the data."""
        best = -np.inf
        for cut in self.optimality:
            a = cut.coefficients
            best = max(best, cut.constant + float(np.sum(np.minimum(a * zlo, a * zhi))))
        return best

    def master_lp(self, Z: FeasibleSet, c, eta_floor: float, lower=None, upper=None) -> LinearProgram:
        """min c@z + eta subject to every cut, the cardinality row and the box.

        ``lower``/``upper`` tighten the box (branching fixings).
        """
        n = self.n
        rows, rhs = [], []
        for cut in self.cuts:
            if cut.origin == OPTIMALITY:
                rows.append(np.append(cut.coefficients, -1.0))
                rhs.append(-cut.constant)
            else:
                rows.append(np.append(-cut.coefficients, 0.0))
                rhs.append(-cut.constant)
        if Z.k is not None:
            rows.append(np.append(np.ones(n), 0.0))
            rhs.append(float(Z.k))
        zlo = np.asarray(Z.lower if lower is None else lower, dtype=float)
        zhi = np.asarray(Z.upper if upper is None else upper, dtype=float)
        lo = np.append(zlo, max(eta_floor, self.eta_lower(zlo, zhi))).astype(float)
        hi = np.append(zhi, np.inf).astype(float)
        C = np.array(rows).reshape(-1, n + 1)
        return LinearProgram(c=np.append(np.asarray(c, dtype=float), 1.0), C=C, g=rhs, lo=lo, hi=hi)
