"""Binary quadratic optimisation ``min z'Qz`` (maximisation instances are negated).

The convex extension used for cuts is the value of the linearised program
in which each product z_i z_j is replaced by y_ij with the standard
linearisation rows (y_ij >= z_i + z_j - 1 for positive entries,
y_ij <= z_i and y_ij <= z_j for negative ones).  Its value has the closed form

    sum_i Q_ii z_i + sum_{i<j} 2 Q_ij^+ max(0, z_i + z_j - 1) - 2 |Q_ij^-| min(z_i, z_j)

and a subgradient is assembled term by term.  Cut coefficients can have
either sign here because the coupling is linear rather than regularised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import LinearProgram, Status, simplex_solve
from ..regularizers import Regularizer
from .base import FEASIBLE, InstanceError, Oracle, SubproblemResult, optimality_cut

SENSES = ("min", "max")


@dataclass
class BQPInstance:
    Q: np.ndarray
    sense: str = "min"

    def __post_init__(self):
        self.Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        n = self.Q.shape[0]
        if self.Q.shape != (n, n):
            raise InstanceError("Q must be square")
        if not np.allclose(self.Q, self.Q.T, atol=1e-12, rtol=0):
            raise InstanceError("Q must be symmetric")
        if self.sense not in SENSES:
            raise InstanceError(f"sense must be one of {SENSES}")

    @property
    def sign(self) -> float:
        return 1.0 if self.sense == "min" else -1.0


class BQPOracle(Oracle):
    family = "bqp"

    def __init__(self, instance: BQPInstance, reg: Regularizer = None, c=None):
        reg = Regularizer.bigm(1.0) if reg is None else reg
        if not reg.is_bigm:
            raise ValueError("binary quadratic instances use the linear coupling (bigM, M=1)")
        super().__init__(reg)
        self.inst = instance
        self.Qm = instance.sign * instance.Q
        self.n = self.Qm.shape[0]
        self.c = np.zeros(self.n) if c is None else np.asarray(c, dtype=float)
        iu, ju = np.triu_indices(self.n, 1)
        keep = self.Qm[iu, ju] != 0
        self._pairs = (iu[keep], ju[keep], 2.0 * self.Qm[iu[keep], ju[keep]])

    @classmethod
    def natural_regularizer(cls, instance=None) -> Regularizer:
        return Regularizer.bigm(1.0)

    def to_user_sense(self, value: float) -> float:
        """Convert an internal (minimisation) objective to the instance's sense."""
        return self.inst.sign * value

    def extension(self, z) -> float:
        z = np.asarray(z, dtype=float)
        i, j, q = self._pairs
        pos = q > 0
        val = float(np.diag(self.Qm) @ z)
        val += float(np.sum(q[pos] * np.maximum(0.0, z[i[pos]] + z[j[pos]] - 1.0)))
        val += float(np.sum(q[~pos] * np.minimum(z[i[~pos]], z[j[~pos]])))
        return val

    def subgradient(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        g = np.diag(self.Qm).copy()
        i, j, q = self._pairs
        for a, b, w in zip(i, j, q):
            if w > 0:
                # kink at z_a + z_b = 1 charged to the tight row y >= z_a + z_b - 1
                if z[a] + z[b] - 1.0 >= -1e-12:
                    g[a] += w
                    g[b] += w
            else:
                g[a if z[a] <= z[b] else b] += w  # a < b, so ties go to the lower index
        return g

    def linearized_lp(self, z):
        """Solve the linearised program at fixed z with the simplex kernel."""
        z = np.asarray(z, dtype=float)
        i, j, q = self._pairs
        pos = q > 0
        npair = q.size
        rows, rhs = [], []
        for idx in range(npair):
            row = np.zeros(npair)
            if pos[idx]:
                row[idx] = -1.0
                rows.append(row)
                rhs.append(1.0 - z[i[idx]] - z[j[idx]])
            else:
                row[idx] = 1.0
                rows.append(row)
                rhs.append(z[i[idx]])
                rows.append(row.copy())
                rhs.append(z[j[idx]])
        lo = np.where(pos, 0.0, -np.inf)
        lp = LinearProgram(c=q, C=np.array(rows).reshape(-1, npair), g=rhs, lo=lo)
        sol = simplex_solve(lp)
        if sol.status is not Status.OPTIMAL:
            raise RuntimeError(f"linearised LP failed: {sol.status}")
        return float(np.diag(self.Qm) @ z) + sol.objective, sol

    def _solve(self, z, binary):
        if binary:
            f = float(z @ self.Qm @ z)
        else:
            f, _ = self.linearized_lp(z)
        g = self.subgradient(z)
        return SubproblemResult(FEASIBLE, f, z.copy(), g, optimality_cut(z, f, g))

    def primal_objective(self, z, x) -> float:
        return self.extension(z)

    def dual_value(self, z, result) -> float:
        return self.extension(z)
