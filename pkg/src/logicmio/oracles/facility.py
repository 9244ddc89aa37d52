"""Capacitated facility location.

Continuous columns x_ij (facility i ships to customer j) are tied to z_i.
Fixed opening costs belong to the linear part of the master objective and are
exposed as ``oracle.c``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import LinearProgram, QuadraticProgram, Status, dual_objective, qp_solve, simplex_solve
from ..regularizers import Regularizer, conjugate, perspective_term
from .base import BINARY_TOL, InstanceError, Oracle, infeasible, monotone_cut
from .feascuts import PHASE1_TOL, elastic_cut

# ADMM budget per subproblem; degenerate flows fall back to a reduced-accuracy iterate
QP_MAX_ITER = 20_000


@dataclass
class FacilityInstance:
    fixed: np.ndarray  # opening costs, length n
    cost: np.ndarray  # n x m unit shipping costs
    capacity: np.ndarray  # length n
    demand: np.ndarray  # length m

    def __post_init__(self):
        self.fixed = np.asarray(self.fixed, dtype=float).ravel()
        self.cost = np.atleast_2d(np.asarray(self.cost, dtype=float))
        self.capacity = np.asarray(self.capacity, dtype=float).ravel()
        self.demand = np.asarray(self.demand, dtype=float).ravel()
        n, m = self.cost.shape
        if self.fixed.size != n or self.capacity.size != n:
            raise InstanceError(f"cost matrix is {n}x{m} but fixed/capacity vectors have lengths {self.fixed.size}/{self.capacity.size}")
        if self.demand.size != m:
            raise InstanceError(f"cost matrix has {m} columns but demand has {self.demand.size} entries")
        if np.any(self.demand < 0):
            raise InstanceError("demands must be nonnegative")
        if np.any(self.capacity <= 0):
            raise InstanceError("capacities must be positive")
        if self.capacity.sum() < self.demand.sum() - 1e-9:
            raise InstanceError("total capacity is below total demand: no facility set is feasible")

    @property
    def shape(self):
        return self.cost.shape


class FacilityOracle(Oracle):
    family = "facility"

    def __init__(self, instance: FacilityInstance, reg: Regularizer, c=None):
        super().__init__(reg)
        self.inst = instance
        self.n, self.m = instance.shape
        self.c = instance.fixed.copy() if c is None else np.asarray(c, dtype=float)
        implied = np.minimum(instance.capacity[:, None], instance.demand[None, :])
        self.M_col = np.minimum(reg.M, implied) if reg.is_bigm else None

    @classmethod
    def natural_regularizer(cls, instance=None) -> Regularizer:
        M = 1.0 if instance is None else float(max(instance.capacity.max(), instance.demand.max()))
        return Regularizer.bigm(M)

    def coordinate_conjugate(self, alpha):
        alpha = np.asarray(alpha, dtype=float).reshape(self.n, self.m)
        return conjugate(self.reg, alpha, M=self.M_col).sum(axis=1)

    def primal_objective(self, z, x) -> float:
        x = np.asarray(x, dtype=float).reshape(self.n, self.m)
        z = np.asarray(z, dtype=float)
        val = float(np.sum(self.inst.cost * x))
        if self.reg.is_ridge:
            for i in range(self.n):
                val += sum(perspective_term(self.reg, float(v), float(z[i])) for v in x[i])
            return val
        if np.any(x > self.M_col * z[:, None] + 1e-9):
            return np.inf
        return val

    def dual_value(self, z, result) -> float:
        prob, sol = result.info["kernel"]
        return dual_objective(prob, sol)

    def _solve(self, z, binary):
        inst, n, m = self.inst, self.n, self.m
        S = np.flatnonzero(z > BINARY_TOL)
        if inst.capacity[S].sum() < inst.demand.sum() - 1e-9 and (binary or self.reg.is_ridge):
            return infeasible(z, monotone_cut((z > BINARY_TOL).astype(float)))
        k = S.size
        cvec = inst.cost[S].ravel()
        # equality rows: demand of customer j; inequality rows: capacity of facility i
        A = np.zeros((m, k * m))
        C = np.zeros((k, k * m))
        for a in range(k):
            A[:, a * m : (a + 1) * m] = np.eye(m)
            C[a, a * m : (a + 1) * m] = 1.0
        if self.reg.is_ridge:
            pdiag = np.repeat(1.0 / (self.reg.gamma * z[S]), m)
            prob = QuadraticProgram(c=cvec, P=np.diag(pdiag), A=A, b=inst.demand, C=C, g=inst.capacity[S])
            sol = qp_solve(prob, tol=1e-10, max_iter=QP_MAX_ITER)
        else:
            hi = (self.M_col[S] * z[S][:, None]).ravel()
            prob = LinearProgram(c=cvec, A=A, b=inst.demand, C=C, g=inst.capacity[S], hi=hi)
            sol = simplex_solve(prob)
        if sol.status is Status.INFEASIBLE:
            return self._infeasible(z, binary)
        if sol.status is not Status.OPTIMAL:
            raise RuntimeError(f"transportation subproblem failed: {sol.status}")
        x = np.zeros((n, m))
        x[S] = np.maximum(sol.x.reshape(k, m), 0.0)
        lam = np.zeros(n)
        lam[S] = sol.ineq_duals
        rho = inst.cost + sol.eq_duals[None, :] + lam[:, None]
        alpha = np.minimum(rho, 0.0)
        if self.reg.is_ridge:
            alpha[S] = -x[S] / (self.reg.gamma * z[S][:, None])
        return self.feasible_result(z, sol.objective, x, alpha, kernel=(prob, sol))

    def _infeasible(self, z, binary):
        if binary or self.reg.is_ridge:
            return infeasible(z, monotone_cut((z > BINARY_TOL).astype(float)))
        n, m = self.n, self.m
        A = np.tile(np.eye(m), (1, n))
        C = np.kron(np.eye(n), np.ones((1, m)))
        group = np.repeat(np.arange(n), m)
        phi, cut = elastic_cut(A, self.inst.demand, C, self.inst.capacity, np.full(n * m, np.inf), np.eye(n * m), group, self.M_col.ravel(), z, n)
        if phi <= PHASE1_TOL:
            raise RuntimeError("subproblem reported infeasible but the phase-1 LP is feasible")
        return infeasible(z, cut, phase1=phi)
