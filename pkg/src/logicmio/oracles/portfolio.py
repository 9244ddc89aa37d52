"""Cardinality-constrained mean-variance portfolio selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..numerics import LinearProgram, QuadraticProgram, Status, dual_objective, qp_solve, simplex_solve
from ..regularizers import Regularizer, conjugate, perspective_term
from .base import BINARY_TOL, Oracle, exclusion_cut, infeasible, monotone_cut
from .feascuts import PHASE1_TOL, elastic_cut


@dataclass
class PortfolioInstance:
    mu: np.ndarray
    Sigma: np.ndarray
    sigma: float = 1.0
    A: Optional[np.ndarray] = None
    l: Optional[np.ndarray] = None
    u: Optional[np.ndarray] = None

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float).ravel()
        n = self.mu.size
        self.Sigma = np.asarray(self.Sigma, dtype=float)
        if self.Sigma.shape != (n, n):
            raise ValueError(f"Sigma must be {n}x{n}")
        if not np.allclose(self.Sigma, self.Sigma.T, atol=1e-10):
            raise ValueError("Sigma must be symmetric")
        if np.linalg.eigvalsh(self.Sigma).min() < -1e-9:
            raise ValueError("Sigma must be positive semidefinite")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.A is None:
            self.A = np.zeros((0, n))
            self.l = np.zeros(0)
            self.u = np.zeros(0)
        else:
            self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
            if self.A.shape[1] != n:
                raise ValueError("side-constraint matrix has the wrong number of columns")
            m = self.A.shape[0]
            self.l = np.full(m, -np.inf) if self.l is None else np.asarray(self.l, dtype=float).ravel()
            self.u = np.full(m, np.inf) if self.u is None else np.asarray(self.u, dtype=float).ravel()
            if self.l.shape != (m,) or self.u.shape != (m,):
                raise ValueError("side-constraint bounds have the wrong length")


class PortfolioOracle(Oracle):
    family = "portfolio"

    def __init__(self, instance: PortfolioInstance, reg: Regularizer, c=None):
        super().__init__(reg)
        self.inst = instance
        self.n = instance.mu.size
        self.c = np.zeros(self.n) if c is None else np.asarray(c, dtype=float)
        # x <= 1 is implied by the budget row, so the box never needs to exceed it
        self.M_col = min(reg.M, 1.0) if reg.is_bigm else None

    @classmethod
    def natural_regularizer(cls, instance=None) -> Regularizer:
        return Regularizer.bigm(1.0)

    def coordinate_conjugate(self, alpha):
        return conjugate(self.reg, alpha, M=self.M_col)

    def _side_rows(self, cols):
        A, l, u = self.inst.A, self.inst.l, self.inst.u
        up, dn = np.isfinite(u), np.isfinite(l)
        C = np.vstack([A[up][:, cols], -A[dn][:, cols]])
        g = np.concatenate([u[up], -l[dn]])
        return C, g, np.vstack([A[up], -A[dn]])

    def smooth_value(self, x) -> float:
        return float(0.5 * self.inst.sigma * x @ self.inst.Sigma @ x - self.inst.mu @ x)

    def primal_objective(self, z, x) -> float:
        val = self.smooth_value(x)
        if self.reg.is_ridge:
            return val + sum(perspective_term(self.reg, float(a), float(b)) for a, b in zip(x, z))
        if np.any(x > self.M_col * np.asarray(z) + 1e-9):
            return np.inf
        return val

    def dual_value(self, z, result) -> float:
        qp, sol = result.info["kernel"]
        return dual_objective(qp, sol)

    def _solve(self, z, binary):
        inst, n = self.inst, self.n
        S = np.flatnonzero(z > BINARY_TOL)
        if S.size == 0:
            return infeasible(z, exclusion_cut(z))
        P = inst.sigma * inst.Sigma[np.ix_(S, S)]
        hi = np.full(S.size, np.inf)
        if self.reg.is_ridge:
            P = P + np.diag(1.0 / (self.reg.gamma * z[S]))
        else:
            hi = self.M_col * z[S]
        C, g, Cfull = self._side_rows(S)
        if not self._feasible(S, z, C, g, hi):
            return self._infeasible(z, binary, S)
        qp = QuadraticProgram(c=-inst.mu[S], P=P, A=np.ones((1, S.size)), b=[1.0], C=C, g=g, hi=hi)
        sol = qp_solve(qp, tol=1e-10)
        if sol.status is Status.INFEASIBLE:
            return self._infeasible(z, binary, S)
        if sol.status is not Status.OPTIMAL:
            raise RuntimeError(f"portfolio QP failed: {sol.status}")
        x = np.zeros(n)
        x[S] = np.maximum(sol.x, 0.0)
        rho = inst.sigma * inst.Sigma @ x - inst.mu + sol.eq_duals[0] + Cfull.T @ sol.ineq_duals
        alpha = np.minimum(rho, 0.0)
        if self.reg.is_ridge:
            alpha[S] = -x[S] / (self.reg.gamma * z[S])
        return self.feasible_result(z, sol.objective, x, alpha, kernel=(qp, sol))

    def _feasible(self, S, z, C, g, hi) -> bool:
        if C.shape[0] == 0:
            return bool(np.sum(np.minimum(hi, 1.0)) >= 1.0 - 1e-12)
        sol = simplex_solve(LinearProgram(c=np.zeros(S.size), A=np.ones((1, S.size)), b=[1.0], C=C, g=g, hi=hi))
        return sol.status is Status.OPTIMAL

    def _infeasible(self, z, binary, S):
        if binary or self.reg.is_ridge:
            # shrinking the support only removes points, so every z' <= supp(z) fails as well
            return infeasible(z, monotone_cut((z > BINARY_TOL).astype(float)))
        n = self.n
        C, g, _ = self._side_rows(np.arange(n))
        phi, cut = elastic_cut(np.ones((1, n)), [1.0], C, g, np.full(n, np.inf), np.eye(n), np.arange(n), np.full(n, self.M_col), z, n)
        if phi <= PHASE1_TOL:
            raise RuntimeError("QP reported infeasible but the phase-1 LP is feasible")
        return infeasible(z, cut, phase1=phi)
