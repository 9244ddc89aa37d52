"""Multi-commodity network design with quadratic flow costs.

Each candidate arc e carries commodity flows f^j_e >= 0 with aggregate
x_e = sum_j f^j_e.  Flow conservation is ``inc @ f^j = b^j`` where ``inc``
has -1 at the tail and +1 at the head of every arc, so b^j is net inflow.
Capacities are soft: the excess max(0, x_e - u_e) is charged ``penalty``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import LinearProgram, QuadraticProgram, Status, dual_objective, qp_solve, simplex_solve
from ..regularizers import Regularizer, perspective_term
from .base import BINARY_TOL, InstanceError, Oracle, infeasible, monotone_cut
from .feascuts import PHASE1_TOL, elastic_cut

# ADMM budget per subproblem; degenerate flows fall back to a reduced-accuracy iterate
QP_MAX_ITER = 20_000


@dataclass
class NetDesignInstance:
    num_nodes: int
    tails: np.ndarray
    heads: np.ndarray
    demands: np.ndarray  # k x num_nodes, net inflow per commodity
    Q: np.ndarray
    d: np.ndarray
    capacity: np.ndarray
    penalty: float = 1000.0
    build_cost: np.ndarray = None

    def __post_init__(self):
        self.num_nodes = int(self.num_nodes)
        self.tails = np.asarray(self.tails, dtype=int).ravel()
        self.heads = np.asarray(self.heads, dtype=int).ravel()
        n = self.tails.size
        if self.heads.size != n:
            raise InstanceError("tails and heads must have equal length")
        for arr in (self.tails, self.heads):
            if n and (arr.min() < 0 or arr.max() >= self.num_nodes):
                raise InstanceError("arc endpoint out of range")
        if np.any(self.tails == self.heads):
            raise InstanceError("self-loops are not allowed")
        self.demands = np.atleast_2d(np.asarray(self.demands, dtype=float))
        if self.demands.shape[1] != self.num_nodes:
            raise InstanceError(f"demand rows must have {self.num_nodes} entries")
        if np.any(np.abs(self.demands.sum(axis=1)) > 1e-9):
            raise InstanceError("every commodity's demands must sum to zero")
        self.Q = np.asarray(self.Q, dtype=float).reshape(n, n)
        if not np.allclose(self.Q, self.Q.T, atol=1e-10) or (n and np.linalg.eigvalsh(self.Q).min() < -1e-9):
            raise InstanceError("Q must be symmetric positive semidefinite")
        self.d = np.asarray(self.d, dtype=float).ravel()
        self.capacity = np.asarray(self.capacity, dtype=float).ravel()
        if self.d.size != n or self.capacity.size != n:
            raise InstanceError("per-arc vectors must have one entry per arc")
        self.penalty = float(self.penalty)
        if self.penalty < 0:
            raise InstanceError("capacity penalty must be nonnegative")
        self.build_cost = np.zeros(n) if self.build_cost is None else np.asarray(self.build_cost, dtype=float).ravel()
        if self.build_cost.size != n:
            raise InstanceError("build costs must have one entry per arc")

    @property
    def num_arcs(self) -> int:
        return self.tails.size

    @property
    def num_commodities(self) -> int:
        return self.demands.shape[0]

    def incidence(self, arcs=None) -> np.ndarray:
        arcs = np.arange(self.num_arcs) if arcs is None else np.asarray(arcs, dtype=int)
        inc = np.zeros((self.num_nodes, arcs.size))
        inc[self.tails[arcs], np.arange(arcs.size)] = -1.0
        inc[self.heads[arcs], np.arange(arcs.size)] = 1.0
        return inc

    def total_supply(self) -> float:
        return float(np.sum(np.maximum(self.demands, 0.0)))


class NetDesignOracle(Oracle):
    family = "netdesign"
    supports_h = True

    def __init__(self, instance: NetDesignInstance, reg: Regularizer, c=None):
        super().__init__(reg)
        self.inst = instance
        self.n = instance.num_arcs
        self.c = instance.build_cost.copy() if c is None else np.asarray(c, dtype=float)

    @classmethod
    def natural_regularizer(cls, instance=None) -> Regularizer:
        return Regularizer.bigm(1.0 if instance is None else max(instance.total_supply(), 1e-9))

    # -- problem assembly -------------------------------------------------
    def _blocks(self, arcs, linear_shift=None):
        """QP over [f^1 | ... | f^k | t] restricted to ``arcs``."""
        inst = self.inst
        a, k = arcs.size, inst.num_commodities
        E = np.tile(np.eye(a), (1, k))  # aggregate x = E f
        inc = inst.incidence(arcs)
        A = np.kron(np.eye(k), inc)
        A = np.hstack([A, np.zeros((A.shape[0], a))])
        b = inst.demands.ravel()
        C = np.hstack([E, -np.eye(a)])
        g = inst.capacity[arcs]
        lin = inst.d[arcs] if linear_shift is None else inst.d[arcs] - linear_shift
        cvec = np.concatenate([np.tile(lin, k), np.full(a, inst.penalty)])
        return E, A, b, C, g, cvec

    def _routable(self, arcs, z) -> bool:
        """Exact feasibility test by simplex phase 1 (capacities are soft, M z is not)."""
        inst = self.inst
        k = inst.num_commodities
        A = np.kron(np.eye(k), inst.incidence(arcs))
        C = g = None
        if self.reg.is_bigm:
            C = np.tile(np.eye(arcs.size), (1, k))
            g = self.reg.M * z[arcs]
        sol = simplex_solve(LinearProgram(c=np.zeros(A.shape[1]), A=A, b=inst.demands.ravel(), C=C, g=g))
        return sol.status is Status.OPTIMAL

    # -- evaluation ---------------------------------------------------------
    def _solve(self, z, binary):
        inst = self.inst
        S = np.flatnonzero(z > BINARY_TOL)
        if not self._routable(S, z):
            return self._infeasible(z, binary)
        a, k = S.size, inst.num_commodities
        E, A, b, C, g, cvec = self._blocks(S)
        Qs = inst.Q[np.ix_(S, S)]
        hi = np.full(k * a + a, np.inf)
        if self.reg.is_ridge:
            Qs = Qs + np.diag(1.0 / (self.reg.gamma * z[S]))
        else:
            C = np.vstack([C, np.hstack([E, np.zeros((a, a))])])
            g = np.concatenate([g, self.reg.M * z[S]])
        Ef = np.hstack([E, np.zeros((a, a))])
        P = Ef.T @ Qs @ Ef
        prob = QuadraticProgram(c=cvec, P=P, A=A, b=b, C=C, g=g, hi=hi)
        sol = qp_solve(prob, tol=1e-10, max_iter=QP_MAX_ITER)
        if sol.status is Status.INFEASIBLE:
            return self._infeasible(z, binary)
        if sol.status is not Status.OPTIMAL:
            raise RuntimeError(f"flow subproblem failed: {sol.status}")
        flows = np.maximum(sol.x[: k * a].reshape(k, a), 0.0)
        x = np.zeros(self.n)
        x[S] = flows.sum(axis=0)
        nu = np.zeros(self.n)
        nu[S] = sol.ineq_duals[:a]
        y = sol.eq_duals.reshape(k, inst.num_nodes)
        inc = inst.incidence()
        grad = inst.Q @ x + inst.d + nu
        rho = grad[None, :] + y @ inc  # k x n reduced costs per commodity
        alpha = np.minimum(rho.min(axis=0), 0.0)
        if self.reg.is_ridge:
            alpha[S] = -x[S] / (self.reg.gamma * z[S])
        return self.feasible_result(z, sol.objective, x, alpha, kernel=(prob, sol), flows=flows, arcs=S)

    def _infeasible(self, z, binary):
        if binary or self.reg.is_ridge:
            return infeasible(z, monotone_cut((z > BINARY_TOL).astype(float)))
        inst, n, k = self.inst, self.n, self.inst.num_commodities
        A = np.kron(np.eye(k), inst.incidence())
        G = np.tile(np.eye(n), (1, k))
        phi, cut = elastic_cut(A, inst.demands.ravel(), np.zeros((0, k * n)), np.zeros(0), np.full(k * n, np.inf), G, np.arange(n), np.full(n, self.reg.M), z, n)
        if phi <= PHASE1_TOL:
            raise RuntimeError("flow subproblem reported infeasible but the phase-1 LP is feasible")
        return infeasible(z, cut, phase1=phi)

    # -- objective pieces -----------------------------------------------------
    def smooth_value(self, x) -> float:
        inst = self.inst
        return float(0.5 * x @ inst.Q @ x + inst.d @ x + inst.penalty * np.sum(np.maximum(0.0, x - inst.capacity)))

    def primal_objective(self, z, x) -> float:
        z = np.asarray(z, dtype=float)
        val = self.smooth_value(x)
        if self.reg.is_ridge:
            return val + sum(perspective_term(self.reg, float(a), float(b)) for a, b in zip(x, z))
        if np.any(x > self.reg.M * z + 1e-9):
            return np.inf
        return val

    def dual_value(self, z, result) -> float:
        prob, sol = result.info["kernel"]
        return dual_objective(prob, sol)

    # -- h capability -----------------------------------------------------
    def h_start(self):
        return np.zeros(self.n)

    def h_step_scale(self):
        return max(float(np.max(np.abs(self.inst.d), initial=0.0)), 1.0)

    def h_project(self, alpha):
        # reduced costs of the coupled columns are nonpositive at every optimum
        return np.minimum(np.asarray(alpha, dtype=float), 0.0)

    def h_eval(self, alpha):
        """inf_x g(x) - alpha @ x over all arcs; returns (value, x*)."""
        inst = self.inst
        alpha = np.asarray(alpha, dtype=float)
        arcs = np.arange(self.n)
        k = inst.num_commodities
        E, A, b, C, g, cvec = self._blocks(arcs, linear_shift=alpha)
        Ef = np.hstack([E, np.zeros((self.n, self.n))])
        prob = QuadraticProgram(c=cvec, P=Ef.T @ inst.Q @ Ef, A=A, b=b, C=C, g=g)
        sol = qp_solve(prob, tol=1e-10, max_iter=QP_MAX_ITER)
        if sol.status is Status.UNBOUNDED:
            return -np.inf, None
        if sol.status is not Status.OPTIMAL:
            raise RuntimeError(f"h evaluation failed: {sol.status}")
        x = np.maximum(sol.x[: k * self.n].reshape(k, self.n), 0.0).sum(axis=0)
        return sol.objective, x
