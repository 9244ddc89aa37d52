"""Problem carriers and the solution record shared by the LP and QP kernels.

Sign conventions for multipliers (all kernels):

    grad f(x) + A^T eq_duals + C^T ineq_duals - bound_duals = 0

with ``ineq_duals >= 0`` for rows ``C x <= g`` and ``bound_duals`` positive at
an active lower bound, negative at an active upper bound.  ``bound_duals`` are
the reduced costs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


class IterationLimit(RuntimeError):
    pass


def _mat(a, ncols):
    if a is None:
        return np.zeros((0, ncols))
    a = np.asarray(a, dtype=float)
    if a.ndim == 2:
        if a.shape[1] != ncols:
            raise ValueError(f"constraint matrix has {a.shape[1]} columns, expected {ncols}")
        return a
    return a.reshape(-1, ncols)


def _vec(v, n):
    if v is None:
        return np.zeros(n)
    return np.asarray(v, dtype=float).reshape(n)


@dataclass
class LinearProgram:
    """min c@x  s.t. A x = b, C x <= g, lo <= x <= hi."""

    c: np.ndarray
    A: np.ndarray = None
    b: np.ndarray = None
    C: np.ndarray = None
    g: np.ndarray = None
    lo: np.ndarray = None
    hi: np.ndarray = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A = _mat(self.A, n)
        self.b = _vec(self.b, self.A.shape[0])
        self.C = _mat(self.C, n)
        self.g = _vec(self.g, self.C.shape[0])
        self.lo = np.zeros(n) if self.lo is None else np.asarray(self.lo, dtype=float).ravel()
        self.hi = np.full(n, np.inf) if self.hi is None else np.asarray(self.hi, dtype=float).ravel()
        if self.lo.shape != (n,) or self.hi.shape != (n,):
            raise ValueError("bound vectors must match the number of variables")
        if np.any(self.lo > self.hi):
            raise ValueError("lo > hi for some variable")

    @property
    def n(self) -> int:
        return self.c.size


@dataclass
class QuadraticProgram(LinearProgram):
    """min 0.5 x@P@x + c@x with the same constraint blocks as LinearProgram."""

    P: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        n = self.c.size
        self.P = np.zeros((n, n)) if self.P is None else np.asarray(self.P, dtype=float)
        if self.P.shape != (n, n):
            raise ValueError("P must be n x n")
        if not np.allclose(self.P, self.P.T, atol=1e-10, rtol=0):
            raise ValueError("P must be symmetric")

    def objective(self, x) -> float:
        return float(0.5 * x @ self.P @ x + self.c @ x)


@dataclass
class KernelSolution:
    status: Status
    x: Optional[np.ndarray] = None
    objective: float = np.nan
    eq_duals: Optional[np.ndarray] = None
    ineq_duals: Optional[np.ndarray] = None
    bound_duals: Optional[np.ndarray] = None
    certificate: Optional[np.ndarray] = None
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    @property
    def reduced_costs(self):
        return self.bound_duals


def dual_objective(prob: LinearProgram, sol: KernelSolution) -> float:
    """Lagrangian dual value assembled from the returned multipliers."""
    y, lam, mu = sol.eq_duals, sol.ineq_duals, sol.bound_duals
    val = -prob.b @ y - prob.g @ lam
    mu_lo = np.maximum(mu, 0.0)
    mu_hi = np.maximum(-mu, 0.0)
    with np.errstate(invalid="ignore"):
        val += np.sum(np.where(mu_lo > 0, mu_lo * prob.lo, 0.0))
        val -= np.sum(np.where(mu_hi > 0, mu_hi * prob.hi, 0.0))
    if isinstance(prob, QuadraticProgram):
        val -= 0.5 * sol.x @ prob.P @ sol.x
    return float(val)


def kkt_residuals(prob: LinearProgram, sol: KernelSolution) -> dict:
    """Stationarity, primal feasibility and complementarity residuals (inf-norms)."""
    x = sol.x
    grad = prob.c.copy()
    if isinstance(prob, QuadraticProgram):
        grad = grad + prob.P @ x
    stat = grad + prob.A.T @ sol.eq_duals + prob.C.T @ sol.ineq_duals - sol.bound_duals
    feas = 0.0
    if prob.A.shape[0]:
        feas = max(feas, np.max(np.abs(prob.A @ x - prob.b)))
    if prob.C.shape[0]:
        feas = max(feas, np.max(np.maximum(prob.C @ x - prob.g, 0.0)))
    feas = max(feas, np.max(np.maximum(prob.lo - x, 0.0), initial=0.0))
    feas = max(feas, np.max(np.maximum(x - prob.hi, 0.0), initial=0.0))
    comp = 0.0
    if prob.C.shape[0]:
        comp = max(comp, np.max(np.abs(sol.ineq_duals * (prob.C @ x - prob.g))))
        comp = max(comp, np.max(np.maximum(-sol.ineq_duals, 0.0)))
    mu = sol.bound_duals
    # a multiplier on an infinite bound must vanish; score its size directly
    comp = max(comp, np.max(np.where(np.isinf(prob.lo) & (mu > 0), mu, 0.0), initial=0.0))
    comp = max(comp, np.max(np.where(np.isinf(prob.hi) & (mu < 0), -mu, 0.0), initial=0.0))
    with np.errstate(invalid="ignore"):
        lo_gap = np.where((mu > 0) & np.isfinite(prob.lo), mu * (x - prob.lo), 0.0)
        hi_gap = np.where((mu < 0) & np.isfinite(prob.hi), -mu * (prob.hi - x), 0.0)
    comp = max(comp, np.max(np.abs(np.nan_to_num(lo_gap, nan=np.inf)), initial=0.0))
    comp = max(comp, np.max(np.abs(np.nan_to_num(hi_gap, nan=np.inf)), initial=0.0))
    return {"stationarity": float(np.max(np.abs(stat), initial=0.0)), "feasibility": float(feas), "complementarity": float(comp)}
