"""Unit commitment with quadratic generation costs.

z has one entry per (period, unit), laid out period-major: ``z[t * n_units + i]``.
Each period's dispatch is solved by water-filling on the demand multiplier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..regularizers import Regularizer, conjugate, perspective_term
from .base import BINARY_TOL, FEASIBILITY, MONOTONE, Cut, InstanceError, Oracle, infeasible

BISECT_TOL = 1e-10


@dataclass
class UCInstance:
    a: np.ndarray
    b: np.ndarray
    u: np.ndarray
    demand: np.ndarray
    fixed: np.ndarray = None  # commitment cost per unit and period

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float).ravel()
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.u = np.asarray(self.u, dtype=float).ravel()
        self.demand = np.asarray(self.demand, dtype=float).ravel()
        n = self.a.size
        if self.b.size != n or self.u.size != n:
            raise InstanceError("a, b and u must have one entry per unit")
        if np.any(self.a <= 0):
            raise InstanceError("quadratic coefficients a_i must be positive")
        if np.any(self.u <= 0):
            raise InstanceError("unit capacities must be positive")
        if np.any(self.demand < 0):
            raise InstanceError("demands must be nonnegative")
        if np.any(self.demand > self.u.sum() + 1e-12):
            raise InstanceError("some period's demand exceeds total capacity")
        T = self.demand.size
        if self.fixed is None:
            self.fixed = np.zeros((T, n))
        self.fixed = np.asarray(self.fixed, dtype=float)
        if self.fixed.ndim == 1 and self.fixed.size == n:
            self.fixed = np.tile(self.fixed, (T, 1))
        if self.fixed.shape != (T, n):
            raise InstanceError("fixed costs must be per unit or per (period, unit)")

    @property
    def units(self) -> int:
        return self.a.size

    @property
    def periods(self) -> int:
        return self.demand.size


def water_fill(a, b, ub, D, tol=BISECT_TOL):
    """min sum 0.5 a x^2 + b x  s.t. sum x >= D, 0 <= x <= ub.  Returns (x, pi)."""

    def x_of(pi):
        return np.clip((pi - b) / a, 0.0, ub)

    x0 = x_of(0.0)
    if x0.sum() >= D - tol:
        return x0, 0.0
    lo = max(0.0, float(np.min(b, initial=0.0)))
    hi = float(np.max(b + a * ub, initial=0.0))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        s = x_of(mid).sum()
        if abs(s - D) <= tol:
            lo = hi = mid
            break
        if s < D:
            lo = mid
        else:
            hi = mid
    pi = 0.5 * (lo + hi)
    # exact refinement on the identified free set
    x = x_of(pi)
    free = (x > 0) & (x < ub)
    if free.any():
        fixed_sum = x[~free].sum()
        cand = (D - fixed_sum + np.sum(b[free] / a[free])) / np.sum(1.0 / a[free])
        xc = x_of(cand)
        if abs(xc.sum() - D) <= abs(x.sum() - D):
            pi, x = cand, xc
    return x, float(pi)


class UCOracle(Oracle):
    family = "uc"

    def __init__(self, instance: UCInstance, reg: Regularizer, c=None):
        super().__init__(reg)
        self.inst = instance
        self.T, self.units = instance.periods, instance.units
        self.n = self.T * self.units
        self.c = instance.fixed.ravel().copy() if c is None else np.asarray(c, dtype=float)
        self.M_unit = np.minimum(reg.M, instance.u) if reg.is_bigm else None

    @classmethod
    def natural_regularizer(cls, instance=None) -> Regularizer:
        return Regularizer.bigm(1.0 if instance is None else float(instance.u.max()))

    def coordinate_conjugate(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        if self.reg.is_bigm:
            return conjugate(self.reg, alpha, M=np.tile(self.M_unit, self.T))
        return conjugate(self.reg, alpha)

    def _period_box(self, zt):
        inst = self.inst
        on = zt > BINARY_TOL
        if self.reg.is_bigm:
            ub = self.M_unit * zt
            a = inst.a.copy()
        else:
            ub = np.where(on, inst.u, 0.0)
            with np.errstate(divide="ignore"):
                a = inst.a + np.where(on, 1.0 / (self.reg.gamma * np.maximum(zt, BINARY_TOL)), 0.0)
        return a, ub, on

    def _solve(self, z, binary):
        inst, n_u = self.inst, self.units
        Z = z.reshape(self.T, n_u)
        x = np.zeros((self.T, n_u))
        alpha = np.zeros((self.T, n_u))
        pis = np.zeros(self.T)
        total = 0.0
        for t in range(self.T):
            a, ub, on = self._period_box(Z[t])
            D = inst.demand[t]
            if ub.sum() < D - 1e-9:
                return infeasible(z, self._feasibility_cut(z, t, binary), period=t)
            xt, pi = water_fill(a, inst.b, ub, D)
            x[t], pis[t] = xt, pi
            total += float(np.sum(0.5 * a * xt * xt + inst.b * xt))
            rho = inst.a * xt + inst.b - pi
            al = np.minimum(rho, 0.0)
            if self.reg.is_ridge:
                al[on] = -xt[on] / (self.reg.gamma * Z[t][on])
            alpha[t] = al
        return self.feasible_result(z, total, x.ravel(), alpha.ravel(), pi=pis)

    def _feasibility_cut(self, z, t, binary):
        n_u = self.units
        coef = np.zeros(self.n)
        block = slice(t * n_u, (t + 1) * n_u)
        if binary or self.reg.is_ridge:
            # switching units off in period t can only lower its capacity
            coef[block] = (z[block] <= BINARY_TOL).astype(float)
            return Cut(1.0, coef, FEASIBILITY, z.copy(), MONOTONE)
        coef[block] = self.M_unit
        return Cut(self.inst.demand[t], coef, FEASIBILITY, z.copy(), "Capacity")

    def primal_objective(self, z, x) -> float:
        inst = self.inst
        X = np.asarray(x, dtype=float).reshape(self.T, self.units)
        Z = np.asarray(z, dtype=float).reshape(self.T, self.units)
        val = float(np.sum(0.5 * inst.a * X * X + inst.b * X))
        if self.reg.is_ridge:
            for t in range(self.T):
                val += sum(perspective_term(self.reg, float(v), float(w)) for v, w in zip(X[t], Z[t]))
            return val
        if np.any(X > self.M_unit * Z + 1e-9):
            return np.inf
        return val

    def dual_value(self, z, result) -> float:
        """Lagrangian of the demand rows evaluated at the returned multipliers."""
        inst = self.inst
        Z = np.asarray(z, dtype=float).reshape(self.T, self.units)
        val = 0.0
        for t, pi in enumerate(result.info["pi"]):
            a, ub, _ = self._period_box(Z[t])
            xt = np.clip((pi - inst.b) / a, 0.0, ub)
            val += float(np.sum(0.5 * a * xt * xt + inst.b * xt - pi * xt) + pi * inst.demand[t])
        return val
