"""Sparse empirical risk minimisation: least squares and hinge loss.

The reported dual vector lives in sample space (one entry per observation).
Feature j is coupled to z_j through ``X[:, j] @ alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import LinearProgram, QuadraticProgram, Status, cg_solve, qp_solve, simplex_solve
from ..regularizers import Regularizer, conjugate, perspective_term
from .base import BINARY_TOL, Oracle, SubproblemResult

LOSSES = ("OLS", "SVM")


@dataclass
class ERMInstance:
    X: np.ndarray
    y: np.ndarray
    loss: str = "OLS"

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")
        if self.X.shape[0] != self.y.size:
            raise ValueError(f"X has {self.X.shape[0]} rows but y has {self.y.size} entries")
        if self.loss == "SVM" and not np.all(np.isin(self.y, (-1.0, 1.0))):
            raise ValueError("hinge loss needs labels in {-1, +1}")


class ERMOracle(Oracle):
    family = "erm"

    def __init__(self, instance: ERMInstance, reg: Regularizer, c=None):
        super().__init__(reg)
        self.inst = instance
        self.X, self.y = instance.X, instance.y
        self.n = self.X.shape[1]
        self.c = np.zeros(self.n) if c is None else np.asarray(c, dtype=float)
        self.supports_h = instance.loss == "OLS"

    @classmethod
    def natural_regularizer(cls, instance=None) -> Regularizer:
        return Regularizer.ridge(1.0)

    # -- dual map -------------------------------------------------------
    def coupled(self, alpha):
        return self.X.T @ np.asarray(alpha, dtype=float)

    def coupled_adjoint(self, v):
        return self.X @ np.asarray(v, dtype=float)

    # -- h capability (least squares only) --------------------------------
    def h_start(self):
        self._require_h()
        return np.zeros(self.y.size)

    def h_eval(self, theta):
        """h(theta) = inf_u 0.5||y - u||^2 - u @ theta, attained at u = y + theta."""
        self._require_h()
        theta = np.asarray(theta, dtype=float)
        return float(-0.5 * theta @ theta - self.y @ theta), self.y + theta

    def h_maximizer(self):
        self._require_h()
        return -self.y.copy()

    h_strong_concavity = 1.0

    def h_step_scale(self):
        return max(float(np.linalg.norm(self.y)), 1e-12)

    def alpha_bound(self):
        return 2.0 * float(np.linalg.norm(self.y)) if self.inst.loss == "OLS" else None

    def _require_h(self):
        if not self.supports_h:
            from .base import Unsupported

            raise Unsupported("h is exposed for the least-squares loss only")

    # -- objective pieces -------------------------------------------------
    def loss_value(self, w) -> float:
        u = self.X @ w
        if self.inst.loss == "OLS":
            r = self.y - u
            return 0.5 * float(r @ r)
        return float(np.sum(np.maximum(0.0, 1.0 - self.y * u)))

    def primal_objective(self, z, w) -> float:
        z = np.asarray(z, dtype=float)
        val = self.loss_value(w)
        if self.reg.is_ridge:
            return val + sum(perspective_term(self.reg, float(wj), float(zj)) for wj, zj in zip(w, z))
        if np.any(np.abs(w) > self.reg.M * z + 1e-9):
            return np.inf
        return val

    def dual_value(self, z, result: SubproblemResult) -> float:
        theta = result.alpha_star
        if self.inst.loss == "OLS":
            h = -0.5 * theta @ theta - self.y @ theta
        else:
            h = -float(theta @ self.y)
        return float(h - np.asarray(z, dtype=float) @ conjugate(self.reg, self.coupled(theta)))

    # -- solve ------------------------------------------------------------
    def _solve(self, z, binary):
        if self.reg.is_ridge:
            if self.inst.loss == "OLS":
                return self._ols_ridge(z)
            return self._svm_ridge(z)
        if self.inst.loss == "OLS":
            return self._ols_bigm(z)
        return self._svm_bigm(z)

    def _ols_ridge(self, z):
        X, y, g = self.X, self.y, self.reg.gamma
        scale = g * z

        def matvec(v):
            return v + X @ (scale * (X.T @ v))

        a = cg_solve(matvec, y, tol=1e-13, max_iter=20 * max(y.size, 1))
        w = scale * (X.T @ a)
        f = 0.5 * float(y @ a)
        return self.feasible_result(z, f, w, -a)

    def _ols_bigm(self, z):
        X, y, M = self.X, self.y, self.reg.M
        S = np.flatnonzero(z > BINARY_TOL)
        w = np.zeros(self.n)
        if S.size:
            XS = X[:, S]
            qp = QuadraticProgram(c=-(XS.T @ y), P=XS.T @ XS, lo=-M * z[S], hi=M * z[S])
            sol = qp_solve(qp, tol=1e-10)
            if sol.status is not Status.OPTIMAL:
                raise RuntimeError(f"box QP failed: {sol.status}")
            w[S] = sol.x
        theta = X @ w - y
        return self.feasible_result(z, self.loss_value(w), w, theta)

    def _svm_ridge(self, z):
        X, y, g = self.X, self.y, self.reg.gamma
        YX = y[:, None] * X
        K = g * (YX * z) @ YX.T
        beta = _box_dual_ascent(K)
        w = g * z * (YX.T @ beta)
        f = float(beta.sum() - 0.5 * beta @ K @ beta)
        return self.feasible_result(z, f, w, -beta * y)

    def _svm_bigm(self, z):
        X, y, M = self.X, self.y, self.reg.M
        nobs = y.size
        S = np.flatnonzero(z > BINARY_TOL)
        k = S.size
        cvec = np.concatenate([np.zeros(k), np.ones(nobs)])
        C = np.hstack([-(y[:, None] * X[:, S]), -np.eye(nobs)])
        lo = np.concatenate([-M * z[S], np.zeros(nobs)])
        hi = np.concatenate([M * z[S], np.full(nobs, np.inf)])
        sol = simplex_solve(LinearProgram(c=cvec, C=C, g=-np.ones(nobs), lo=lo, hi=hi))
        if sol.status is not Status.OPTIMAL:
            raise RuntimeError(f"hinge LP failed: {sol.status}")
        w = np.zeros(self.n)
        w[S] = sol.x[:k]
        lam = np.clip(sol.ineq_duals, 0.0, 1.0)
        return self.feasible_result(z, self.loss_value(w), w, -lam * y)


def _box_dual_ascent(K, sweeps: int = 500, tol: float = 1e-12):
    """max e@b - 0.5 b@K@b over [0, 1]^n by coordinate ascent, then an exact polish."""
    n = K.shape[0]
    beta = np.zeros(n)
    grad = np.ones(n)  # e - K beta
    diag = np.diag(K).copy()
    for sweep in range(sweeps):
        biggest = 0.0
        for i in range(n):
            if diag[i] <= 1e-15:
                new = 1.0 if grad[i] > 0 else beta[i]
            else:
                new = min(1.0, max(0.0, beta[i] + grad[i] / diag[i]))
            step = new - beta[i]
            if step:
                beta[i] = new
                grad -= step * K[:, i]
                biggest = max(biggest, abs(step))
        if sweep % 5 == 4 or biggest < 1e-9:
            polished = _polish_box(K, beta, grad, tol)
            if polished is not None:
                return polished
        if biggest < 1e-14:
            break
    qp = QuadraticProgram(c=-np.ones(n), P=K, lo=np.zeros(n), hi=np.ones(n))
    sol = qp_solve(qp, tol=1e-11)
    if sol.status is not Status.OPTIMAL:
        raise RuntimeError(f"hinge dual failed: {sol.status}")
    return np.clip(sol.x, 0.0, 1.0)


def _polish_box(K, beta, grad, tol):
    n = K.shape[0]
    at0 = (beta <= 1e-9) & (grad <= 0)
    at1 = (beta >= 1 - 1e-9) & (grad >= 0)
    F = np.flatnonzero(~(at0 | at1))
    b = np.where(at1, 1.0, 0.0)
    if F.size:
        rhs = 1.0 - K[F][:, ~np.isin(np.arange(n), F)] @ b[~np.isin(np.arange(n), F)]
        bF, *_ = np.linalg.lstsq(K[np.ix_(F, F)], rhs, rcond=None)
        b[F] = bF
    if np.any(b < -1e-10) or np.any(b > 1 + 1e-10):
        return None
    b = np.clip(b, 0.0, 1.0)
    g = 1.0 - K @ b
    scale = 1.0 + np.max(np.abs(np.diag(K)), initial=0.0)
    ok_free = np.all(np.abs(g[F]) <= tol * scale * 10) if F.size else True
    ok0 = np.all(g[b <= 0.0] <= 1e-10 * scale)
    ok1 = np.all(g[b >= 1.0] >= -1e-10 * scale)
    return b if (ok_free and ok0 and ok1) else None
