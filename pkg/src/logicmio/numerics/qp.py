"""Operator-splitting (ADMM) solver for dense convex QPs.

The problem is put in the form ``min 0.5 x'Px + q'x  s.t.  l <= K x <= u``
with K stacking the equality rows, the inequality rows and one identity row
per variable with a finite bound.  Iterates follow the standard relaxed ADMM
scheme for this splitting.  Every few checks the current active set is used to
solve the reduced KKT system exactly ("polishing"); the polished point is
returned as soon as it satisfies the KKT conditions to ``tol``.  Infeasibility
is detected from the divergence of successive dual iterates.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
from scipy.optimize import nnls

from .problems import KernelSolution, QuadraticProgram, Status, kkt_residuals

SIGMA = 1e-6
RELAX = 1.6
EQ_RHO_SCALE = 1e3
MAX_ADAPT = 10
# residual level at which an unpolished iterate is still returned once iterations run out
FALLBACK_TOL = 1e-6


class _Form:
    def __init__(self, qp: QuadraticProgram):
        n = qp.n
        bounded = np.flatnonzero(np.isfinite(qp.lo) | np.isfinite(qp.hi))
        rows = [qp.A, qp.C, np.eye(n)[bounded]]
        self.K = np.vstack(rows)
        self.l = np.concatenate([qp.b, np.full(qp.C.shape[0], -np.inf), qp.lo[bounded]])
        self.u = np.concatenate([qp.b, qp.g, qp.hi[bounded]])
        self.mA, self.mC = qp.A.shape[0], qp.C.shape[0]
        self.bounded = bounded
        self.is_eq = np.zeros(self.K.shape[0], dtype=bool)
        self.is_eq[: self.mA] = True
        fixed = np.isfinite(self.l) & (self.l == self.u)
        self.is_eq |= fixed


def _unpack(qp, form, x, yK):
    n = qp.n
    eq = yK[: form.mA]
    ineq = np.maximum(yK[form.mA : form.mA + form.mC], 0.0)
    mu = np.zeros(n)
    yb = yK[form.mA + form.mC :]
    lo, hi = qp.lo[form.bounded], qp.hi[form.bounded]
    # a multiplier can only sit on a finite side
    yb = np.where((yb > 0) & ~np.isfinite(hi), 0.0, yb)
    yb = np.where((yb < 0) & ~np.isfinite(lo), 0.0, yb)
    mu[form.bounded] = -yb
    return eq, ineq, mu


def _finish(qp, form, x, yK, iters, polished):
    eq, ineq, mu = _unpack(qp, form, x, yK)
    return KernelSolution(
        Status.OPTIMAL,
        x=x,
        objective=qp.objective(x),
        eq_duals=eq,
        ineq_duals=ineq,
        bound_duals=mu,
        iterations=iters,
        info={"polished": polished},
    )


def _signed_multipliers(qp, form, x, act, lower):
    """Multipliers of the active rows with the right signs, by nonnegative least squares.

    Needed when active rows are linearly dependent: the minimum-norm solution
    of the KKT system can then carry a wrong sign although a valid one exists.
    """
    K = form.K
    eq = form.is_eq[act]
    # columns: +row for "upper"-type (y >= 0), -row for "lower"-type (y <= 0), both for equalities
    cols, owners, signs = [], [], []
    for j, r in enumerate(act):
        for s in ((1.0, -1.0) if eq[j] else ((-1.0,) if lower[r] else (1.0,))):
            cols.append(s * K[r])
            owners.append(r)
            signs.append(s)
    if not cols:
        return None
    B = np.array(cols).T
    rhs = -(qp.P @ x + qp.c)
    w, _ = nnls(B, rhs, maxiter=50 * B.shape[1])
    y = np.zeros(K.shape[0])
    np.add.at(y, owners, np.array(signs) * w)
    return y


def _polish(qp, form, x, z, y, tol):
    K, l, u = form.K, form.l, form.u
    n = qp.n
    lower = (z - l < -y) | form.is_eq
    upper = (u - z < y) & ~form.is_eq
    scale0 = np.max(np.abs(qp.c), initial=0.0)
    for _ in range(10):
        act = np.flatnonzero(lower | upper)
        Ka = K[act]
        target = np.where(lower[act], l[act], u[act])
        kkt = np.block([[qp.P, Ka.T], [Ka, np.zeros((act.size, act.size))]])
        rhs = np.concatenate([-qp.c, target])
        sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        xp = sol[:n]
        yp = np.zeros(K.shape[0])
        yp[act] = sol[n:]
        # redundant active rows leave the multipliers non-unique; drop rows whose
        # multiplier has the wrong sign for their side and solve again
        wrong = np.zeros(K.shape[0], dtype=bool)
        wrong[act] = ~form.is_eq[act] & np.where(lower[act], yp[act] > 1e-12, yp[act] < -1e-12)
        yp = np.where(form.is_eq, yp, np.where(lower, np.minimum(yp, 0.0), np.where(upper, np.maximum(yp, 0.0), 0.0)))
        cand = _finish(qp, form, xp, yp, 0, True)
        res = kkt_residuals(qp, cand)
        scale = 1.0 + max(scale0, np.max(np.abs(np.nan_to_num(target, posinf=0, neginf=0)), initial=0.0))
        if max(res.values()) <= tol * scale:
            return xp, yp
        if wrong.any():
            ys = _signed_multipliers(qp, form, xp, act, lower)
            if ys is not None:
                res = kkt_residuals(qp, _finish(qp, form, xp, ys, 0, True))
                if max(res.values()) <= tol * scale:
                    return xp, ys
        # degenerate rows (active with a zero multiplier) missing from the guess
        Kx = K @ xp
        with np.errstate(invalid="ignore"):
            low_v = (Kx < l - tol * scale) & ~lower
            up_v = (Kx > u + tol * scale) & ~upper
        if not (wrong.any() or low_v.any() or up_v.any()):
            return None
        lower = (lower & ~wrong) | low_v
        upper = (upper & ~wrong) | up_v
    return None


def qp_solve(qp: QuadraticProgram, tol: float = 1e-8, max_iter: int = 200_000, rho: float = 0.1) -> KernelSolution:
    form = _Form(qp)
    K, l, u = form.K, form.l, form.u
    n, m = qp.n, K.shape[0]
    P, q = qp.P, qp.c

    if n == 0:
        ok = np.all(np.abs(qp.b) <= 1e-12) and np.all(qp.g >= -1e-12)
        if not ok:
            return KernelSolution(Status.INFEASIBLE)
        return _finish(qp, form, np.zeros(0), np.zeros(m), 0, False)

    if m == 0:
        try:
            x = np.linalg.solve(P, -q) if n else np.zeros(0)
        except np.linalg.LinAlgError:
            x = np.linalg.lstsq(P, -q, rcond=None)[0]
        if np.linalg.norm(P @ x + q, np.inf) > 1e-8 * (1 + np.linalg.norm(q, np.inf)):
            return KernelSolution(Status.UNBOUNDED)
        return _finish(qp, form, x, np.zeros(0), 0, False)

    rho_vec = np.where(form.is_eq, rho * EQ_RHO_SCALE, rho)

    def factor(rv):
        M = P + SIGMA * np.eye(n) + K.T @ (rv[:, None] * K)
        return sla.cho_factor(M)

    chol = factor(rho_vec)
    x = np.zeros(n)
    z = np.clip(np.zeros(m), l, u)
    y = np.zeros(m)
    eps_inf = 1e-9
    next_polish = 10
    adaptations = 0
    best = (np.inf, x, y)
    scale = 1.0 + max(np.max(np.abs(q), initial=0.0), np.max(np.abs(np.nan_to_num(np.concatenate([l, u]), posinf=0, neginf=0))))
    for it in range(1, max_iter + 1):
        rhs = SIGMA * x - q + K.T @ (rho_vec * z - y)
        xt = sla.cho_solve(chol, rhs)
        zt = K @ xt
        x_new = RELAX * xt + (1 - RELAX) * x
        zh = RELAX * zt + (1 - RELAX) * z
        z_new = np.clip(zh + y / rho_vec, l, u)
        y_new = y + rho_vec * (zh - z_new)
        dy = y_new - y
        dx = x_new - x
        x, z, y = x_new, z_new, y_new

        if it % 10:
            continue
        # infeasibility certificates
        ndy = np.max(np.abs(dy))
        if ndy > 1e-12:
            with np.errstate(invalid="ignore"):
                support = np.sum(np.where(dy > 0, u * dy, 0.0)) + np.sum(np.where(dy < 0, l * dy, 0.0))
            if np.max(np.abs(K.T @ dy)) <= eps_inf * ndy and support < -eps_inf * ndy:
                return KernelSolution(Status.INFEASIBLE, certificate=dy / ndy, iterations=it)
        ndx = np.max(np.abs(dx))
        if ndx > 1e-12 and q @ dx < -eps_inf * ndx and np.max(np.abs(P @ dx)) <= eps_inf * ndx:
            Kdx = K @ dx
            ok = np.all(np.where(np.isfinite(u), Kdx <= eps_inf * ndx, True)) and np.all(
                np.where(np.isfinite(l), Kdx >= -eps_inf * ndx, True)
            )
            if ok:
                return KernelSolution(Status.UNBOUNDED, certificate=dx / ndx, iterations=it)

        r_prim = np.max(np.abs(K @ x - z))
        r_dual = np.max(np.abs(P @ x + q + K.T @ y))
        if max(r_prim, r_dual) < best[0]:
            best = (max(r_prim, r_dual), x.copy(), y.copy())
        if it >= next_polish or max(r_prim, r_dual) <= tol * scale:
            next_polish = int(next_polish * 1.6) + 10
            pol = _polish(qp, form, x, z, y, tol)
            if pol is not None:
                return _finish(qp, form, pol[0], pol[1], it, True)
            if max(r_prim, r_dual) <= tol * scale:
                return _finish(qp, form, x, y, it, False)
        if it % 100 == 0 and adaptations < MAX_ADAPT and r_prim > 0 and r_dual > 0:
            Kx = np.max(np.abs(K @ x))
            dual_scale = max(np.max(np.abs(P @ x)), np.max(np.abs(K.T @ y)), np.max(np.abs(q)), 1e-12)
            ratio = np.sqrt((r_prim / max(Kx, np.max(np.abs(z)), 1e-12)) / (r_dual / dual_scale))
            if ratio > 5 or ratio < 0.2:
                # damped: large swings make the iterates oscillate between regimes
                rho_vec = np.clip(rho_vec * np.clip(ratio, 0.1, 10.0), 1e-6, 1e8)
                chol = factor(rho_vec)
                adaptations += 1
    if best[0] <= FALLBACK_TOL * scale:
        sol = _finish(qp, form, best[1], best[2], max_iter, False)
        sol.info["reduced_accuracy"] = True
        return sol
    return KernelSolution(Status.ITERATION_LIMIT, x=x, iterations=max_iter)
