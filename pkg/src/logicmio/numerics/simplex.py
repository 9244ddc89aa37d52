"""Two-phase bounded-variable primal simplex (dense, revised form).

Inequality rows get a slack column, every row gets an artificial column for
phase 1.  Pricing is Dantzig's rule; after ``2 * (rows + cols)`` consecutive
degenerate pivots the method falls back to Bland's rule, which it keeps until
a nondegenerate pivot happens.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .problems import KernelSolution, LinearProgram, Status

INFEAS_TOL = 1e-7
PIVOT_TOL = 1e-11

_LOWER, _UPPER, _FREE, _BASIC = 0, 1, 2, 3


def simplex_solve(lp: LinearProgram, tol: float = 1e-9, max_pivots: int | None = None) -> KernelSolution:
    if not (np.all(np.isfinite(lp.c)) and np.all(np.isfinite(lp.A)) and np.all(np.isfinite(lp.C))):
        raise ValueError("LP data must be finite")
    n, mA, mC = lp.n, lp.A.shape[0], lp.C.shape[0]
    m = mA + mC
    if np.any(np.isinf(lp.lo) & (lp.lo > 0)) or np.any(np.isinf(lp.hi) & (lp.hi < 0)):
        return KernelSolution(Status.INFEASIBLE)

    # columns: x (n) | slacks (mC) | artificials (m)
    N = n + mC + m
    A = np.zeros((m, N))
    A[:mA, :n] = lp.A
    A[mA:, :n] = lp.C
    A[mA:, n : n + mC] = np.eye(mC)
    rhs = np.concatenate([lp.b, lp.g])
    lo = np.concatenate([lp.lo, np.zeros(mC), np.zeros(m)])
    hi = np.concatenate([lp.hi, np.full(mC, np.inf), np.full(m, np.inf)])

    status = np.empty(N, dtype=int)
    x = np.zeros(N)
    for j in range(n):
        if np.isfinite(lo[j]):
            status[j], x[j] = _LOWER, lo[j]
        elif np.isfinite(hi[j]):
            status[j], x[j] = _UPPER, hi[j]
        else:
            status[j], x[j] = _FREE, 0.0
    status[n:] = _LOWER

    resid = rhs - A[:, :n] @ x[:n]
    basis = np.empty(m, dtype=int)
    for i in range(m):
        art = n + mC + i
        if i >= mA and resid[i] >= 0:
            basis[i] = n + (i - mA)
            hi[art] = 0.0
        else:
            A[i, art] = 1.0 if resid[i] >= 0 else -1.0
            basis[i] = art
    status[basis] = _BASIC

    limit = max_pivots if max_pivots is not None else 50 * (m + n + mC)
    cost1 = np.zeros(N)
    cost1[n + mC :] = 1.0
    cost1[[n + mC + i for i in range(m) if hi[n + mC + i] == 0.0]] = 0.0

    state = dict(pivots=0)
    res = _iterate(A, rhs, lo, hi, cost1, x, status, basis, tol, limit, state)
    if isinstance(res, str) and res == "limit":
        return KernelSolution(Status.ITERATION_LIMIT, iterations=state["pivots"])
    phase1 = float(cost1 @ x)
    if phase1 > INFEAS_TOL * max(1.0, np.max(np.abs(rhs), initial=0.0)):
        y = _duals(A, basis, cost1)
        return KernelSolution(Status.INFEASIBLE, certificate=y, objective=phase1, iterations=state["pivots"])

    # artificials are frozen at zero from here on
    hi[n + mC :] = 0.0
    for j in range(n + mC, N):
        if status[j] != _BASIC:
            status[j], x[j] = _LOWER, 0.0
    cost2 = np.concatenate([lp.c, np.zeros(mC + m)])
    res = _iterate(A, rhs, lo, hi, cost2, x, status, basis, tol, limit, state)
    if isinstance(res, str) and res == "limit":
        return KernelSolution(Status.ITERATION_LIMIT, iterations=state["pivots"])
    if isinstance(res, np.ndarray):
        return KernelSolution(Status.UNBOUNDED, certificate=res[:n], iterations=state["pivots"])

    y = _duals(A, basis, cost2)
    d = cost2 - A.T @ y
    d[basis] = 0.0
    xs = x[:n].copy()
    return KernelSolution(
        Status.OPTIMAL,
        x=xs,
        objective=float(lp.c @ xs),
        eq_duals=-y[:mA],
        ineq_duals=np.maximum(-y[mA:], 0.0),
        bound_duals=d[:n],
        iterations=state["pivots"],
        info={"basis": basis.copy(), "status": status[:n].copy()},
    )


def _duals(A, basis, cost):
    B = A[:, basis]
    if B.size == 0:
        return np.zeros(0)
    return np.linalg.solve(B.T, cost[basis])


def _iterate(A, rhs, lo, hi, cost, x, status, basis, tol, limit, state):
    m, N = A.shape
    degenerate = 0
    bland = False
    nonbasic_mask = np.ones(N, dtype=bool)
    while True:
        nonbasic_mask[:] = True
        nonbasic_mask[basis] = False
        if m:
            B = A[:, basis]
            lu = sla.lu_factor(B)
            xN = np.where(nonbasic_mask, x, 0.0)
            x[basis] = sla.lu_solve(lu, rhs - A @ xN)
            y = sla.lu_solve(lu, cost[basis], trans=1)
        else:
            y = np.zeros(0)
        d = cost - A.T @ y

        movable = nonbasic_mask & (hi > lo)
        up = movable & ((status == _LOWER) | (status == _FREE)) & (d < -tol)
        down = movable & ((status == _UPPER) | (status == _FREE)) & (d > tol)
        eligible = up | down
        if not eligible.any():
            return "optimal"
        if state["pivots"] >= limit:
            return "limit"
        if bland:
            j = int(np.flatnonzero(eligible)[0])
        else:
            score = np.where(eligible, np.abs(d), -1.0)
            j = int(np.argmax(score))
        direction = 1.0 if up[j] else -1.0

        delta = -direction * sla.lu_solve(lu, A[:, j]) if m else np.zeros(0)
        step = hi[j] - lo[j]
        leave = -1
        leave_to = None
        xb = x[basis]
        for i in range(m):
            di = delta[i]
            if di < -PIVOT_TOL and np.isfinite(lo[basis[i]]):
                t = max((xb[i] - lo[basis[i]]) / -di, 0.0)
                bound = _LOWER
            elif di > PIVOT_TOL and np.isfinite(hi[basis[i]]):
                t = max((hi[basis[i]] - xb[i]) / di, 0.0)
                bound = _UPPER
            else:
                continue
            if t < step - 1e-12 or (leave >= 0 and abs(t - step) <= 1e-12 and basis[i] < basis[leave]):
                step, leave, leave_to = t, i, bound
        if not np.isfinite(step):
            ray = np.zeros(N)
            ray[j] = direction
            ray[basis] = delta
            return ray

        state["pivots"] += 1
        x[j] += direction * step
        if m:
            x[basis] += step * delta
        if step <= 1e-12:
            degenerate += 1
            if degenerate >= 2 * N:
                bland = True
        else:
            degenerate = 0
            bland = False
        if leave < 0:
            status[j] = _UPPER if direction > 0 else _LOWER
            if status[j] == _UPPER and not np.isfinite(hi[j]):
                status[j] = _FREE
            continue
        out = basis[leave]
        x[out] = lo[out] if leave_to == _LOWER else hi[out]
        status[out] = leave_to
        basis[leave] = j
        status[j] = _BASIC


def simplex_solve_tall(lp: LinearProgram, tol: float = 1e-9) -> KernelSolution:
    """Solve an LP with many inequality rows and few columns through its dual.

    Requires no equality rows and finite lower bounds.  With x = lo + w the
    dual reads  min (g - C lo) @ lam + (hi - lo) @ nu  s.t.  -C' lam - nu <= c,
    and the multipliers of its rows recover w.  The basis of the dual has one
    row per primal column, which keeps pivots cheap for cutting-plane masters.
    """
    n = lp.n
    if lp.A.shape[0] or not np.all(np.isfinite(lp.lo)):
        return simplex_solve(lp, tol)
    C, mC = lp.C, lp.C.shape[0]
    fin = np.flatnonzero(np.isfinite(lp.hi))
    E = np.zeros((n, fin.size))
    E[fin, np.arange(fin.size)] = 1.0
    cost = np.concatenate([lp.g - C @ lp.lo, lp.hi[fin] - lp.lo[fin]])
    dual = LinearProgram(c=cost, C=-np.hstack([C.T, E]), g=lp.c)
    sol = simplex_solve(dual, tol)
    if sol.status is Status.UNBOUNDED:
        return KernelSolution(Status.INFEASIBLE, certificate=sol.certificate[:mC], iterations=sol.iterations)
    if sol.status is not Status.OPTIMAL:
        # dual infeasible: primal is unbounded or infeasible; let the primal method decide
        return simplex_solve(lp, tol)
    x = lp.lo + sol.ineq_duals
    lam = sol.x[:mC]
    return KernelSolution(
        Status.OPTIMAL,
        x=x,
        objective=float(lp.c @ x),
        eq_duals=np.zeros(0),
        ineq_duals=lam,
        bound_duals=lp.c + C.T @ lam,
        iterations=sol.iterations,
        info={"via": "dual"},
    )
