"""Feasibility cuts for fractional big-M points.

For a fractional z the coupled bounds are ``G x <= Mrow * z[group]``.  The
elastic phase-1 value phi(z) (total violation of the remaining rows) is convex
in z; its subgradient comes from the coupling-row multipliers.  Any z' with a
feasible subproblem has phi(z') = 0, so ``phi(z_t) + grad @ (z' - z_t) <= 0``
is a valid cut over the whole box.
"""

from __future__ import annotations

import numpy as np

from ..numerics import LinearProgram, Status, simplex_solve
from .base import CERTIFICATE, FEASIBILITY, Cut

PHASE1_TOL = 1e-8


def elastic_cut(A, b, C, g, hi, G, group, Mrow, z, n):
    """Return (phi, cut).  ``hi`` are the X-bounds of x (lower bounds are 0)."""
    A = np.asarray(A, dtype=float).reshape(-1, G.shape[1])
    C = np.asarray(C, dtype=float).reshape(-1, G.shape[1])
    nx = G.shape[1]
    mA, mC, mG = A.shape[0], C.shape[0], G.shape[0]
    # columns: x | s+ (mA) | s- (mA) | s (mC)
    cost = np.concatenate([np.zeros(nx), np.ones(2 * mA + mC)])
    Aeq = np.hstack([A, np.eye(mA), -np.eye(mA), np.zeros((mA, mC))])
    Cin = np.vstack(
        [
            np.hstack([C, np.zeros((mC, 2 * mA)), -np.eye(mC)]),
            np.hstack([G, np.zeros((mG, 2 * mA + mC))]),
        ]
    )
    rhs_in = np.concatenate([g, Mrow * z[group]])
    lo = np.zeros(nx + 2 * mA + mC)
    up = np.concatenate([hi, np.full(2 * mA + mC, np.inf)])
    sol = simplex_solve(LinearProgram(c=cost, A=Aeq, b=b, C=Cin, g=rhs_in, lo=lo, hi=up))
    if sol.status is not Status.OPTIMAL:
        raise RuntimeError(f"elastic phase-1 LP failed: {sol.status}")
    phi = sol.objective
    lam = sol.ineq_duals[mC:]
    grad = np.zeros(n)
    np.add.at(grad, group, -Mrow * lam)
    # phi + grad @ (z' - z) <= 0   <=>   (-grad) @ z' >= phi - grad @ z
    cut = Cut(phi - float(grad @ z), -grad, FEASIBILITY, np.asarray(z, dtype=float).copy(), CERTIFICATE)
    return phi, cut
