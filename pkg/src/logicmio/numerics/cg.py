from __future__ import annotations

import numpy as np

from .problems import IterationLimit


def cg_solve(matvec, rhs, tol: float = 1e-10, x0=None, max_iter: int | None = None):
    """Conjugate gradient for a symmetric positive-definite operator.

    ``matvec`` is a callable or a dense matrix.  Stops once
    ``||A x - rhs|| <= tol * ||rhs||``.
    """
    if not callable(matvec):
        mat = np.asarray(matvec, dtype=float)
        matvec = mat.__matmul__
    b = np.asarray(rhs, dtype=float)
    n = b.size
    max_iter = 10 * max(n, 1) if max_iter is None else max_iter
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - matvec(x)
    target = tol * np.linalg.norm(b)
    if np.linalg.norm(r) <= target:
        return x
    p = r.copy()
    rr = r @ r
    for _ in range(max_iter):
        Ap = matvec(p)
        step = rr / (p @ Ap)
        x += step * p
        r -= step * Ap
        rr_new = r @ r
        if np.sqrt(rr_new) <= target:
            return x
        p = r + (rr_new / rr) * p
        rr = rr_new
    # recurrence drift: confirm with the true residual before giving up
    if np.linalg.norm(b - matvec(x)) <= target:
        return x
    raise IterationLimit(f"conjugate gradient did not reach tol={tol} in {max_iter} iterations")
