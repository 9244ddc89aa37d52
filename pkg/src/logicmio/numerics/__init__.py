"""Self-contained convex kernels: bounded simplex, ADMM QP and conjugate gradient."""

from .cg import cg_solve
from .problems import (
    IterationLimit,
    KernelSolution,
    LinearProgram,
    QuadraticProgram,
    Status,
    dual_objective,
    kkt_residuals,
)
from .qp import qp_solve
from .simplex import simplex_solve, simplex_solve_tall

__all__ = [
    "IterationLimit",
    "KernelSolution",
    "LinearProgram",
    "QuadraticProgram",
    "Status",
    "cg_solve",
    "dual_objective",
    "kkt_residuals",
    "qp_solve",
    "simplex_solve",
    "simplex_solve_tall",
]
