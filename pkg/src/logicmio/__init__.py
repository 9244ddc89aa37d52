"""Outer-approximation solvers for mixed-integer problems with logical constraints."""

__version__ = "0.1.0"

from .feasible import FeasibleSet
from .regularizers import Regularizer, conjugate, conjugate_grad, omega, perspective_term
from .oracles import FAMILIES, Cut, Oracle, SubproblemResult, make_oracle
from .relaxation import RelaxationResult, kelley_solve, subgradient_ascent
from .master import SolveReport, SolverConfig, solve, solve_multitree, solve_singletree
from .bruteforce import EnumerationResult, enumerate_z

__all__ = [
    "FAMILIES",
    "Cut",
    "EnumerationResult",
    "FeasibleSet",
    "Oracle",
    "Regularizer",
    "RelaxationResult",
    "SolveReport",
    "SolverConfig",
    "SubproblemResult",
    "conjugate",
    "conjugate_grad",
    "enumerate_z",
    "kelley_solve",
    "make_oracle",
    "omega",
    "perspective_term",
    "solve",
    "solve_multitree",
    "solve_singletree",
    "subgradient_ascent",
]
