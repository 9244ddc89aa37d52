"""Lower bounds from the Boolean relaxation min_{z in conv(Z)} c@z + f(z).

Two solvers: Kelley's cutting-plane method, which also yields a warm-start
cut pool, and projected supergradient ascent on the dual function
q(alpha) = h(alpha) + min_{z in Z} (c - Omega*(alpha)) @ z.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .feasible import FeasibleSet
from .numerics import Status, simplex_solve_tall
from .oracles.base import Oracle, Unsupported
from .pool import CutPool

ETA_FLOOR = -1e12


@dataclass
class RelaxationResult:
    lower_bound: float
    z_frac: Optional[np.ndarray]
    alpha: Optional[np.ndarray]
    cut_pool: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    history: list = field(default_factory=list)  # lower bound after each iteration
    upper_bound: float = np.inf  # best c@z + f(z) seen at a relaxed point


def kelley_solve(oracle: Oracle, Z: FeasibleSet, c=None, tol: Optional[float] = None, max_iter: int = 500, eta_floor: float = ETA_FLOOR) -> RelaxationResult:
    """Cutting planes on the relaxation.

    ``tol`` is relative: the loop stops once f(z_t) - eta_t <= tol * (1 + |UB|),
    with UB the best relaxed objective seen (default tol = 1e-6).
    """
    c = oracle.c if c is None else np.asarray(c, dtype=float)
    tol = 1e-6 if tol is None else tol
    pool = CutPool(oracle.n)
    z = Z.upper.astype(float)
    first = oracle.evaluate_fractional(z)
    pool.add(first.cut)
    ub, best_alpha = np.inf, None
    if first.feasible:
        ub, best_alpha = float(c @ z) + first.f_value, first.alpha_star
    lb, history, converged, it = -np.inf, [], False, 0
    z_t = None
    for it in range(1, max_iter + 1):
        sol = simplex_solve_tall(pool.master_lp(Z, c, eta_floor))
        if sol.status is Status.INFEASIBLE:
            # feasibility cuts exclude all of conv(Z)
            return RelaxationResult(np.inf, None, None, list(pool), it, True, history + [np.inf])
        if sol.status is not Status.OPTIMAL:
            raise RuntimeError(f"relaxation master LP failed: {sol.status}")
        z_t = np.clip(sol.x[:-1], 0.0, 1.0)
        eta_t = sol.x[-1]
        lb = max(lb, sol.objective)
        history.append(lb)
        res = oracle.evaluate_fractional(z_t)
        pool.add(res.cut)
        if not res.feasible:
            continue
        val = float(c @ z_t) + res.f_value
        if val < ub:
            ub, best_alpha = val, res.alpha_star
        if res.f_value - eta_t <= tol * (1.0 + abs(ub)):
            converged = True
            break
    return RelaxationResult(lb, z_t, best_alpha, list(pool), it, converged, history, ub)


def _default_scale(oracle) -> float:
    scale = getattr(oracle, "h_step_scale", None)
    return float(scale()) if callable(scale) else 1.0


def subgradient_ascent(
    oracle: Oracle,
    Z: FeasibleSet,
    c=None,
    steps: int = 5000,
    s0: Optional[float] = None,
    step_rule: Union[str, Callable[[int], float]] = "auto",
) -> RelaxationResult:
    """Projected supergradient ascent on q over a fixed step budget.

    step_rule:
      "sqrt"   s_t = s0 / sqrt(t) along the normalised supergradient, with
               s0 = 1.0 times the oracle's natural dual scale by default;
      "strong" s_t = 1 / (mu t) along the raw supergradient, for oracles whose
               h is mu-strongly concave (``h_strong_concavity``);
      "auto"   "strong" when the oracle declares mu, else "sqrt";
      or any callable t -> s_t, applied to the normalised supergradient.
    """
    if not getattr(oracle, "supports_h", False):
        raise Unsupported(f"{oracle.family} oracle does not expose h")
    c = oracle.c if c is None else np.asarray(c, dtype=float)
    mu = getattr(oracle, "h_strong_concavity", None)
    if step_rule == "auto":
        step_rule = "strong" if mu else "sqrt"
    normalise = True
    if step_rule == "strong":
        if not mu:
            raise ValueError("the strong step rule needs a strong-concavity modulus")
        rule, normalise = (lambda t: 1.0 / (mu * t)), False
    elif step_rule == "sqrt":
        s0 = _default_scale(oracle) if s0 is None else float(s0)
        rule = lambda t: s0 / np.sqrt(t)  # noqa: E731
    elif callable(step_rule):
        rule = step_rule
    else:
        raise ValueError(f"unknown step rule {step_rule!r}")

    alpha = oracle.h_project(oracle.h_start())
    best = (-np.inf, alpha, None)
    history = []
    for t in range(1, steps + 1):
        h, v = oracle.h_eval(alpha)
        z, lin = Z.linear_minimize(c - oracle.coordinate_conjugate(alpha))
        val = h + lin
        if val > best[0]:
            best = (val, alpha.copy(), z)
        history.append(best[0])
        if v is None:
            break
        g = -np.asarray(v, dtype=float) - oracle.conjugate_supergradient(alpha, z)
        norm = float(np.linalg.norm(g))
        if norm <= 1e-14:
            break
        alpha = oracle.h_project(alpha + rule(t) * (g / norm if normalise else g))
    val, a, z = best
    return RelaxationResult(val, None if z is None else z.astype(float), a, [], len(history), False, history)
