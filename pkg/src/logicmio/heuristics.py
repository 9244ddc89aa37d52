"""Upper-bound heuristics: randomized rounding, sequential rounding, 1-opt search.

All three return points of Z together with their objective c@z + f(z) as
evaluated by the oracle.  "Gradient" below means c + (cut coefficients), the
first-order model of the full objective at the evaluated point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .feasible import FeasibleSet
from .oracles.base import BINARY_TOL, Oracle, is_binary

MAX_RESAMPLES = 100


@dataclass
class HeuristicResult:
    z_best: Optional[np.ndarray]  # None only if every candidate was oracle-infeasible
    ub: float
    trials_attempted: int
    improvement_trace: list = field(default_factory=list)
    evaluations: int = 0
    sample_values: list = field(default_factory=list)
    resamples: int = 0

    @property
    def found(self) -> bool:
        return self.z_best is not None


def _value(oracle, c, z):
    res = oracle.evaluate(z)
    if not res.feasible:
        return np.inf, res
    return float(c @ z) + res.f_value, res


def trial_generator(seed: int, t: int) -> np.random.Generator:
    """Independent stream for trial t (sub-seed seed XOR t)."""
    return np.random.Generator(np.random.PCG64(int(seed) ^ int(t)))


def randomized_rounding(z_frac, Z: FeasibleSet, oracle: Oracle, trials: int = 100, seed: int = 0, c=None) -> HeuristicResult:
    """Best of ``trials`` independent Bernoulli(z_frac) roundings."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    c = oracle.c if c is None else np.asarray(c, dtype=float)
    z_frac = np.clip(np.asarray(z_frac, dtype=float), 0.0, 1.0)
    if is_binary(z_frac):
        z = np.rint(z_frac).astype(int)
        if not Z.contains(z):
            z = Z.restore_feasibility(z, z_frac)
        val, _ = _value(oracle, c, z)
        found = np.isfinite(val)
        return HeuristicResult(z if found else None, val, 1, [(z, val)] if found else [], 1, [val], 0)

    best_z, best_val = None, np.inf
    trace, samples, resamples = [], [], 0
    for t in range(trials):
        rng = trial_generator(seed, t)
        for attempt in range(MAX_RESAMPLES):
            z = (rng.random(Z.n) < z_frac).astype(int)
            if Z.contains(z):
                break
            resamples += 1
        else:
            z = Z.restore_feasibility(z, z_frac)
        val, _ = _value(oracle, c, z)
        samples.append(val)
        if val < best_val:
            best_z, best_val = z, val
            trace.append((z.copy(), val))
    return HeuristicResult(best_z, best_val, trials, trace, trials, samples, resamples)


def sequential_rounding(z_frac, Z: FeasibleSet, oracle: Oracle, c=None, seed: int = 0) -> HeuristicResult:
    """Round down coordinates the gradient favours dropping, then round up and trim."""
    c = oracle.c if c is None else np.asarray(c, dtype=float)
    z = np.clip(np.asarray(z_frac, dtype=float), 0.0, 1.0).copy()
    evals = 0
    grad = np.zeros(Z.n)
    fallback = lambda: randomized_rounding(z_frac, Z, oracle, trials=10, seed=seed, c=c)  # noqa: E731
    while not is_binary(z):
        res = oracle.evaluate_fractional(z)
        evals += 1
        if not res.feasible:
            return _merge(fallback(), evals)
        grad = c + res.gradient
        frac = (z > BINARY_TOL) & (z < 1 - BINARY_TOL) & Z.free
        down = frac & (grad * (0.0 - z) < 0)
        if not down.any():
            break
        z[down] = 0.0
    zb = (z > BINARY_TOL).astype(int)
    zb = np.maximum(zb, Z.lower)
    zb = np.minimum(zb, Z.upper)
    zb = Z.restore_feasibility(zb, -grad)
    val, _ = _value(oracle, c, zb)
    evals += 1
    if not np.isfinite(val):
        return _merge(fallback(), evals)
    return HeuristicResult(zb, val, 1, [(zb.copy(), val)], evals)


def _merge(result: HeuristicResult, extra_evals: int) -> HeuristicResult:
    result.evaluations += extra_evals
    return result


def local_search(z_start, Z: FeasibleSet, oracle: Oracle, c=None, max_evals: int = 1000) -> HeuristicResult:
    """1-opt descent driven by predicted improvements; stops when it cycles."""
    c = oracle.c if c is None else np.asarray(c, dtype=float)
    z = np.asarray(z_start).astype(int).copy()
    if not Z.contains(z):
        raise ValueError("local search must start inside Z")
    val, res = _value(oracle, c, z)
    evals = 1
    if not np.isfinite(val):
        return HeuristicResult(None, np.inf, 1, [], evals)
    best_z, best_val = z.copy(), val
    trace = [(z.copy(), val)]
    visited = {z.tobytes()}
    while evals < max_evals:
        grad = c + res.gradient
        # predicted change of each single switch
        delta = np.where(z == 0, grad, -grad)
        allowed = np.where(z == 0, Z.upper == 1, Z.lower == 0)
        order = [i for i in np.argsort(delta, kind="stable") if allowed[i] and delta[i] < -1e-12]
        moved = False
        for i in order:
            cand = z.copy()
            cand[i] = 1 - cand[i]
            if not Z.contains(cand):
                priority = np.abs(grad)
                priority[i] = np.inf  # keep the coordinate just switched on
                cand = Z.restore_feasibility(cand, priority)
                if np.array_equal(cand, z):
                    continue  # only the new coordinate could be dropped
            key = cand.tobytes()
            if key in visited:
                # the best predicted move returns to a known point: the search has cycled
                return HeuristicResult(best_z, best_val, 1, trace, evals)
            visited.add(key)
            cval, cres = _value(oracle, c, cand)
            evals += 1
            if not np.isfinite(cval):
                continue  # oracle-infeasible neighbour; try the next predicted move
            z, val, res = cand, cval, cres
            if val < best_val:
                best_z, best_val = z.copy(), val
                trace.append((z.copy(), val))
            moved = True
            break
        if not moved:
            break
    return HeuristicResult(best_z, best_val, 1, trace, evals)
