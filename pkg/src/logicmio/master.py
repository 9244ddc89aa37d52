"""Exact outer-approximation solvers.

``solve_singletree`` runs one best-bound branch-and-bound over the cut master
min c@z + eta and generates cuts lazily at integral node solutions.
``solve_multitree`` repeatedly solves the master to optimality over a static
cut pool, evaluates the oracle at its minimiser and adds the new cut.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .feasible import FeasibleSet
from .heuristics import local_search, randomized_rounding, sequential_rounding
from .numerics import Status, simplex_solve_tall
from .oracles.base import BINARY_TOL, EXCLUSION, FEASIBILITY, MONOTONE, OPTIMALITY, Cut, Oracle, exclusion_cut, monotone_cut
from .pool import CutPool
from .relaxation import ETA_FLOOR, kelley_solve

OPTIMAL = "Optimal"
GAP_LIMIT = "GapLimit"
TIME_LIMIT = "TimeLimit"
INFEASIBLE = "Infeasible"

SINGLE, MULTI = "single", "multi"


@dataclass
class SolverConfig:
    eps: float = 1e-6
    time_limit: float = np.inf
    mode: str = SINGLE
    node_limit: int = 1_000_000
    use_relaxation_warmstart: bool = False
    use_heuristics: bool = False
    seed: int = 0
    eta_floor: float = ETA_FLOOR
    max_iterations: int = 10_000  # outer iterations of the multi-tree loop
    # the warm start only needs a handful of cuts near the relaxed optimum, not a
    # certified bound; None means one Kelley round per binary variable
    relax_max_iter: Optional[int] = None
    relax_tol: float = 1e-2
    heuristic_trials: int = 20

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.mode not in (SINGLE, MULTI):
            raise ValueError(f"mode must be {SINGLE!r} or {MULTI!r}")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")


@dataclass
class Node:
    lower: np.ndarray  # fixings to 1 (together with Z.lower)
    upper: np.ndarray  # fixings to 0 (together with Z.upper)
    bound: float
    depth: int

    def __post_init__(self):
        if np.any(self.lower > self.upper):
            raise ValueError("inconsistent node fixings")


@dataclass
class SolveReport:
    status: str
    z: Optional[np.ndarray]
    x: Optional[np.ndarray]
    upper_bound: float
    lower_bound: float
    gap: float
    cuts_optimality: int = 0
    cuts_feasibility: int = 0
    nodes_explored: int = 0
    iterations: int = 0
    stage_timings: dict = field(default_factory=dict)
    lower_history: list = field(default_factory=list)
    upper_history: list = field(default_factory=list)
    cuts: list = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.upper_bound

    def to_dict(self) -> dict:
        def num(v):
            return None if v is None or not np.isfinite(v) else float(v)

        return {
            "status": self.status,
            "z": None if self.z is None else [int(v) for v in self.z],
            "x": None if self.x is None else np.asarray(self.x, dtype=float).ravel().tolist(),
            "upper_bound": num(self.upper_bound),
            "lower_bound": num(self.lower_bound),
            "gap": num(self.gap),
            "cuts_optimality": self.cuts_optimality,
            "cuts_feasibility": self.cuts_feasibility,
            "nodes_explored": self.nodes_explored,
            "iterations": self.iterations,
            "stage_timings": {k: float(v) for k, v in self.stage_timings.items()},
        }


def relative_gap(ub: float, lb: float) -> float:
    if not np.isfinite(ub):
        return np.inf
    if not np.isfinite(lb):
        return np.inf
    return max(ub - lb, 0.0) / max(1.0, abs(ub))


def add_feasibility_cut(pool, z_bad, kind: str = MONOTONE) -> Cut:
    """Build an Exclusion or Monotone cut at binary z_bad and store it (if a pool is given)."""
    z_bad = np.asarray(z_bad, dtype=float)
    if not np.all((z_bad == 0) | (z_bad == 1)):
        raise ValueError("feasibility cuts are built at binary points")
    if kind == EXCLUSION:
        cut = exclusion_cut(z_bad)
    elif kind == MONOTONE:
        cut = monotone_cut(z_bad)
    else:
        raise ValueError(f"unknown feasibility cut kind {kind!r}")
    if pool is not None:
        pool.add(cut)
    return cut


class _Recorder:
    """Oracle proxy that caches binary evaluations and feeds every cut to the pool."""

    def __init__(self, oracle: Oracle, pool: CutPool):
        self._oracle = oracle
        self._pool = pool
        self._cache = {}
        self.added = {OPTIMALITY: 0, FEASIBILITY: 0}

    def __getattr__(self, name):
        return getattr(self._oracle, name)

    def _record(self, res):
        if self._pool.add(res.cut):
            self.added[res.cut.origin] += 1
        return res

    def evaluate(self, z):
        key = np.rint(np.asarray(z, dtype=float)).astype(np.int8).tobytes()
        res = self._cache.get(key)
        if res is None:
            res = self._oracle.evaluate(z)
            self._cache[key] = res
        return self._record(res)

    def evaluate_fractional(self, z):
        return self._record(self._oracle.evaluate_fractional(z))


class _Clock:
    def __init__(self, limit):
        self.start = time.perf_counter()
        self.deadline = self.start + limit

    def expired(self) -> bool:
        return time.perf_counter() >= self.deadline

    def now(self) -> float:
        return time.perf_counter()


def _is_integral(z) -> bool:
    return bool(np.all(np.minimum(np.abs(z), np.abs(1 - z)) <= 1e-7))


def _branch_and_bound(Z, c, pool, rec, clock, config, incumbent, obj_floor, lazy, cutoff_tol, node_budget):
    """Best-bound search over the master.

    lazy=True: integral solutions are checked against the oracle and cut off
    while f(z) > eta + eps_cut.  lazy=False: the cut pool is static and the
    search returns the exact minimiser of the piecewise-linear model.
    ``incumbent`` is a mutable dict {z, value, x}.
    """
    n = Z.n
    tick = itertools.count()
    floor = config.eta_floor
    root = Node(Z.lower.astype(float).copy(), Z.upper.astype(float).copy(), -np.inf, 0)
    heap = [(-np.inf, next(tick), root)]
    closed_min = np.inf  # smallest bound among nodes closed without branching
    nodes = 0
    stop = None

    def prune_level():
        ub = incumbent["value"]
        return ub - cutoff_tol(ub) if np.isfinite(ub) else np.inf

    while heap:
        if clock.expired():
            stop = TIME_LIMIT
            break
        if nodes >= node_budget:
            stop = GAP_LIMIT
            break
        bound, _, node = heapq.heappop(heap)
        if bound >= prune_level():
            closed_min = min(closed_min, bound)
            continue
        nodes += 1
        while True:
            sol = simplex_solve_tall(pool.master_lp(Z, c, floor, node.lower, node.upper))
            if sol.status is Status.INFEASIBLE:
                break
            if sol.status is not Status.OPTIMAL:
                raise RuntimeError(f"node LP failed: {sol.status}")
            val = max(sol.objective, obj_floor)
            if val >= prune_level():
                closed_min = min(closed_min, val)
                break
            z = np.clip(sol.x[:n], node.lower, node.upper)
            eta = sol.x[n]
            if _is_integral(z):
                zb = np.rint(z).astype(int)
                if not lazy:
                    model = float(c @ zb) + pool.model_value(zb)
                    if model < incumbent["value"]:
                        incumbent.update(z=zb, value=model, x=None)
                    closed_min = min(closed_min, val)
                    break
                res = rec.evaluate(zb)
                if not res.feasible:
                    if res.cut.violation(zb) <= 1e-9:
                        raise RuntimeError("feasibility cut does not separate the infeasible point")
                    continue
                total = float(c @ zb) + res.f_value
                if total < incumbent["value"]:
                    incumbent.update(z=zb, value=total, x=res.x_star)
                eps_cut = 0.1 * config.eps * (1.0 + abs(res.f_value))
                if res.f_value > eta + eps_cut and res.cut.value(zb) > eta + eps_cut:
                    continue  # lazy cut just entered the pool; re-solve the node
                closed_min = min(closed_min, val)
                break
            frac = np.abs(z - 0.5)
            free = node.upper > node.lower
            frac = np.where(free & (np.minimum(z, 1 - z) > 1e-7), frac, np.inf)
            i = int(np.argmin(frac))  # first index wins ties
            down_hi = node.upper.copy()
            down_hi[i] = 0.0
            up_lo = node.lower.copy()
            up_lo[i] = 1.0
            for child in (Node(node.lower.copy(), down_hi, val, node.depth + 1), Node(up_lo, node.upper.copy(), val, node.depth + 1)):
                heapq.heappush(heap, (val, next(tick), child))
            break
    open_min = min((b for b, _, _ in heap), default=np.inf)
    lb = min(closed_min, open_min, incumbent["value"])
    return dict(lower=max(lb, obj_floor), nodes=nodes, stop=stop)


def _prelude(oracle, Z, c, config, pool, rec, clock, incumbent, timings):
    """Seed cut at the all-on point, optional relaxation and heuristic stages."""
    rec.evaluate(Z.upper.astype(float))
    obj_floor = -np.inf
    z_frac = None
    if config.use_relaxation_warmstart:
        t = clock.now()
        rel = kelley_solve(oracle, Z, c, tol=config.relax_tol, max_iter=config.relax_max_iter or oracle.n, eta_floor=config.eta_floor)
        for cut in rel.cut_pool:
            if pool.add(cut):
                rec.added[cut.origin] += 1
        obj_floor = rel.lower_bound
        z_frac = rel.z_frac
        timings["relaxation"] = clock.now() - t
    if config.use_heuristics:
        t = clock.now()
        if z_frac is None:
            free = Z.free
            budget = (Z.k - int(Z.lower.sum())) if Z.k is not None else int(free.sum())
            share = min(1.0, budget / max(int(free.sum()), 1))
            z_frac = Z.lower + free * share
        candidates = [
            randomized_rounding(z_frac, Z, rec, trials=config.heuristic_trials, seed=config.seed, c=c),
            sequential_rounding(z_frac, Z, rec, c=c, seed=config.seed),
        ]
        for h in candidates:
            if h.found and h.ub < incumbent["value"]:
                incumbent.update(z=np.asarray(h.z_best).astype(int), value=h.ub)
        if incumbent["z"] is not None:
            ls = local_search(incumbent["z"], Z, rec, c=c)
            if ls.found and ls.ub < incumbent["value"]:
                incumbent.update(z=np.asarray(ls.z_best).astype(int), value=ls.ub)
        timings["heuristics"] = clock.now() - t
    return obj_floor


def _apply_hint(rec, Z, c, hint, incumbent):
    if hint is None:
        return
    hint = np.asarray(hint).astype(int)
    if not Z.contains(hint):
        raise ValueError("incumbent hint is not a member of Z")
    res = rec.evaluate(hint)
    if res.feasible:
        val = float(c @ hint) + res.f_value
        if val < incumbent["value"]:
            incumbent.update(z=hint, value=val, x=res.x_star)


def _finish(oracle, Z, c, incumbent, lb, stop, config, pool, rec, clock, timings, nodes, iters, lows, ups):
    t = clock.now()
    z = incumbent["z"]
    x = None
    ub = np.inf
    if z is not None:
        if not Z.contains(z):
            raise RuntimeError("incumbent left Z")
        fresh = oracle.evaluate(z)  # bypasses the cache on purpose
        if not fresh.feasible:
            raise RuntimeError("incumbent failed re-verification")
        ub = float(c @ z) + fresh.f_value
        x = fresh.x_star
    timings["verify"] = clock.now() - t
    timings["total"] = clock.now() - clock.start
    if z is None:
        status = stop if stop is not None else INFEASIBLE
        lb = np.inf if status == INFEASIBLE else lb
    else:
        lb = min(lb, ub)
        gap = relative_gap(ub, lb)
        status = OPTIMAL if gap <= config.eps else (stop or GAP_LIMIT)
    return SolveReport(
        status=status,
        z=z,
        x=x,
        upper_bound=ub,
        lower_bound=lb,
        gap=relative_gap(ub, lb) if z is not None else np.inf,
        cuts_optimality=rec.added[OPTIMALITY],
        cuts_feasibility=rec.added[FEASIBILITY],
        nodes_explored=nodes,
        iterations=iters,
        stage_timings=timings,
        lower_history=lows,
        upper_history=ups,
        cuts=list(pool),
    )


def _cutoff(config):
    return lambda ub: config.eps * max(1.0, abs(ub))


def solve_singletree(oracle: Oracle, Z: FeasibleSet, c=None, config: Optional[SolverConfig] = None, initial_cuts=(), incumbent_hint=None) -> SolveReport:
    config = config or SolverConfig()
    c = oracle.c if c is None else np.asarray(c, dtype=float)
    clock = _Clock(config.time_limit)
    pool = CutPool(Z.n, initial_cuts)
    rec = _Recorder(oracle, pool)
    incumbent = dict(z=None, value=np.inf, x=None)
    timings = {}
    _apply_hint(rec, Z, c, incumbent_hint, incumbent)
    obj_floor = _prelude(oracle, Z, c, config, pool, rec, clock, incumbent, timings)
    t = clock.now()
    out = _branch_and_bound(Z, c, pool, rec, clock, config, incumbent, obj_floor, True, _cutoff(config), config.node_limit)
    timings["tree"] = clock.now() - t
    lows, ups = [out["lower"]], [incumbent["value"]]
    return _finish(oracle, Z, c, incumbent, out["lower"], out["stop"], config, pool, rec, clock, timings, out["nodes"], 1, lows, ups)


def solve_multitree(oracle: Oracle, Z: FeasibleSet, c=None, config: Optional[SolverConfig] = None, initial_cuts=(), incumbent_hint=None) -> SolveReport:
    config = config or SolverConfig()
    c = oracle.c if c is None else np.asarray(c, dtype=float)
    clock = _Clock(config.time_limit)
    pool = CutPool(Z.n, initial_cuts)
    rec = _Recorder(oracle, pool)
    incumbent = dict(z=None, value=np.inf, x=None)
    timings = {}
    _apply_hint(rec, Z, c, incumbent_hint, incumbent)
    obj_floor = _prelude(oracle, Z, c, config, pool, rec, clock, incumbent, timings)
    t = clock.now()
    lb, stop, nodes, it = obj_floor, None, 0, 0
    lows, ups = [], []
    exact = lambda ub: 1e-12 * max(1.0, abs(ub))  # noqa: E731
    while True:
        if it >= config.max_iterations:
            stop = GAP_LIMIT
            break
        if clock.expired():
            stop = TIME_LIMIT
            break
        it += 1
        model = dict(z=None, value=np.inf, x=None)
        out = _branch_and_bound(Z, c, pool, rec, clock, config, model, obj_floor, False, exact, config.node_limit - nodes)
        nodes += out["nodes"]
        if out["stop"] is not None:
            stop = out["stop"]
            break
        if model["z"] is None:
            # feasibility cuts exclude every remaining point of Z
            lb = np.inf if incumbent["z"] is None else incumbent["value"]
            break
        lb = max(lb, out["lower"])
        zt = model["z"]
        res = rec.evaluate(zt)
        if res.feasible:
            total = float(c @ zt) + res.f_value
            if total < incumbent["value"]:
                incumbent.update(z=zt, value=total, x=res.x_star)
        lows.append(lb)
        ups.append(incumbent["value"])
        if relative_gap(incumbent["value"], lb) <= config.eps:
            break
    timings["tree"] = clock.now() - t
    return _finish(oracle, Z, c, incumbent, lb, stop, config, pool, rec, clock, timings, nodes, it, lows, ups)


def solve(oracle: Oracle, Z: FeasibleSet, c=None, config: Optional[SolverConfig] = None, **kw) -> SolveReport:
    config = config or SolverConfig()
    fn = solve_singletree if config.mode == SINGLE else solve_multitree
    return fn(oracle, Z, c, config, **kw)
