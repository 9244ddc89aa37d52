"""Seeded instance generators.

Every generator draws from ``numpy.random.Generator(PCG64(seed))`` so files
are reproducible across platforms for a given numpy major version.  Rounding
to the nearest integer is half-away-from-zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..feasible import FeasibleSet
from ..oracles import BQPInstance, ERMInstance, FacilityInstance, NetDesignInstance, PortfolioInstance, UCInstance
from ..regularizers import Regularizer
from .instances import InstanceFile

PRNG = "PCG64"


def rng_for(seed: int) -> np.random.Generator:
    if seed is None:
        raise ValueError("generators need an explicit seed")
    return np.random.Generator(np.random.PCG64(int(seed)))


def round_half_away(x):
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


# ---------------------------------------------------------------------------
# network design


@dataclass
class NetDesignSpec:
    m: int
    p: int = 0
    seed: int = 0
    budget_growth: float = 0.05
    penalty: float = 1000.0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("need at least two nodes")
        if not 0 <= self.p <= 4:
            raise ValueError("p must lie in 0..4")
        if self.budget_growth < 0:
            raise ValueError("budget growth must be nonnegative")


def generate_netdesign(spec: NetDesignSpec) -> InstanceFile:
    """Candidate arcs form the complete digraph; the initial network is forced on.

    The initial network is a random spanning tree plus p*m random extra edges,
    each undirected edge entering as both of its arcs.  The budget allows
    (1 + budget_growth) times as many arcs, rounded.
    """
    m, rng = spec.m, rng_for(spec.seed)
    pts = rng.random((m, 2))
    tails, heads = zip(*[(i, j) for i in range(m) for j in range(m) if i != j])
    tails, heads = np.array(tails), np.array(heads)
    arc_of = {(int(t), int(h)): e for e, (t, h) in enumerate(zip(tails, heads))}
    n = tails.size

    # random recursive spanning tree over a random node order
    order = rng.permutation(m)
    edges = set()
    for pos in range(1, m):
        parent = order[rng.integers(pos)]
        edges.add(tuple(sorted((int(order[pos]), int(parent)))))
    tree_edges = sorted(edges)
    others = [(i, j) for i in range(m) for j in range(i + 1, m) if (i, j) not in edges]
    extra = min(spec.p * m, len(others))
    if extra:
        pick = rng.choice(len(others), size=extra, replace=False)
        edges.update(others[int(k)] for k in pick)
    lower = np.zeros(n, dtype=int)
    for i, j in edges:
        lower[arc_of[(i, j)]] = lower[arc_of[(j, i)]] = 1
    k = int(round_half_away((1.0 + spec.budget_growth) * lower.sum()))

    # one commodity per node, shipped from it to every other node
    demands = np.zeros((m, m))
    for j in range(m):
        amount = round_half_away(rng.uniform(5.0, 25.0, size=m))
        amount[j] = 0.0
        demands[j] = amount
        demands[j, j] = -amount.sum()
    dist = np.linalg.norm(pts[tails] - pts[heads], axis=1)
    d = 10.0 * dist
    build = rng.uniform(1.0, 4.0, size=n)
    B = float(np.sum(np.abs(np.diag(demands))))
    A = (1 + spec.p) * m
    cap = round_half_away(rng.uniform(0.2, 1.0, size=n) * B / A)
    inst = NetDesignInstance(m, tails, heads, demands, np.diag(d), d, cap, spec.penalty, build)
    M = B
    gamma = 2.0 / (m * (m - 1))
    meta = {
        "generator": "netdesign",
        "prng": PRNG,
        "seed": int(spec.seed),
        "m": m,
        "p": spec.p,
        "budget_growth": spec.budget_growth,
        "nodes": pts.tolist(),
        "tree_edges": [list(e) for e in tree_edges],
        "ridge_gamma": gamma,
        "bigM": M,
    }
    return InstanceFile("netdesign", inst, FeasibleSet(n, lower=lower, k=k), Regularizer.bigm(M), meta=meta)


# ---------------------------------------------------------------------------
# sparse regression / classification


@dataclass
class ERMSpec:
    n: int
    p: int
    k_true: int
    snr: float = 6.0
    seed: int = 0
    loss: str = "OLS"

    def __post_init__(self):
        if min(self.n, self.p, self.k_true) <= 0 or not self.snr > 0:
            raise ValueError("sizes and SNR must be positive")
        if self.k_true > self.p:
            raise ValueError("k_true cannot exceed the number of features")


def generate_erm(spec: ERMSpec, gamma: float = 1.0) -> InstanceFile:
    rng = rng_for(spec.seed)
    w = np.zeros(spec.p)
    support = np.sort(rng.choice(spec.p, size=spec.k_true, replace=False))
    w[support] = rng.choice([-1.0, 1.0], size=spec.k_true)
    X = rng.standard_normal((spec.n, spec.p))
    signal = X @ w
    noise = rng.standard_normal(spec.n)
    if np.isfinite(spec.snr):
        sigma = np.sqrt(np.var(signal) / spec.snr) if np.var(signal) > 0 else 0.0
        noisy = signal + sigma * noise
    else:
        noisy = signal
    if spec.loss == "OLS":
        y = noisy
    else:
        y = np.where(noisy >= 0, 1.0, -1.0)
    meta = {"generator": "erm", "prng": PRNG, "seed": int(spec.seed), "snr": spec.snr, "support": support.tolist(), "weights": w.tolist()}
    return InstanceFile("erm", ERMInstance(X, y, spec.loss), FeasibleSet(spec.p, k=spec.k_true), Regularizer.ridge(gamma), meta=meta)


def support_accuracy(true_support, found_support) -> float:
    """Share of the true support recovered (both given as index lists)."""
    true = {int(i) for i in true_support}
    if not true:
        return 1.0
    return len(true & {int(i) for i in found_support}) / len(true)


# ---------------------------------------------------------------------------
# small random families for tests and experiments


def random_facility(n_fac: int, n_cust: int, seed: int, tightness: float = 1.5, k: Optional[int] = None) -> InstanceFile:
    """Capacities sum to ``tightness`` times total demand."""
    rng = rng_for(seed)
    demand = round_half_away(rng.uniform(5, 35, size=n_cust))
    share = rng.dirichlet(np.ones(n_fac))
    cap = np.maximum(round_half_away(share * tightness * demand.sum()), 1.0)
    fac_pts, cust_pts = rng.random((n_fac, 2)), rng.random((n_cust, 2))
    cost = 10.0 * np.linalg.norm(fac_pts[:, None, :] - cust_pts[None, :, :], axis=2)
    fixed = round_half_away(rng.uniform(20, 80, size=n_fac))
    inst = FacilityInstance(fixed, np.round(cost, 3), cap, demand)
    Z = FeasibleSet(n_fac, k=k)
    return InstanceFile("facility", inst, Z, meta={"generator": "facility", "prng": PRNG, "seed": int(seed)})


def random_uc(units: int, periods: int, seed: int, alpha: float = 1.0, load: float = 0.6) -> InstanceFile:
    """Quadratic costs are multiplied by ``alpha``; demand is ``load`` of capacity on average."""
    rng = rng_for(seed)
    u = round_half_away(rng.uniform(20, 60, size=units))
    a = alpha * rng.uniform(0.01, 0.1, size=units)
    b = rng.uniform(1.0, 5.0, size=units)
    demand = np.round(load * u.sum() * rng.uniform(0.5, 1.2, size=periods), 3)
    demand = np.minimum(demand, u.sum())
    fixed = np.tile(round_half_away(rng.uniform(10, 60, size=units)), (periods, 1))
    inst = UCInstance(a, b, u, demand, fixed)
    return InstanceFile("uc", inst, FeasibleSet(units * periods), meta={"generator": "uc", "prng": PRNG, "seed": int(seed), "alpha": alpha})


def random_portfolio(n: int, seed: int, k: int = 3, factors: int = 2, min_return: Optional[float] = None) -> InstanceFile:
    rng = rng_for(seed)
    F = rng.standard_normal((n, factors)) * 0.2
    Sigma = F @ F.T + np.diag(rng.uniform(0.01, 0.05, size=n))
    Sigma = 0.5 * (Sigma + Sigma.T)
    mu = rng.uniform(0.02, 0.15, size=n)
    A = l = u = None
    if min_return is not None:
        A, l, u = mu[None, :], np.array([min_return]), np.array([np.inf])
    inst = PortfolioInstance(mu, Sigma, 1.0, A, l, u)
    return InstanceFile("portfolio", inst, FeasibleSet(n, k=k), meta={"generator": "portfolio", "prng": PRNG, "seed": int(seed)})


def random_bqp(n: int, seed: int, density: float = 0.6, k: Optional[int] = None, sense: str = "min") -> InstanceFile:
    rng = rng_for(seed)
    Q = round_half_away(rng.uniform(-10, 10, size=(n, n)))
    Q = np.triu(Q) * (rng.random((n, n)) < density)
    Q = Q + np.triu(Q, 1).T
    return InstanceFile("bqp", BQPInstance(Q, sense), FeasibleSet(n, k=k), meta={"generator": "bqp", "prng": PRNG, "seed": int(seed)})


def random_erm(n_samples: int, p: int, seed: int, k: int, loss: str = "OLS", gamma: float = 1.0) -> InstanceFile:
    return generate_erm(ERMSpec(n_samples, p, min(k, p), 6.0, seed, loss), gamma)


def random_netdesign(m: int, seed: int, budget_growth: float = 1.0, p: int = 0) -> InstanceFile:
    return generate_netdesign(NetDesignSpec(m, p, seed, budget_growth))
