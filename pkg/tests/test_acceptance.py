"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line, collected into the terminal
summary by ``conftest.py``.  Heavy per-instance work (enumeration, both exact
solvers, pairwise conjugate tables) is cached so later checks reuse it.
"""

from __future__ import annotations

import functools
import itertools
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import FAMILY_NAMES, REGULARIZED, ridge_for, small_instance
from logicmio import FeasibleSet, Regularizer
from logicmio.bruteforce import enumerate_z
from logicmio.cli import read_instance, run_cli
from logicmio.heuristics import local_search, randomized_rounding, sequential_rounding
from logicmio.io import generators as gen
from logicmio.io.biqmac import parse_biqmac, serialize_biqmac
from logicmio.io.errors import InstanceFormatError
from logicmio.io.orlib import parse_orlib_cap, serialize_orlib_cap
from logicmio.master import OPTIMAL, INFEASIBLE, SolverConfig, solve_multitree, solve_singletree
from logicmio.oracles import OPTIMALITY, BQPInstance
from logicmio.oracles.unitcommit import UCInstance, UCOracle
from logicmio.relaxation import kelley_solve, subgradient_ascent

pytestmark = pytest.mark.acceptance

SUITE_SEEDS = range(50)
RESULTS: list = []


def verdict(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _reg(inst, ridge):
    """Ridge or big-M; least squares defaults to ridge, so give it an explicit M."""
    if ridge:
        return ridge_for(inst)
    return Regularizer.bigm(5.0) if inst.family == "erm" else None


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


# ---------------------------------------------------------------- cached per-instance data


@functools.lru_cache(maxsize=None)
def exact_case(family, seed):
    inst = small_instance(family, seed)
    o, Z = inst.build()
    t0 = time.perf_counter()
    ref = enumerate_z(o, Z)
    single = solve_singletree(o, Z)
    multi = solve_multitree(o, Z)
    return {"n": o.n, "ref": ref, "single": single, "multi": multi, "seconds": time.perf_counter() - t0}


@functools.lru_cache(maxsize=None)
def pair_table(family, seed, ridge):
    """Values and conjugate rows at every point of Z, for one regularizer."""
    inst = small_instance(family, seed)
    o, Z = inst.build(_reg(inst, ridge))
    pts = np.array([np.asarray(p, float) for p in Z.points()])
    F = np.full(len(pts), np.inf)
    G = np.zeros_like(pts)
    for j, p in enumerate(pts):
        r = o.evaluate(p)
        if r.feasible:
            F[j] = r.f_value
            # cut gradient g = -Omega*(alpha*); the Fortet cuts carry their own gradient
            G[j] = -r.cut.coefficients if family == "bqp" else o.coordinate_conjugate(r.alpha_star)
    return pts, F, G


# ---------------------------------------------------------------- 1. exactness


def test_criterion_01_exactness_suite():
    t0 = time.perf_counter()
    worst, bad, count, max_n = 0.0, [], 0, 0
    per_family = {}
    for fam in FAMILY_NAMES:
        per_family[fam] = 0
        for seed in SUITE_SEEDS:
            case = exact_case(fam, seed)
            max_n = max(max_n, case["n"])
            ref = case["ref"]
            for name in ("single", "multi"):
                rep = case[name]
                if ref.all_infeasible:
                    ok = rep.status == INFEASIBLE
                    err = 0.0 if ok else np.inf
                else:
                    err = _rel(rep.value, ref.best_value)
                    ok = rep.status == OPTIMAL and err <= 1e-6
                worst = max(worst, err)
                if not ok:
                    bad.append((fam, seed, name, rep.status, err))
            per_family[fam] += 1
            count += 1
    elapsed = time.perf_counter() - t0
    counts = ", ".join(f"{f}={c}" for f, c in per_family.items())
    detail = f"{count} instances ({counts}), n<={max_n}, worst rel err {worst:.2e}, {elapsed:.0f}s"
    verdict(1, not bad and max_n <= 14 and elapsed < 600 and min(per_family.values()) >= 50, detail + (f", mismatches {bad[:5]}" if bad else ""))


# ---------------------------------------------------------------- 2. cut validity


def test_criterion_02_cut_validity():
    worst, checked, bad = np.inf, 0, []
    for fam in FAMILY_NAMES:
        for seed in range(20):
            inst = small_instance(fam, seed)
            for ridge in ([False] if fam == "bqp" else [False, True]):
                o, Z = inst.build(_reg(inst, ridge))
                assert o.n <= 12
                pts, F, _ = pair_table(fam, seed, ridge)
                feas = np.isfinite(F)
                cuts = list(solve_singletree(o, Z, config=SolverConfig(use_relaxation_warmstart=True, use_heuristics=True)).cuts)
                cuts += solve_multitree(o, Z).cuts
                for cut in cuts:
                    if cut.origin != OPTIMALITY:
                        continue
                    slack = F[feas] - (cut.constant + pts[feas] @ cut.coefficients)
                    s = float(slack.min()) if slack.size else np.inf
                    worst = min(worst, s)
                    checked += 1
                    if s < -1e-6:
                        bad.append((fam, seed, ridge, s))
    verdict(2, not bad, f"{checked} optimality cuts checked on all of Z, min slack {worst:.2e}" + (f", violations {bad[:5]}" if bad else ""))


# ---------------------------------------------------------------- 3. perspective equivalence


def test_criterion_03_perspective_equivalence():
    rng = np.random.default_rng(3)
    worst, evals = 0.0, 0
    for fam in REGULARIZED:
        for seed in range(100, 120):
            inst = small_instance(fam, seed)
            o, Z = inst.build(ridge_for(inst))
            assert o.reg.is_ridge
            pts = [np.asarray(p, float) for p in Z.points()]
            seen = {}
            for j in rng.integers(0, len(pts), size=100):
                # draws repeat on small Z; each distinct point is solved once
                if j not in seen:
                    z = pts[j]
                    r = o.evaluate(z)
                    seen[j] = _rel(o.dual_value(z, r), o.primal_objective(z, r.x_star)) if r.feasible else None
                if seen[j] is not None:
                    worst = max(worst, seen[j])
                    evals += 1
    verdict(3, worst <= 1e-6, f"{evals} feasible (instance, z) evaluations over {len(REGULARIZED)} families, max rel |dual - primal| {worst:.2e}")


# ---------------------------------------------------------------- 4. Lipschitz inequality


def test_criterion_04_lipschitz_inequality():
    worst, pairs, bad = np.inf, 0, []
    for fam in FAMILY_NAMES:
        for seed in SUITE_SEEDS:
            for ridge in ([False] if fam == "bqp" else [False, True]):
                pts, F, G = pair_table(fam, seed, ridge)
                feas = np.isfinite(F)
                P, Fv, Gv = pts[feas], F[feas], G[feas]
                if not len(Fv):
                    continue
                # rows: z' (where alpha* is taken); columns: z
                rhs = Gv @ P.T - np.sum(Gv * P, axis=1)[:, None]
                lhs = Fv[:, None] - Fv[None, :]
                slack = rhs - lhs
                s = float(slack.min())
                worst = min(worst, s)
                pairs += slack.size
                if s < -1e-6:
                    bad.append((fam, seed, ridge, s))
    verdict(4, not bad, f"{pairs} ordered pairs over both regularizers, min slack {worst:.2e}" + (f", violations {bad[:5]}" if bad else ""))


# ---------------------------------------------------------------- 5. randomized rounding


ROUNDING_CASES = (("erm", "ridge", 4), ("erm", "bigM", 3), ("netdesign", "natural", 1), ("portfolio", "ridge", 2))


def _rounding_candidates():
    """Instances whose Boolean relaxation is fractional, in a fixed scan order."""
    out = []
    for fam, kind, quota in ROUNDING_CASES:
        for seed in range(40):
            if quota == 0:
                break
            inst = small_instance(fam, seed)
            reg = {"ridge": ridge_for(inst), "bigM": Regularizer.bigm(5.0), "natural": None}[kind]
            o, Z = inst.build(reg)
            rel = kelley_solve(o, Z, tol=1e-9, max_iter=2000)
            if not rel.converged:
                continue
            zs = np.clip(rel.z_frac, 0.0, 1.0)
            R = np.flatnonzero((zs > 1e-6) & (zs < 1 - 1e-6))
            if R.size < 2:
                continue
            out.append((inst, o, Z, zs, R))
            quota -= 1
    return out


def test_criterion_05_randomized_rounding():
    rng = np.random.default_rng(5)
    cands = _rounding_candidates()
    lines, ok = [], len(cands) == 10
    for inst, o, Z, zs, R in cands:
        f_star = o.evaluate_fractional(zs).f_value
        base = np.rint(zs)
        # f at every rounding of the fractional block, and L over the whole box
        f_round, L = {}, 0.0
        for bits in itertools.product((0.0, 1.0), repeat=R.size):
            z = base.copy()
            z[R] = bits
            r = o.evaluate(z)
            f_round[bits] = r.f_value if r.feasible else np.inf
        free = np.flatnonzero(Z.upper > Z.lower)
        for bits in itertools.product((0.0, 1.0), repeat=free.size):
            z = Z.lower.astype(float).copy()
            z[free] = bits
            r = o.evaluate(z)
            if r.feasible:
                L = max(L, float(np.max(np.abs(o.coupled(r.alpha_star)))))
        Ls = [("enum", L)]
        if inst.family == "erm" and o.inst.loss == "OLS":
            # ||theta||_2 <= 2||y||_2 in sample space; map through the columns of X
            Ls.append(("2|y|", 2.0 * np.linalg.norm(o.inst.y) * float(np.max(np.linalg.norm(o.inst.X, axis=0)))))
        draws = rng.random((10_000, R.size)) < zs[R]
        vals = np.array([f_round[tuple(row.astype(float))] for row in draws]) - f_star
        for label, Lv in Ls:
            kappa = 2 * o.reg.M**2 * Lv**2 * R.size**2 if o.reg.is_bigm else 0.5 * o.reg.gamma**2 * Lv**4 * R.size**2
            thresh = np.sqrt(kappa * np.log(R.size))
            for eps in sorted({*np.quantile(np.maximum(vals, 0), [0.5, 0.9, 0.99]), 0.5 * thresh, thresh, 2 * thresh}):
                if not eps > 0:
                    continue
                freq = float(np.mean(vals > eps))
                bound = R.size * np.exp(-(eps**2) / kappa)
                if freq > bound:
                    ok = False
            lines.append(f"{inst.family}/{o.reg} |R|={R.size} L[{label}]={Lv:.3g} kappa={kappa:.3g}")
    for ln in lines:
        print("   ", ln)
    verdict(5, ok, f"{len(cands)} fractional instances, 10,000 draws each, empirical violation <= |R| exp(-eps^2/kappa) at every eps checked")


# ---------------------------------------------------------------- 6. dual norm bound


def test_criterion_06_dual_norm_bound():
    worst_ratio, worst_y, checked = 0.0, 0.0, 0
    for seed in range(20):
        inst = small_instance("erm", seed)
        for reg in (ridge_for(inst), Regularizer.bigm(10.0)):
            o, Z = inst.build(reg)
            assert o.inst.loss == "OLS"
            mu = o.h_strong_concavity
            h_hat, _ = o.h_eval(o.h_maximizer())
            h_0, _ = o.h_eval(np.zeros_like(o.h_start()))
            L = 2.0 * np.sqrt(2.0 * (h_hat - h_0) / mu)
            ybound = 2.0 * np.linalg.norm(o.inst.y)
            for p in Z.points():
                r = o.evaluate(np.asarray(p, float))
                nrm = float(np.linalg.norm(r.alpha_star))
                worst_ratio = max(worst_ratio, nrm / L)
                worst_y = max(worst_y, nrm / ybound)
                checked += 1
    ok = worst_ratio <= 1 + 1e-9 and worst_y <= 1 + 1e-9
    verdict(6, ok, f"{checked} (instance, z) points, max ||alpha*||/L = {worst_ratio:.3f}, max ||alpha*||/(2||y||) = {worst_y:.3f}")


# ---------------------------------------------------------------- 7. relaxation bound


def test_criterion_07_relaxation_bound():
    worst_gap, bad = -np.inf, []
    for fam in FAMILY_NAMES:
        for seed in SUITE_SEEDS:
            case = exact_case(fam, seed)
            if case["ref"].all_infeasible:
                continue
            o, Z = small_instance(fam, seed).build()
            lb = kelley_solve(o, Z).lower_bound
            opt = case["ref"].best_value
            excess = (lb - opt) / max(1.0, abs(opt))
            worst_gap = max(worst_gap, excess)
            if excess > 1e-6:
                bad.append((fam, seed, lb, opt))
    worst_agree = 0.0
    for seed in SUITE_SEEDS:
        o, Z = small_instance("erm", seed).build()
        k = kelley_solve(o, Z, tol=1e-9, max_iter=2000).lower_bound
        s = subgradient_ascent(o, Z, steps=5000).lower_bound
        worst_agree = max(worst_agree, abs(k - s) / max(abs(k), 1e-12))
    ok = not bad and worst_agree <= 1e-3
    verdict(7, ok, f"Kelley LB - optimum <= {worst_gap:.2e} (rel) on every feasible suite instance; Kelley vs subgradient on {len(SUITE_SEEDS)} ERM-OLS: max rel diff {worst_agree:.2e}" + (f", violations {bad[:3]}" if bad else ""))


# ---------------------------------------------------------------- 8. ablation


def test_criterion_08_ablation():
    plain_t, both_t = [], []
    for seed in range(30):
        o, Z = gen.random_facility(11, 11, seed).build()
        t = time.perf_counter()
        a = solve_singletree(o, Z)
        plain_t.append(time.perf_counter() - t)
        t = time.perf_counter()
        b = solve_singletree(o, Z, config=SolverConfig(use_relaxation_warmstart=True, use_heuristics=True))
        both_t.append(time.perf_counter() - t)
        assert a.status == b.status == OPTIMAL and _rel(a.value, b.value) <= 1e-6
    mp, mb = float(np.mean(plain_t)), float(np.mean(both_t))
    print("    configuration        mean s   median s   ratio")
    print(f"    OA                   {mp:7.3f}   {np.median(plain_t):8.3f}   1.000")
    print(f"    OA + both            {mb:7.3f}   {np.median(both_t):8.3f}   {mb / mp:5.3f}")
    verdict(8, mb <= mp, f"30 facility instances (11x11), mean OA {mp:.2f}s vs OA+both {mb:.2f}s, ratio {mb / mp:.3f}")


# ---------------------------------------------------------------- 9. regularizer comparison


def _uc_pair(seed, alpha):
    """Big-M and perspective (ridge) formulations of one UC instance.

    The quadratic costs are set to their mean so that a single ridge gamma
    carries the whole quadratic term in the perspective formulation.
    """
    uc = gen.random_uc(4, 3, seed, alpha=alpha).instance
    abar = float(uc.a.mean())
    flat = UCInstance(np.full(uc.units, abar), uc.b, uc.u, uc.demand, uc.fixed)
    persp = UCInstance(np.full(uc.units, 1e-9), uc.b, uc.u, uc.demand, uc.fixed)
    Z = FeasibleSet(uc.units * uc.periods)
    return UCOracle(flat, Regularizer.bigm(float(uc.u.max()))), UCOracle(persp, Regularizer.ridge(1.0 / abar)), Z


def test_criterion_09_regularizer_comparison():
    ratios, rows = [], []
    for alpha in (0.1, 1.0, 10.0):
        work = {"bigM": 0, "ridge": 0}
        for seed in range(6):
            ob, orr, Z = _uc_pair(seed, alpha)
            b, r = solve_singletree(ob, Z), solve_singletree(orr, Z)
            assert b.status == r.status == OPTIMAL
            assert _rel(b.value, r.value) <= 1e-4
            work["bigM"] += b.nodes_explored + b.cuts_optimality + b.cuts_feasibility
            work["ridge"] += r.nodes_explored + r.cuts_optimality + r.cuts_feasibility
        ratios.append(work["ridge"] / work["bigM"])
        rows.append(f"    alpha={alpha:<5g} bigM nodes+cuts={work['bigM']:6d} ridge nodes+cuts={work['ridge']:6d} ratio={ratios[-1]:.3f}")
    for r in rows:
        print(r)
    ok = ratios[0] > ratios[1] > ratios[2]
    verdict(9, ok, "ridge/bigM work ratio " + " > ".join(f"{r:.3f}" for r in ratios) + " across alpha = 0.1, 1, 10")


# ---------------------------------------------------------------- 10. parser conformance


def test_criterion_10_parser_conformance(tmp_path):
    trips = 0
    for seed in range(25):
        f = gen.random_facility(3 + seed % 5, 2 + seed % 7, seed).instance
        text = serialize_orlib_cap(f)
        assert serialize_orlib_cap(parse_orlib_cap(text).instance) == text
        q = gen.random_bqp(2 + seed % 9, seed).instance
        btext = serialize_biqmac(BQPInstance(q.Q, "max"))
        back = parse_biqmac(btext).instance
        assert np.array_equal(back.Q, q.Q) and serialize_biqmac(back) == btext
        trips += 2
    corpus = sorted((Path(__file__).parent / "data" / "malformed").iterdir())
    structured = 0
    for path in corpus:
        try:
            read_instance(str(path))
        except InstanceFormatError as exc:
            d = exc.to_dict()
            structured += bool(d["error"] and d["message"] and d["source"])
        if run_cli(["solve", "--problem", str(path)]) != 1:
            structured -= 1
    ok = len(corpus) >= 10 and structured == len(corpus)
    verdict(10, ok, f"{trips} OR-Library/Biq-Mac round trips identical; {structured}/{len(corpus)} malformed files gave structured errors and exit 1")


# ---------------------------------------------------------------- 11. heuristic contracts


def test_criterion_11_heuristic_contracts():
    rng = np.random.default_rng(11)
    built = {}
    worse = infeasible = pairs = other = 0
    for t in range(1000):
        fam = FAMILY_NAMES[t % len(FAMILY_NAMES)]
        seed = int(rng.integers(0, 20))
        if (fam, seed) not in built:
            o, Z = small_instance(fam, seed).build()
            built[(fam, seed)] = (o, Z, [np.asarray(p, float) for p in Z.points()])
        o, Z, pts = built[(fam, seed)]
        z0 = pts[int(rng.integers(0, len(pts)))]
        r0 = o.evaluate(z0)
        v0 = o.c @ z0 + r0.f_value if r0.feasible else np.inf
        res = local_search(z0, Z, o)
        pairs += 1
        if res.found:
            infeasible += not Z.contains(res.z_best)
            worse += res.ub > v0 + 1e-9 * (1 + abs(res.ub))
        if t % 5 == 0:
            zf = np.clip(rng.uniform(size=Z.n), Z.lower, Z.upper)
            if Z.k is not None and zf.sum() > Z.k:
                zf = np.maximum(zf * Z.k / zf.sum(), Z.lower)
            for h in (randomized_rounding(zf, Z, o, trials=5, seed=t), sequential_rounding(zf, Z, o, seed=t)):
                other += 1
                if h.found:
                    infeasible += not Z.contains(h.z_best)
    verdict(11, worse == 0 and infeasible == 0, f"{pairs} local-search pairs ({worse} worse than start), {other} rounding outputs, {infeasible} infeasible outputs")
