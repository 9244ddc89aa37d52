"""Command-line entry point: ``logicmio solve | generate | convert``."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .bruteforce import DimensionTooLarge, enumerate_z
from .heuristics import local_search, randomized_rounding, sequential_rounding
from .io import generators as gen
from .io.biqmac import parse_biqmac, serialize_biqmac
from .io.errors import InstanceFormatError, ParseError
from .io.instances import InstanceFile, loads
from .io.orlib import parse_orlib_cap, serialize_orlib_cap
from .io.report import build_report, render_figures, write_json, write_sweep_csv
from .master import GAP_LIMIT, INFEASIBLE, MULTI, OPTIMAL, SINGLE, TIME_LIMIT, SolverConfig, relative_gap, solve
from .oracles import FAMILIES
from .relaxation import kelley_solve

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2
MODES = ("exact", "relax", "heuristic", "bruteforce")
FORMATS = ("json", "orlib-cap", "biqmac")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _onoff(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="logicmio", description="Outer approximation for mixed-integer problems with logical constraints.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("--problem", required=True, help="instance file")
    s.add_argument("--format", choices=FORMATS, default=None, help="input format (default: from the extension, else json)")
    s.add_argument("--costs-are-totals", action="store_true", help="OR-Library input: divide allocation costs by demand")
    s.add_argument("--mode", default="exact", help="exact | relax | heuristic | bruteforce (single/multi select exact with that tree)")
    s.add_argument("--tree", choices=(SINGLE, MULTI), default=SINGLE, help="exact solver variant")
    s.add_argument("--regularizer", default=None, help="bigM:M=10 | ridge:gamma=1.0 | natural")
    s.add_argument("--eps", type=float, default=1e-6)
    s.add_argument("--time-limit", type=float, default=np.inf)
    s.add_argument("--node-limit", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--report", default=None, help="write the JSON report (and figures) here")
    s.add_argument("--warmstart", type=_onoff, default=False, metavar="on|off")
    s.add_argument("--heuristics", type=_onoff, default=False, metavar="on|off")
    s.add_argument("--sweep", default=None, help="re-solve for several parameter values, e.g. gamma=0.1,1,10 or M=1,2,4")

    g = sub.add_parser("generate", help="write a generated instance")
    g.add_argument("--family", required=True, choices=sorted(FAMILIES))
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--m", type=int, default=4, help="netdesign: nodes")
    g.add_argument("--p", type=int, default=None, help="netdesign: extra-edge multiplier; erm: features")
    g.add_argument("--budget-growth", type=float, default=0.05, help="netdesign: budget growth over the initial network")
    g.add_argument("--n", type=int, default=None, help="erm: samples; other families: main size")
    g.add_argument("--k", type=int, default=None, help="cardinality budget (erm: true support size)")
    g.add_argument("--snr", type=float, default=6.0)
    g.add_argument("--loss", choices=("OLS", "SVM"), default="OLS")
    g.add_argument("--customers", type=int, default=None, help="facility: customers")
    g.add_argument("--periods", type=int, default=None, help="uc: periods")
    g.add_argument("--alpha", type=float, default=1.0, help="uc: quadratic cost scaling")
    g.add_argument("--out", default=None, help="output file (default: stdout)")

    c = sub.add_parser("convert", help="convert between instance formats")
    c.add_argument("input")
    c.add_argument("--from", dest="src", choices=FORMATS, default=None)
    c.add_argument("--to", dest="dst", choices=FORMATS, default="json")
    c.add_argument("--costs-are-totals", action="store_true")
    c.add_argument("--out", default=None)
    return p


# ---------------------------------------------------------------------------
# input helpers


def _guess_format(path: str, given: Optional[str]) -> str:
    if given:
        return given
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return "json"
    if suffix in (".cap", ".txt") or Path(path).name.startswith("cap"):
        return "orlib-cap"
    if suffix in (".sparse", ".bq", ".biq"):
        return "biqmac"
    return "json"


def read_instance(path: str, fmt: Optional[str] = None, costs_are_totals: bool = False) -> InstanceFile:
    fmt = _guess_format(path, fmt)
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", source=path) from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ParseError("file is not valid UTF-8 text", source=path) from None
    if fmt == "json":
        return loads(text, source=path)
    if fmt == "orlib-cap":
        return parse_orlib_cap(text, costs_are_totals=costs_are_totals, source=path)
    return parse_biqmac(text, source=path)


def _regularizer(arg: Optional[str], inst: InstanceFile):
    from .regularizers import Regularizer

    if arg is None:
        return inst.regularizer  # None means the family default
    if arg == "natural":
        _, cls = FAMILIES[inst.family]
        return cls.natural_regularizer(inst.instance)
    try:
        return Regularizer.parse(arg)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"invalid --regularizer {arg!r}: {exc}") from None


def _parse_sweep(text: str):
    name, _, values = text.partition("=")
    name = name.strip()
    if name not in ("gamma", "M") or not values:
        raise UsageError("--sweep expects gamma=v1,v2,... or M=v1,v2,...")
    try:
        vals = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--sweep values must be numbers: {values!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise UsageError("--sweep values must be positive")
    return name, vals


# ---------------------------------------------------------------------------
# solve modes


def _aggregate_x(x, n):
    """One continuous value per binary coordinate (sums grouped columns)."""
    if x is None:
        return None
    x = np.asarray(x, dtype=float)
    if x.ndim == 2 and x.shape[0] == n:
        return x.sum(axis=1)
    x = x.ravel()
    return x if x.size == n else None


def run_mode(mode: str, oracle, Z, config: SolverConfig) -> dict:
    t0 = time.perf_counter()
    c = oracle.c
    if mode == "exact":
        rep = solve(oracle, Z, config=config)
        out = rep.to_dict()
        out["lower_history"] = rep.lower_history
        out["upper_history"] = rep.upper_history
        out["tree"] = config.mode
        return out
    if mode == "bruteforce":
        res = enumerate_z(oracle, Z)
        status = INFEASIBLE if res.all_infeasible else OPTIMAL
        x = None if res.all_infeasible else oracle.evaluate(res.best_z).x_star
        return {
            "status": status,
            "z": None if res.best_z is None else [int(v) for v in res.best_z],
            "x": None if x is None else np.asarray(x).ravel().tolist(),
            "upper_bound": res.best_value,
            "lower_bound": res.best_value,
            "gap": 0.0 if not res.all_infeasible else None,
            "evaluated": res.evaluated,
            "infeasible_count": res.infeasible_count,
            "stage_timings": {"total": time.perf_counter() - t0},
        }
    rel = kelley_solve(oracle, Z, c)
    t_rel = time.perf_counter() - t0
    if not np.isfinite(rel.lower_bound) and rel.lower_bound > 0:
        return {"status": INFEASIBLE, "z": None, "x": None, "upper_bound": None, "lower_bound": None, "gap": None, "relaxation_iterations": rel.iterations, "stage_timings": {"relaxation": t_rel}}
    best = randomized_rounding(rel.z_frac, Z, oracle, trials=100, seed=config.seed, c=c)
    stages = {"relaxation": t_rel}
    if mode == "heuristic":
        t1 = time.perf_counter()
        seq = sequential_rounding(rel.z_frac, Z, oracle, c=c, seed=config.seed)
        if seq.found and seq.ub < best.ub:
            best = seq
        if best.found:
            ls = local_search(best.z_best, Z, oracle, c=c)
            if ls.found and ls.ub < best.ub:
                best = ls
        stages["heuristics"] = time.perf_counter() - t1
    ub = best.ub if best.found else np.inf
    x = oracle.evaluate(best.z_best).x_star if best.found else None
    lb = min(rel.lower_bound, ub)
    status = GAP_LIMIT if best.found else TIME_LIMIT
    if best.found and relative_gap(ub, lb) <= config.eps:
        status = OPTIMAL
    stages["total"] = time.perf_counter() - t0
    return {
        "status": status,
        "z": None if not best.found else [int(v) for v in best.z_best],
        "x": None if x is None else np.asarray(x).ravel().tolist(),
        "upper_bound": ub,
        "lower_bound": lb,
        "gap": relative_gap(ub, lb),
        "relaxation_iterations": rel.iterations,
        "relaxation_converged": rel.converged,
        "z_relaxed": None if rel.z_frac is None else rel.z_frac.tolist(),
        "lower_history": rel.history,
        "stage_timings": stages,
    }


def _sweep_rows(inst: InstanceFile, mode: str, config: SolverConfig, name: str, values) -> list:
    from .regularizers import Regularizer

    rows = []
    for v in values:
        reg = Regularizer.ridge(v) if name == "gamma" else Regularizer.bigm(v)
        oracle, Z = inst.build(reg)
        t0 = time.perf_counter()
        res = run_mode(mode, oracle, Z, config)
        row = {
            "parameter": name,
            "value": v,
            "status": res["status"],
            "lower_bound": res.get("lower_bound"),
            "upper_bound": res.get("upper_bound"),
            "gap": res.get("gap"),
            "nodes": res.get("nodes_explored"),
            "cuts_optimality": res.get("cuts_optimality"),
            "cuts_feasibility": res.get("cuts_feasibility"),
            "seconds": time.perf_counter() - t0,
            "support": "" if res.get("z") is None else "".join(str(b) for b in res["z"]),
        }
        xs = None
        if res.get("z") is not None:
            xs = _aggregate_x(oracle.evaluate(np.array(res["z"])).x_star, oracle.n)
        if xs is not None:
            row.update({f"x_{j}": float(val) for j, val in enumerate(xs)})
        rows.append(row)
    return rows


def cmd_solve(args) -> int:
    mode = args.mode
    tree = args.tree
    if mode in (SINGLE, MULTI):
        mode, tree = "exact", mode
    if mode not in MODES:
        raise UsageError(f"unknown --mode {args.mode!r}; expected one of {', '.join(MODES + (SINGLE, MULTI))}")
    inst = read_instance(args.problem, args.format, args.costs_are_totals)
    reg = _regularizer(args.regularizer, inst)
    try:
        config = SolverConfig(
            eps=args.eps,
            time_limit=args.time_limit,
            mode=tree,
            node_limit=args.node_limit,
            use_relaxation_warmstart=args.warmstart,
            use_heuristics=args.heuristics,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        oracle, Z = inst.build(reg)
    except ValueError as exc:
        raise InstanceFormatError(str(exc), source=args.problem) from None
    try:
        result = run_mode(mode, oracle, Z, config)
    except DimensionTooLarge as exc:
        raise UsageError(str(exc)) from None
    sweep = None
    if args.sweep:
        name, values = _parse_sweep(args.sweep)
        sweep = _sweep_rows(inst, mode, config, name, values)
    cfg = {"eps": config.eps, "time_limit": config.time_limit, "tree": config.mode, "node_limit": config.node_limit, "warmstart": config.use_relaxation_warmstart, "heuristics": config.use_heuristics, "seed": config.seed}
    report = build_report(result, family=inst.family, digest=inst.digest(), regularizer=oracle.reg.to_dict(), mode=mode, config=cfg, sweep=sweep)
    value = result.get("upper_bound")
    if inst.family == "bqp" and value is not None and np.isfinite(value):
        report["result"]["objective_in_instance_sense"] = oracle.to_user_sense(value)
    if args.report:
        path = write_json(report, args.report)
        render_figures(report, path)
        if sweep is not None:
            write_sweep_csv(sweep, path.with_name(path.stem + "_sweep.csv"))
    _summary(report)
    status = result["status"]
    if status == INFEASIBLE:
        return EXIT_INFEASIBLE
    if status == OPTIMAL or result.get("z") is not None:
        return EXIT_OK
    return EXIT_ERROR


def _summary(report):
    r = report["result"]

    def fmt(v):
        return "n/a" if v is None else f"{v:.10g}"

    print(f"status={r['status']} upper_bound={fmt(r.get('upper_bound'))} lower_bound={fmt(r.get('lower_bound'))} gap={fmt(r.get('gap'))}")
    if r.get("z") is not None:
        print("z=" + "".join(str(b) for b in r["z"]))


def cmd_generate(args) -> int:
    fam = args.family
    try:
        if fam == "netdesign":
            inst = gen.generate_netdesign(gen.NetDesignSpec(args.m, 0 if args.p is None else args.p, args.seed, args.budget_growth))
        elif fam == "erm":
            n = args.n or 30
            p = args.p or 10
            inst = gen.generate_erm(gen.ERMSpec(n, p, args.k or 3, args.snr, args.seed, args.loss))
        elif fam == "facility":
            inst = gen.random_facility(args.n or 5, args.customers or 10, args.seed, k=args.k)
        elif fam == "uc":
            inst = gen.random_uc(args.n or 3, args.periods or 4, args.seed, alpha=args.alpha)
        elif fam == "portfolio":
            inst = gen.random_portfolio(args.n or 8, args.seed, k=args.k or 3)
        else:
            inst = gen.random_bqp(args.n or 8, args.seed, k=args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(inst.to_json(), args.out)
    return EXIT_OK


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_bytes(text.encode("ascii"))
    else:
        sys.stdout.write(text)


def cmd_convert(args) -> int:
    inst = read_instance(args.input, args.src, args.costs_are_totals)
    if args.dst == "json":
        text = inst.to_json()
    elif args.dst == "orlib-cap":
        if inst.family != "facility":
            raise UsageError("only facility instances can be written in OR-Library format")
        text = serialize_orlib_cap(inst.instance)
    else:
        if inst.family != "bqp":
            raise UsageError("only bqp instances can be written in Biq-Mac format")
        text = serialize_biqmac(inst.instance)
    _emit(text, args.out)
    return EXIT_OK


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage() + "logicmio: error: a command is required")
        handler = {"solve": cmd_solve, "generate": cmd_generate, "convert": cmd_convert}[args.command]
        return handler(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR
    except InstanceFormatError as exc:
        print(f"logicmio: {exc.kind} error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, RuntimeError) as exc:
        print(f"logicmio: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main():  # pragma: no cover - console entry point
    sys.exit(run_cli())
