"""Report emission: JSON (schema_version 1), sweep CSV and figures."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

import numpy as np

SCHEMA_VERSION = 1

SWEEP_COLUMNS = ["parameter", "value", "status", "lower_bound", "upper_bound", "gap", "nodes", "cuts_optimality", "cuts_feasibility", "seconds", "support"]


def _clean(v):
    """JSON-safe scalars: non-finite floats become null."""
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if np.isfinite(v) else None
    return v


def build_report(result: dict, *, family: str, digest: str, regularizer: Optional[dict], mode: str, config: dict, sweep: Optional[list] = None, extra: Optional[dict] = None) -> dict:
    """Assemble the report; ``result`` must carry status and both bounds."""
    for key in ("status", "upper_bound", "lower_bound", "gap"):
        if key not in result:
            raise ValueError(f"result lacks {key!r}")
    out = {
        "schema_version": SCHEMA_VERSION,
        "family": family,
        "instance_digest": digest,
        "regularizer": regularizer,
        "mode": mode,
        "config": config,
        "result": result,
    }
    if sweep is not None:
        out["sweep"] = {"columns": sweep_columns(sweep), "rows": sweep}
    if extra:
        out.update(extra)
    return _clean(out)


def write_json(report: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report, indent=2, allow_nan=False) + "\n")
    return path


def sweep_columns(rows) -> list:
    cols = list(SWEEP_COLUMNS)
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    return cols


def write_sweep_csv(rows, path) -> Path:
    path = Path(path)
    cols = sweep_columns(rows)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _csv_cell(row.get(k)) for k in cols})
    return path


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if np.isfinite(v) else ""
    return v


# ---------------------------------------------------------------------------
# figures


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_bounds(lower, upper, path, title="Bounds by iteration") -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    it = np.arange(1, max(len(lower), len(upper)) + 1)
    lo = np.array([np.nan if v is None else v for v in lower], dtype=float)
    up = np.array([np.nan if v is None else v for v in upper], dtype=float)
    lo[~np.isfinite(lo)] = np.nan
    up[~np.isfinite(up)] = np.nan
    if lo.size:
        ax.plot(it[: lo.size], lo, marker="o", ms=3, label="lower bound")
    if up.size:
        ax.plot(it[: up.size], up, marker="s", ms=3, label="upper bound")
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective")
    ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_sweep(rows, path) -> Path:
    """Bounds and relative gap against the regularization parameter."""
    plt = _pyplot()
    vals = np.array([r["value"] for r in rows], dtype=float)
    lo = np.array([np.nan if r.get("lower_bound") is None else r["lower_bound"] for r in rows], dtype=float)
    up = np.array([np.nan if r.get("upper_bound") is None else r["upper_bound"] for r in rows], dtype=float)
    gap = np.array([np.nan if r.get("gap") is None else r["gap"] for r in rows], dtype=float)
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 3.4))
    a1.plot(vals, lo, marker="o", label="lower bound")
    a1.plot(vals, up, marker="s", label="upper bound")
    a2.plot(vals, gap, marker="o", color="C3")
    for ax in (a1, a2):
        if np.all(vals > 0):
            ax.set_xscale("log")
        ax.set_xlabel(rows[0]["parameter"] if rows else "parameter")
    a1.set_ylabel("objective")
    a1.legend(frameon=False)
    a2.set_ylabel("relative gap")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_allocation(rows, path) -> Optional[Path]:
    """Per-coordinate continuous solution against the parameter, when present."""
    keys = sorted({k for r in rows for k in r if k.startswith("x_")}, key=lambda s: int(s[2:]))
    if not keys:
        return None
    plt = _pyplot()
    vals = np.array([r["value"] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    X = np.array([[np.nan if r.get(k) is None else r[k] for k in keys] for r in rows], dtype=float)
    active = np.flatnonzero(np.nanmax(np.abs(X), axis=0) > 1e-9) if X.size else []
    for j in active:
        ax.plot(vals, X[:, j], marker=".", label=keys[j])
    if np.all(vals > 0):
        ax.set_xscale("log")
    ax.set_xlabel(rows[0]["parameter"])
    ax.set_ylabel("x")
    if 0 < len(active) <= 10:
        ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def render_figures(report: dict, json_path) -> list:
    """Write figures next to ``json_path``; returns the paths written."""
    json_path = Path(json_path)
    stem = json_path.with_suffix("")
    written = []
    res = report.get("result", {})
    lows = res.get("lower_history") or [res.get("lower_bound")]
    ups = res.get("upper_history") or [res.get("upper_bound")]
    written.append(plot_bounds(lows, ups, f"{stem}_bounds.png"))
    sweep = report.get("sweep")
    if sweep and sweep["rows"]:
        written.append(plot_sweep(sweep["rows"], f"{stem}_sweep.png"))
        p = plot_allocation(sweep["rows"], f"{stem}_allocation.png")
        if p:
            written.append(p)
    return written
