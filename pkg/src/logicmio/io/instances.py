"""JSON instance files for all six problem families.

A file is one JSON object::

    {"family": "bqp", "Q": [[1, -2], [-2, 1]], "sense": "min",
     "feasible_set": {"n": 2, "k": 1},          # optional, default: all of {0,1}^n
     "regularizer": {"kind": "bigM", "M": 1},   # optional, the CLI may override
     "c": [...],                                # optional linear cost on z
     "meta": {...}}                             # optional, free-form

Family payload fields sit at the top level.  Unknown fields are rejected.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..feasible import EmptyFeasibleSet, FeasibleSet
from ..oracles import FAMILIES, BQPInstance, ERMInstance, FacilityInstance, NetDesignInstance, PortfolioInstance, UCInstance, make_oracle
from ..oracles.base import Oracle
from ..regularizers import Regularizer
from .errors import ParseError, ValidationError

SCALAR, INT, STRING, VECTOR, INTVECTOR, MATRIX = "scalar", "int", "string", "vector", "intvector", "matrix"

# field -> (kind, required)
SCHEMAS = {
    "erm": {"X": (MATRIX, True), "y": (VECTOR, True), "loss": (STRING, False)},
    "portfolio": {
        "mu": (VECTOR, True),
        "Sigma": (MATRIX, True),
        "sigma": (SCALAR, False),
        "A": (MATRIX, False),
        "l": (VECTOR, False),
        "u": (VECTOR, False),
    },
    "facility": {"fixed": (VECTOR, True), "cost": (MATRIX, True), "capacity": (VECTOR, True), "demand": (VECTOR, True)},
    "netdesign": {
        "num_nodes": (INT, True),
        "tails": (INTVECTOR, True),
        "heads": (INTVECTOR, True),
        "demands": (MATRIX, True),
        "Q": (MATRIX, False),
        "Q_diag": (VECTOR, False),
        "d": (VECTOR, True),
        "capacity": (VECTOR, True),
        "penalty": (SCALAR, False),
        "build_cost": (VECTOR, False),
    },
    "uc": {"a": (VECTOR, True), "b": (VECTOR, True), "u": (VECTOR, True), "demand": (VECTOR, True), "fixed": (MATRIX, False)},
    "bqp": {"Q": (MATRIX, True), "sense": (STRING, False)},
}
COMMON = {"family", "feasible_set", "regularizer", "c", "meta"}


@dataclass
class InstanceFile:
    family: str
    instance: object
    feasible_set: Optional[FeasibleSet] = None
    regularizer: Optional[Regularizer] = None
    c: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def build(self, reg: Optional[Regularizer] = None) -> tuple[Oracle, FeasibleSet]:
        """Oracle and feasible set; ``reg`` overrides the file's regularizer."""
        reg = reg or self.regularizer
        oracle = make_oracle(self.family, self.instance, reg, self.c)
        Z = self.feasible_set or FeasibleSet(oracle.n)
        if Z.n != oracle.n:
            raise ValidationError(f"feasible set has n={Z.n} but the instance has {oracle.n} binary variables", field="feasible_set")
        return oracle, Z

    def to_dict(self) -> dict:
        out = {"family": self.family}
        out.update(payload_of(self.family, self.instance))
        if self.feasible_set is not None:
            out["feasible_set"] = self.feasible_set.to_dict()
        if self.regularizer is not None:
            out["regularizer"] = self.regularizer.to_dict()
        if self.c is not None:
            out["c"] = _plain(self.c)
        if self.meta:
            out["meta"] = self.meta
        return out

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def digest(self) -> str:
        return "sha256:" + hashlib.sha256(dumps(self.to_dict()).encode()).hexdigest()

    def __eq__(self, other):
        return isinstance(other, InstanceFile) and self.to_json() == other.to_json()


def dumps(obj) -> str:
    """Deterministic compact JSON (insertion order, shortest float repr), newline-terminated."""
    return json.dumps(obj, allow_nan=False, separators=(",", ":")) + "\n"


def _plain(a):
    a = np.asarray(a)
    if a.dtype.kind in "iu":
        return a.tolist()
    return [_plain(r) for r in a] if a.ndim > 1 else [float(v) for v in a]


def payload_of(family: str, inst) -> dict:
    if family == "erm":
        return {"X": _plain(inst.X), "y": _plain(inst.y), "loss": inst.loss}
    if family == "portfolio":
        out = {"mu": _plain(inst.mu), "Sigma": _plain(inst.Sigma), "sigma": float(inst.sigma)}
        if inst.A.shape[0]:
            out.update(A=_plain(inst.A), l=[_num(v) for v in inst.l], u=[_num(v) for v in inst.u])
        return out
    if family == "facility":
        return {"fixed": _plain(inst.fixed), "cost": _plain(inst.cost), "capacity": _plain(inst.capacity), "demand": _plain(inst.demand)}
    if family == "netdesign":
        out = {
            "num_nodes": inst.num_nodes,
            "tails": [int(v) for v in inst.tails],
            "heads": [int(v) for v in inst.heads],
            "demands": _plain(inst.demands),
        }
        if np.count_nonzero(inst.Q - np.diag(np.diag(inst.Q))) == 0:
            out["Q_diag"] = _plain(np.diag(inst.Q))
        else:
            out["Q"] = _plain(inst.Q)
        out.update(d=_plain(inst.d), capacity=_plain(inst.capacity), penalty=float(inst.penalty), build_cost=_plain(inst.build_cost))
        return out
    if family == "uc":
        return {"a": _plain(inst.a), "b": _plain(inst.b), "u": _plain(inst.u), "demand": _plain(inst.demand), "fixed": _plain(inst.fixed)}
    if family == "bqp":
        return {"Q": _plain(inst.Q), "sense": inst.sense}
    raise ValueError(f"unknown family {family!r}")


def _num(v):
    """Infinite side-constraint bounds are written as null."""
    return None if not math.isfinite(v) else float(v)


# ---------------------------------------------------------------------------
# parsing


def _field_line(text: Optional[str], name: str) -> Optional[int]:
    if not text:
        return None
    pos = text.find(f'"{name}"')
    return None if pos < 0 else text.count("\n", 0, pos) + 1


def _reject_constant(name):
    raise ParseError(f"non-finite number {name} is not allowed")


def _convert(name, kind, value, text, source):
    def bad(expected):
        return ParseError(f"expected {expected}", field=name, line=_field_line(text, name), source=source)

    def is_num(v):
        return isinstance(v, (int, float)) and not isinstance(v, bool)

    if kind == SCALAR:
        if not is_num(value):
            raise bad("a number")
        return float(value)
    if kind == INT:
        if not (isinstance(value, int) and not isinstance(value, bool)):
            raise bad("an integer")
        return value
    if kind == STRING:
        if not isinstance(value, str):
            raise bad("a string")
        return value
    if kind in (VECTOR, INTVECTOR):
        if not isinstance(value, list) or not all(is_num(v) or (v is None and name in ("l", "u")) for v in value):
            raise bad("a list of numbers")
        if kind == INTVECTOR:
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
                raise bad("a list of integers")
            return np.asarray(value, dtype=int)
        return np.array([np.nan if v is None else v for v in value], dtype=float)
    if kind == MATRIX:
        if not isinstance(value, list) or not all(isinstance(r, list) and all(is_num(v) for v in r) for r in value):
            raise bad("a list of rows of numbers")
        widths = {len(r) for r in value}
        if len(widths) > 1:
            raise ValidationError("rows have different lengths", field=name, line=_field_line(text, name), source=source)
        if not value:
            return np.zeros((0, 0))
        return np.asarray(value, dtype=float)
    raise AssertionError(kind)


def _construct(family, kw):
    if family == "erm":
        return ERMInstance(kw["X"], kw["y"], kw.get("loss", "OLS"))
    if family == "portfolio":
        l, u = kw.get("l"), kw.get("u")
        if l is not None:
            l = np.where(np.isnan(l), -np.inf, l)
        if u is not None:
            u = np.where(np.isnan(u), np.inf, u)
        return PortfolioInstance(kw["mu"], kw["Sigma"], kw.get("sigma", 1.0), kw.get("A"), l, u)
    if family == "facility":
        return FacilityInstance(kw["fixed"], kw["cost"], kw["capacity"], kw["demand"])
    if family == "netdesign":
        if "Q" in kw and "Q_diag" in kw:
            raise ValidationError("give either Q or Q_diag, not both", field="Q_diag")
        n = kw["tails"].size
        if "Q" in kw:
            Q = kw["Q"]
        elif "Q_diag" in kw:
            if kw["Q_diag"].size != n:
                raise ValidationError(f"Q_diag needs {n} entries", field="Q_diag")
            Q = np.diag(kw["Q_diag"])
        else:
            Q = np.zeros((n, n))
        return NetDesignInstance(kw["num_nodes"], kw["tails"], kw["heads"], kw["demands"], Q, kw["d"], kw["capacity"], kw.get("penalty", 1000.0), kw.get("build_cost"))
    if family == "uc":
        return UCInstance(kw["a"], kw["b"], kw["u"], kw["demand"], kw.get("fixed"))
    if family == "bqp":
        return BQPInstance(kw["Q"], kw.get("sense", "min"))
    raise AssertionError(family)


def instance_from_dict(data, text: Optional[str] = None, source: Optional[str] = None) -> InstanceFile:
    if not isinstance(data, dict):
        raise ParseError("top-level JSON value must be an object", source=source)
    family = data.get("family")
    if family is None:
        raise ParseError("missing required field", field="family", source=source)
    if family not in SCHEMAS:
        raise ParseError(f"unknown family {family!r}; expected one of {sorted(SCHEMAS)}", field="family", line=_field_line(text, "family"), source=source)
    schema = SCHEMAS[family]
    for name in data:
        if name not in schema and name not in COMMON:
            raise ParseError(f"unknown field for family {family!r}", field=name, line=_field_line(text, name), source=source)
    kw = {}
    for name, (kind, required) in schema.items():
        if name not in data:
            if required:
                raise ParseError("missing required field", field=name, source=source)
            continue
        kw[name] = _convert(name, kind, data[name], text, source)
    try:
        inst = _construct(family, kw)
    except ValidationError:
        raise
    except (ValueError, TypeError) as exc:
        raise ValidationError(str(exc), source=source) from None

    Z = reg = c = None
    if "feasible_set" in data:
        fs = data["feasible_set"]
        if not isinstance(fs, dict):
            raise ParseError("expected an object", field="feasible_set", line=_field_line(text, "feasible_set"), source=source)
        try:
            Z = FeasibleSet.from_dict(fs)
        except EmptyFeasibleSet as exc:
            raise ValidationError(f"feasible set is empty: {exc}", field="feasible_set", source=source) from None
        except KeyError as exc:
            raise ParseError(f"missing required field {exc.args[0]!r}", field="feasible_set", source=source) from None
        except (ValueError, TypeError) as exc:
            raise ValidationError(str(exc), field="feasible_set", source=source) from None
    if "regularizer" in data:
        try:
            reg = Regularizer.from_dict(data["regularizer"])
        except (KeyError, ValueError, TypeError, AttributeError) as exc:
            raise ParseError(f"invalid regularizer: {exc}", field="regularizer", line=_field_line(text, "regularizer"), source=source) from None
    if "c" in data:
        c = _convert("c", VECTOR, data["c"], text, source)
    meta = data.get("meta", {})
    if not isinstance(meta, dict):
        raise ParseError("expected an object", field="meta", source=source)
    out = InstanceFile(family, inst, Z, reg, c, meta)
    try:
        oracle, Zb = out.build()
    except ValidationError as exc:
        if exc.source is None:
            exc.source = source
        raise
    except (ValueError, TypeError) as exc:
        raise ValidationError(str(exc), source=source) from None
    if c is not None and c.shape != (oracle.n,):
        raise ValidationError(f"c needs {oracle.n} entries", field="c", source=source)
    return out


def loads(text: str, source: Optional[str] = None) -> InstanceFile:
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", source=source, line=exc.lineno, column=exc.colno) from None
    except ParseError as exc:
        exc.source = source
        raise
    return instance_from_dict(data, text, source)


def parse_instance(path_or_text: Union[str, Path], reg: Optional[Regularizer] = None):
    """Parse a JSON instance given a path or the JSON text itself.

    Returns (InstanceFile, oracle, FeasibleSet).
    """
    source = None
    text = str(path_or_text)
    if isinstance(path_or_text, Path) or not text.lstrip().startswith("{"):
        path = Path(path_or_text)
        source = str(path)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise ParseError(f"cannot read file: {exc.strerror}", source=source) from None
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            raise ParseError("file is not valid UTF-8 text", source=source) from None
    inst = loads(text, source)
    oracle, Z = inst.build(reg)
    return inst, oracle, Z


def families() -> list[str]:
    return sorted(FAMILIES)
