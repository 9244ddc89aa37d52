"""Biq-Mac sparse matrix files: ``n nnz`` followed by nnz records ``i j q``.

Indices are 1-based and each record fills both Q_ij and Q_ji.  The library's
instances are maximisation problems, so the sense is recorded as ``max``.
A repeated (i, j) pair keeps the last value and emits a warning.
"""

from __future__ import annotations

import warnings

import numpy as np

from ..oracles import BQPInstance
from .errors import ParseError
from .instances import InstanceFile
from .tokens import TokenStream, format_number


class DuplicateEntryWarning(UserWarning):
    pass


def parse_biqmac(text: str, source: str = None, sense: str = "max") -> InstanceFile:
    ts = TokenStream(text, source)
    if len(ts) == 0:
        raise ParseError("empty file", source=source)
    n = ts.integer("the dimension n")
    nnz = ts.integer("the number of entries")
    if n <= 0 or nnz < 0:
        raise ParseError(f"invalid header n={n}, nnz={nnz}", source=source, line=1)
    if ts.remaining != 3 * nnz:
        line, _ = ts.here()
        raise ParseError(f"header announces {nnz} entries ({3 * nnz} tokens) but {ts.remaining} tokens follow", source=source, line=line, token=2 + min(ts.remaining, 3 * nnz) + 1)
    Q = np.zeros((n, n))
    seen = {}
    duplicates = []
    for r in range(nnz):
        line, col = ts.here()
        i = ts.integer("a row index")
        j = ts.integer("a column index")
        q = ts.real("a matrix entry")
        for idx in (i, j):
            if not 1 <= idx <= n:
                raise ParseError(f"index {idx} outside [1, {n}]", source=source, line=line, column=col)
        key = (min(i, j), max(i, j))
        if key in seen:
            duplicates.append((key, seen[key], line))
        seen[key] = line
        Q[i - 1, j - 1] = Q[j - 1, i - 1] = q
    for (a, b), first, again in duplicates:
        warnings.warn(f"entry ({a}, {b}) given on lines {first} and {again}; the last value is kept", DuplicateEntryWarning, stacklevel=2)
    meta = {"source_format": "biqmac"}
    if duplicates:
        meta["duplicate_entries"] = len(duplicates)
    return InstanceFile("bqp", BQPInstance(Q, sense), meta=meta)


def serialize_biqmac(instance: BQPInstance) -> str:
    Q = instance.Q
    n = Q.shape[0]
    iu, ju = np.triu_indices(n)
    keep = Q[iu, ju] != 0
    rows = [f"{i + 1} {j + 1} {format_number(Q[i, j])}" for i, j in zip(iu[keep], ju[keep])]
    return "\n".join([f"{n} {len(rows)}"] + rows) + "\n"
