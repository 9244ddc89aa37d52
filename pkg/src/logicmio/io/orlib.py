"""OR-Library capacitated warehouse location files.

Layout (whitespace and line breaks are not significant)::

    m n
    capacity_1 fixed_cost_1
    ...                          (m records)
    demand_1  cost_11 ... cost_m1
    ...                          (n records, one per customer)

Allocation costs are taken as per-unit costs unless ``costs_are_totals`` is
set, in which case each is divided by the customer's demand (some variants of
the library store the cost of serving the customer's whole demand).
"""

from __future__ import annotations

import numpy as np

from ..oracles import FacilityInstance
from ..oracles.base import InstanceError
from .errors import ParseError, ValidationError
from .instances import InstanceFile
from .tokens import TokenStream, format_number


def parse_orlib_cap(text: str, costs_are_totals: bool = False, source: str = None) -> InstanceFile:
    ts = TokenStream(text, source)
    if len(ts) == 0:
        raise ParseError("empty file", source=source)
    m = ts.integer("the number of warehouses")
    n = ts.integer("the number of customers")
    if m <= 0 or n <= 0:
        raise ParseError(f"sizes must be positive, got m={m}, n={n}", source=source, line=1)
    expected = 2 + 2 * m + n * (1 + m)
    if len(ts) != expected:
        line, _ = ts.here()
        raise ParseError(f"expected {expected} tokens for m={m}, n={n}, found {len(ts)}", source=source, line=line, token=min(len(ts), expected) + 1)
    cap = np.empty(m)
    fixed = np.empty(m)
    for i in range(m):
        cap[i] = ts.real(f"capacity of warehouse {i + 1}")
        fixed[i] = ts.real(f"fixed cost of warehouse {i + 1}")
    demand = np.empty(n)
    cost = np.empty((m, n))
    for j in range(n):
        demand[j] = ts.real(f"demand of customer {j + 1}")
        for i in range(m):
            cost[i, j] = ts.real(f"allocation cost ({i + 1}, {j + 1})")
    ts.expect_end()
    if costs_are_totals:
        if np.any(demand <= 0):
            raise ValidationError("cannot convert total costs with a nonpositive demand", source=source)
        cost = cost / demand[None, :]
    try:
        inst = FacilityInstance(fixed, cost, cap, demand)
    except (InstanceError, ValueError) as exc:
        raise ValidationError(str(exc), source=source) from None
    meta = {"source_format": "orlib-cap", "costs_are_totals": bool(costs_are_totals)}
    return InstanceFile("facility", inst, meta=meta)


def serialize_orlib_cap(instance: FacilityInstance) -> str:
    """Write per-unit costs as given, so parsing with the default flag round-trips."""
    n_fac, n_cust = instance.cost.shape
    lines = [f"{n_fac} {n_cust}"]
    for i in range(n_fac):
        lines.append(f"{format_number(instance.capacity[i])} {format_number(instance.fixed[i])}")
    for j in range(n_cust):
        lines.append(format_number(instance.demand[j]))
        lines.append(" ".join(format_number(v) for v in instance.cost[:, j]))
    return "\n".join(lines) + "\n"
