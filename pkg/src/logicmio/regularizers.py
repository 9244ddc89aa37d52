"""Big-M and ridge regularizers, their conjugates and the ridge perspective."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

BOX_TOL = 1e-9


@dataclass(frozen=True)
class Regularizer:
    """Separable regularizer Omega(x) = sum_i Omega_i(x_i).

    ``kind`` is ``"bigM"`` (indicator of the box |x_i| <= M) or ``"ridge"``
    (x_i^2 / (2 gamma)).
    """

    kind: str
    M: Optional[float] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.kind == "bigM":
            if self.M is None or not self.M > 0:
                raise ValueError("big-M regularizer needs M > 0")
        elif self.kind == "ridge":
            if self.gamma is None or not self.gamma > 0:
                raise ValueError("ridge regularizer needs gamma > 0")
        else:
            raise ValueError(f"unknown regularizer kind {self.kind!r}")

    @classmethod
    def bigm(cls, M: float) -> "Regularizer":
        return cls("bigM", M=float(M))

    @classmethod
    def ridge(cls, gamma: float) -> "Regularizer":
        return cls("ridge", gamma=float(gamma))

    @property
    def is_ridge(self) -> bool:
        return self.kind == "ridge"

    @property
    def is_bigm(self) -> bool:
        return self.kind == "bigM"

    def to_dict(self) -> dict:
        if self.is_bigm:
            return {"kind": "bigM", "M": self.M}
        return {"kind": "ridge", "gamma": self.gamma}

    @classmethod
    def from_dict(cls, data: dict) -> "Regularizer":
        extra = set(data) - {"kind", "M", "gamma"}
        if extra:
            raise ValueError(f"unknown regularizer fields: {sorted(extra)}")
        kind = data.get("kind")
        if kind == "bigM":
            return cls.bigm(data["M"])
        if kind == "ridge":
            return cls.ridge(data["gamma"])
        raise ValueError(f"unknown regularizer kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Regularizer":
        """Parse the command-line form ``bigM:M=10`` or ``ridge:gamma=1.0``."""
        head, _, tail = text.partition(":")
        params = {}
        for item in filter(None, tail.split(",")):
            key, _, value = item.partition("=")
            params[key.strip()] = float(value)
        if head.lower() == "bigm":
            return cls.bigm(params["M"])
        if head.lower() == "ridge":
            return cls.ridge(params["gamma"])
        raise ValueError(f"cannot parse regularizer {text!r}")

    def __str__(self):
        return f"bigM(M={self.M:g})" if self.is_bigm else f"ridge(gamma={self.gamma:g})"


def omega(reg: Regularizer, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if reg.is_bigm:
        if x.size == 0 or np.max(np.abs(x)) <= reg.M + BOX_TOL:
            return 0.0
        return math.inf
    return float(x @ x) / (2.0 * reg.gamma)


def conjugate(reg: Regularizer, beta, M=None):
    """Omega*(beta); vectorised over ``beta``.

    ``M`` overrides the box bound (scalar or per-coordinate array) for
    families whose continuous variables carry tighter implied bounds.
    """
    beta = np.asarray(beta, dtype=float)
    if reg.is_bigm:
        bound = reg.M if M is None else M
        out = bound * np.abs(beta)
    else:
        out = 0.5 * reg.gamma * beta * beta
    return float(out) if out.ndim == 0 else out


def conjugate_grad(reg: Regularizer, beta, M=None):
    """A (sub)gradient of Omega* at beta; the big-M kink at 0 maps to 0."""
    beta = np.asarray(beta, dtype=float)
    if reg.is_bigm:
        bound = reg.M if M is None else M
        return bound * np.sign(beta)
    return reg.gamma * beta


def perspective_term(reg: Regularizer, x: float, z: float) -> float:
    """x^2 / (2 gamma z), closed at z = 0."""
    if not reg.is_ridge:
        raise ValueError("perspective term is defined for the ridge regularizer")
    if z < 0 or z > 1:
        raise ValueError("z must lie in [0, 1]")
    if z > 0:
        return x * x / (2.0 * reg.gamma * z)
    return 0.0 if x == 0 else math.inf
