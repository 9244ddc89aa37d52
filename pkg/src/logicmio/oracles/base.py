"""Shared types for subproblem oracles.

An oracle evaluates ``f(z)`` for one problem family under a fixed regularizer
and returns the value, the primal minimiser, the dual vector ``alpha`` and a
linear cut.  Optimality cuts read ``eta >= constant + coefficients @ z``;
feasibility cuts read ``coefficients @ z >= constant``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..regularizers import Regularizer, conjugate, conjugate_grad

FEASIBLE = "Feasible"
INFEASIBLE = "Infeasible"
OPTIMALITY = "Optimality"
FEASIBILITY = "Feasibility"
EXCLUSION = "Exclusion"
MONOTONE = "Monotone"
CERTIFICATE = "Certificate"

BINARY_TOL = 1e-9


class Unsupported(NotImplementedError):
    """Raised when an oracle lacks an optional capability."""


class InstanceError(ValueError):
    """Instance data are inconsistent or make every z infeasible."""


@dataclass(frozen=True)
class Cut:
    constant: float
    coefficients: np.ndarray
    origin: str = OPTIMALITY
    generated_at: Optional[np.ndarray] = None
    kind: Optional[str] = None

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float).copy()
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "constant", float(self.constant))

    def value(self, z) -> float:
        return self.constant + float(self.coefficients @ np.asarray(z, dtype=float))

    def violation(self, z) -> float:
        """Positive when a feasibility cut is violated at z."""
        return self.constant - float(self.coefficients @ np.asarray(z, dtype=float))

    def to_dict(self) -> dict:
        return {
            "constant": self.constant,
            "coefficients": self.coefficients.tolist(),
            "origin": self.origin,
            "kind": self.kind,
            "generated_at": None if self.generated_at is None else np.asarray(self.generated_at).tolist(),
        }


@dataclass
class SubproblemResult:
    status: str
    f_value: float
    x_star: Optional[np.ndarray]
    alpha_star: Optional[np.ndarray]
    cut: Cut
    infeasibility_cut_kind: Optional[str] = None
    info: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    @property
    def gradient(self) -> np.ndarray:
        return np.asarray(self.cut.coefficients)


def optimality_cut(z, f_value: float, coefficients) -> Cut:
    z = np.asarray(z, dtype=float)
    coefficients = np.asarray(coefficients, dtype=float)
    return Cut(f_value - float(coefficients @ z), coefficients, OPTIMALITY, z.copy())


def exclusion_cut(z) -> Cut:
    """sum_{on}(1 - z_i) + sum_{off} z_i >= 1."""
    zb = np.rint(np.asarray(z, dtype=float)).astype(int)
    coef = np.where(zb == 1, -1.0, 1.0)
    return Cut(1.0 - zb.sum(), coef, FEASIBILITY, zb.astype(float), EXCLUSION)


def monotone_cut(z) -> Cut:
    """sum_{off} z_i >= 1: some coordinate outside the support must switch on."""
    z = np.asarray(z, dtype=float)
    coef = (z <= BINARY_TOL).astype(float)
    return Cut(1.0, coef, FEASIBILITY, z.copy(), MONOTONE)


def infeasible(z, cut: Cut, **info) -> SubproblemResult:
    return SubproblemResult(INFEASIBLE, np.inf, None, None, cut, cut.kind, dict(info))


def is_binary(z, tol=BINARY_TOL) -> bool:
    z = np.asarray(z, dtype=float)
    return bool(np.all((np.abs(z) <= tol) | (np.abs(z - 1) <= tol)))


class Oracle:
    """Base class.  Subclasses implement ``_solve(z)`` for z in [0, 1]^n.

    ``_solve`` receives binary or fractional z.  Under ridge, a fractional
    z_i scales the ridge weight to gamma * z_i (perspective form); under big-M
    it scales the box to M_i * z_i.  For binary z this is the plain
    restricted problem.
    """

    family = "abstract"
    supports_h = False

    def __init__(self, reg: Regularizer):
        if not isinstance(reg, Regularizer):
            raise TypeError("reg must be a Regularizer")
        self.reg = reg

    # -- interface ------------------------------------------------------
    n: int
    c: np.ndarray

    @classmethod
    def natural_regularizer(cls, instance=None) -> Regularizer:
        raise NotImplementedError

    def evaluate(self, z) -> SubproblemResult:
        z = self._check(z)
        if not is_binary(z):
            raise ValueError("evaluate expects a binary z; use evaluate_fractional")
        return self._solve(np.rint(z), binary=True)

    def evaluate_fractional(self, z) -> SubproblemResult:
        z = self._check(z)
        if is_binary(z):
            return self._solve(np.rint(z), binary=True)
        return self._solve(np.clip(z, 0.0, 1.0), binary=False)

    def h_eval(self, theta):
        raise Unsupported(f"{self.family} oracle does not expose h")

    def coupled_adjoint(self, v) -> np.ndarray:
        """Adjoint of ``coupled``; used to assemble supergradients of q."""
        return np.asarray(v, dtype=float)

    def h_start(self) -> np.ndarray:
        """A zero vector in the domain of ``h_eval``."""
        raise Unsupported(f"{self.family} oracle does not expose h")

    def primal_objective(self, z, x) -> float:
        """g(x) + regularization terms at a given primal point (perspective form)."""
        raise NotImplementedError

    def dual_value(self, z, result: SubproblemResult) -> float:
        """Dual objective assembled from the multipliers behind ``result``."""
        raise NotImplementedError

    def coupled(self, alpha) -> np.ndarray:
        """Map the reported dual vector to the multipliers of the coupled columns."""
        return np.asarray(alpha, dtype=float)

    def coordinate_conjugate(self, alpha) -> np.ndarray:
        """Per-z sum of Omega*(alpha) over the continuous columns tied to each z_i."""
        return conjugate(self.reg, self.coupled(alpha))

    def conjugate_supergradient(self, alpha, weights) -> np.ndarray:
        """Gradient in alpha of sum_i weights_i * coordinate_conjugate(alpha)_i."""
        w = np.asarray(weights, dtype=float)
        return self.coupled_adjoint(w * conjugate_grad(self.reg, self.coupled(alpha)))

    def h_project(self, alpha) -> np.ndarray:
        """Projection onto the set where h is finite (identity by default)."""
        return np.asarray(alpha, dtype=float)

    def alpha_bound(self) -> Optional[float]:
        """A priori bound on ||alpha*(z)||_2, if the family provides one."""
        return None

    # -- helpers --------------------------------------------------------
    def _check(self, z):
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n,):
            raise ValueError(f"expected z of length {self.n}, got shape {z.shape}")
        if np.any(z < -BINARY_TOL) or np.any(z > 1 + BINARY_TOL):
            raise ValueError("z must lie in [0, 1]")
        return z

    def _solve(self, z, binary: bool) -> SubproblemResult:  # pragma: no cover - abstract
        raise NotImplementedError

    def feasible_result(self, z, f_value, x, alpha, **info) -> SubproblemResult:
        coef = -self.coordinate_conjugate(alpha)
        return SubproblemResult(FEASIBLE, float(f_value), x, np.asarray(alpha, dtype=float), optimality_cut(z, f_value, coef), None, info)
