from .base import (
    CERTIFICATE,
    EXCLUSION,
    FEASIBILITY,
    FEASIBLE,
    INFEASIBLE,
    MONOTONE,
    OPTIMALITY,
    Cut,
    InstanceError,
    Oracle,
    SubproblemResult,
    Unsupported,
    exclusion_cut,
    monotone_cut,
)
from .bqp import BQPInstance, BQPOracle
from .erm import ERMInstance, ERMOracle
from .facility import FacilityInstance, FacilityOracle
from .netdesign import NetDesignInstance, NetDesignOracle
from .portfolio import PortfolioInstance, PortfolioOracle
from .unitcommit import UCInstance, UCOracle, water_fill

FAMILIES = {
    "erm": (ERMInstance, ERMOracle),
    "portfolio": (PortfolioInstance, PortfolioOracle),
    "facility": (FacilityInstance, FacilityOracle),
    "netdesign": (NetDesignInstance, NetDesignOracle),
    "uc": (UCInstance, UCOracle),
    "bqp": (BQPInstance, BQPOracle),
}

# families whose coupling goes through a regularizer (as opposed to the
# linear coupling of the binary quadratic family)
REGULARIZED_FAMILIES = ("erm", "portfolio", "facility", "netdesign", "uc")


def make_oracle(family: str, instance, reg=None, c=None) -> Oracle:
    try:
        _, cls = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}") from None
    if reg is None:
        reg = cls.natural_regularizer(instance)
    return cls(instance, reg, c)
