"""Instance formats, generators and reports."""

from .biqmac import DuplicateEntryWarning, parse_biqmac, serialize_biqmac
from .errors import InstanceFormatError, ParseError, ValidationError
from .generators import (
    ERMSpec,
    NetDesignSpec,
    generate_erm,
    generate_netdesign,
    random_bqp,
    random_erm,
    random_facility,
    random_netdesign,
    random_portfolio,
    random_uc,
    support_accuracy,
)
from .instances import InstanceFile, instance_from_dict, loads, parse_instance
from .orlib import parse_orlib_cap, serialize_orlib_cap

__all__ = [
    "DuplicateEntryWarning",
    "ERMSpec",
    "InstanceFile",
    "InstanceFormatError",
    "NetDesignSpec",
    "ParseError",
    "ValidationError",
    "generate_erm",
    "generate_netdesign",
    "instance_from_dict",
    "loads",
    "parse_biqmac",
    "parse_instance",
    "parse_orlib_cap",
    "random_bqp",
    "random_erm",
    "random_facility",
    "random_netdesign",
    "random_portfolio",
    "random_uc",
    "serialize_biqmac",
    "serialize_orlib_cap",
    "support_accuracy",
]
