"""Exact-arithmetic maximin-share fair division toolkit.

Computes MMS values and gaps by exhaustive search over exact rationals,
generates and verifies the structured negative-example families for goods
and chores, and runs an exact LP/MIP search for the maximal-gap instances
on nine items.
"""

from .model import (
    Allocation,
    Bundle,
    CapacityError,
    CertificateError,
    CHORES,
    ExactNumber,
    GOODS,
    Instance,
    MMSCertificate,
    ParseError,
    bundle_value,
    emit_instance,
    parse_instance,
)
from .mms import (
    GapReport,
    NegativeCheck,
    enumerate_allocations,
    gap,
    mms,
    mms_values,
    verify_negative,
)

__all__ = [
    "Allocation", "Bundle", "CapacityError", "CertificateError", "CHORES",
    "ExactNumber", "GOODS", "Instance", "MMSCertificate", "ParseError",
    "bundle_value", "emit_instance", "parse_instance",
    "GapReport", "NegativeCheck", "enumerate_allocations", "gap", "mms",
    "mms_values", "verify_negative",
]
