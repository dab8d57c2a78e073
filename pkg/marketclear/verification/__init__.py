"""Oracles, verdicts and audits for matching markets."""

from .audit import AuditReport, Deviation, Outcome, audit_incentive, bidder_outcome
from .clearing import (
    ClearingFailure,
    ClearingVerdict,
    verify_market_clearing,
    verify_prices,
)
from .oracle import brute_force_optimum
from .sampling import random_clearing_duals, random_instance
from .strategies import (
    STRATEGY_CLASSES,
    AllMisreports,
    GridMisreports,
    MisreportStrategy,
    RandomMisreports,
    StructuredMisreports,
    get_strategy,
)

__all__ = [
    "STRATEGY_CLASSES",
    "AllMisreports",
    "AuditReport",
    "ClearingFailure",
    "ClearingVerdict",
    "Deviation",
    "GridMisreports",
    "MisreportStrategy",
    "Outcome",
    "RandomMisreports",
    "StructuredMisreports",
    "audit_incentive",
    "bidder_outcome",
    "brute_force_optimum",
    "get_strategy",
    "random_clearing_duals",
    "random_instance",
    "verify_market_clearing",
    "verify_prices",
]
