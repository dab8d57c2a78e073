"""Buyer-optimal market-clearing prices for unit-demand matching markets.

Solves the assignment problem by price raising, lowers the resulting prices
to the buyer-optimal point of the price lattice, and cross-checks them
against VCG personalized prices and a brute-force oracle.
"""

from .buyer_optimal import (
    CertifiedPath,
    OptimalityCertificate,
    OptimalityViolation,
    buyer_optimal_prices,
    check_buyer_optimal,
    is_market_clearing,
    lattice_meet,
    normalize_prices,
    reduce_to_buyer_optimal,
)
from .instance_io import PriceDocument, load_instance, load_prices, serialize_instance
from .market import (
    DualSolution,
    EqualityGraph,
    MarketInstance,
    Matching,
    demand_set,
    equality_graph,
    pad_to_square,
    profits_for_prices,
    slack_matrix,
)
from .solver import (
    AlternatingForest,
    alternating_reach,
    find_clearing_matching,
    price_raise_step,
    solve_assignment,
)
from .vcg import (
    EquivalenceReport,
    VcgEntry,
    VcgReport,
    alternate_optimal_matching,
    check_equivalence,
    vcg_prices,
)

__all__ = [
    "AlternatingForest",
    "CertifiedPath",
    "DualSolution",
    "EqualityGraph",
    "EquivalenceReport",
    "MarketInstance",
    "Matching",
    "OptimalityCertificate",
    "OptimalityViolation",
    "PriceDocument",
    "VcgEntry",
    "VcgReport",
    "alternate_optimal_matching",
    "alternating_reach",
    "buyer_optimal_prices",
    "check_buyer_optimal",
    "check_equivalence",
    "demand_set",
    "equality_graph",
    "find_clearing_matching",
    "is_market_clearing",
    "lattice_meet",
    "load_instance",
    "load_prices",
    "normalize_prices",
    "pad_to_square",
    "price_raise_step",
    "profits_for_prices",
    "reduce_to_buyer_optimal",
    "serialize_instance",
    "slack_matrix",
    "solve_assignment",
    "vcg_prices",
]
