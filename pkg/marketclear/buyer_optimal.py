"""Buyer-optimal market-clearing prices.

Market-clearing prices form a lattice; its bottom (the buyer-optimal
vector) minimises total price. A market-clearing vector is buyer optimal
exactly when every buyer is joined, by an alternating path of equality edges
that starts and ends with a matching edge, to an item priced at zero. The
reduction below lowers prices on a violating buyer's reach set until that
holds.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .const import INIT_ITEMS, REACH_MATCHED_FIRST
from .exceptions import InvariantViolation, NotMarketClearingError
from .market import (
    DualSolution,
    Edge,
    MarketInstance,
    Matching,
    first_infeasible_pair,
    slack_matrix,
)
from .solver import alternating_reach, find_clearing_matching, solve_assignment

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class CertifiedPath:
    """Alternating path from a buyer to a zero-priced item."""

    buyer: int
    edges: tuple[Edge, ...]

    @property
    def zero_item(self) -> int:
        """The zero-priced item the path ends at."""
        return self.edges[-1][0]

    @property
    def nodes(self) -> tuple[tuple[str, int], ...]:
        """Nodes after the buyer itself: item, buyer, item, ... ending at ``zero_item``."""
        nodes: list[tuple[str, int]] = []
        for position, (item, buyer) in enumerate(self.edges):
            # Matching edges (even positions) lead to an item, the others to a buyer
            nodes.append(("item", item) if position % 2 == 0 else ("buyer", buyer))
        return tuple(nodes)


@dataclass(frozen=True)
class OptimalityViolation:
    """A buyer whose reach set carries only positive prices."""

    buyer: int
    reach: tuple[int, ...]
    min_price: int


@dataclass(frozen=True)
class OptimalityCertificate:
    """Outcome of the buyer-optimality check.

    Truthy when every buyer has a certified path; otherwise ``violation``
    names the first violating buyer.
    """

    paths: Mapping[int, CertifiedPath] = field(default_factory=dict, compare=False)
    violation: OptimalityViolation | None = None

    def __bool__(self) -> bool:
        """Allow using the certificate in boolean context."""
        return self.violation is None


def normalize_prices(duals: DualSolution) -> DualSolution:
    """Shift prices down uniformly until the cheapest item costs 0.

    Profits rise by the same amount, so the dual total and the equality
    graph are unchanged.
    """
    shift = duals.min_price
    if shift == 0:
        return duals
    return duals.shifted(shift)


def _require_clearing(instance: MarketInstance, matching: Matching, duals: DualSolution) -> None:
    """Raise NotMarketClearingError unless duals are feasible and complementary."""
    if len(matching.assignment) != instance.n or not matching.is_perfect:
        raise NotMarketClearingError("matching is not a perfect matching")
    violation = first_infeasible_pair(instance, duals)
    if violation is not None:
        item, buyer, slack = violation
        raise NotMarketClearingError(
            f"duals infeasible at pair (item {item}, buyer {buyer}), slack {slack}"
        )
    for item, buyer in matching.pairs:
        if duals.prices[item] + duals.profits[buyer] != instance.value(item, buyer):
            raise NotMarketClearingError(
                f"matched pair (item {item}, buyer {buyer}) is not an equality edge"
            )


def _certify_buyer(
    instance: MarketInstance, matching: Matching, duals: DualSolution, buyer: int
) -> CertifiedPath | OptimalityViolation:
    forest = alternating_reach(instance, matching, duals, buyer, REACH_MATCHED_FIRST)
    for item in forest.reached_items:
        if duals.prices[item] == 0:
            return CertifiedPath(buyer=buyer, edges=forest.path_to(item))
    return OptimalityViolation(
        buyer=buyer,
        reach=forest.reached_items,
        min_price=min(duals.prices[i] for i in forest.reached_items),
    )


def check_buyer_optimal(
    instance: MarketInstance, matching: Matching, duals: DualSolution
) -> OptimalityCertificate:
    """Check every buyer for an alternating path to a zero-priced item.

    Args:
        instance: Market instance
        matching: Perfect matching inside the equality graph
        duals: Market-clearing duals with p >= 0

    Returns:
        Certificate with one path per buyer, or the first violating buyer

    Raises:
        NotMarketClearingError: if the inputs are not market clearing or p < 0
    """
    _require_clearing(instance, matching, duals)
    if duals.min_price < 0:
        raise NotMarketClearingError(f"negative price {duals.min_price}")

    paths: dict[int, CertifiedPath] = {}
    for buyer in range(instance.n):
        outcome = _certify_buyer(instance, matching, duals, buyer)
        if isinstance(outcome, OptimalityViolation):
            return OptimalityCertificate(violation=outcome)
        paths[buyer] = outcome
    return OptimalityCertificate(paths=paths)


def reduce_to_buyer_optimal(
    instance: MarketInstance,
    matching: Matching,
    duals: DualSolution,
    *,
    check_invariants: bool = False,
) -> DualSolution:
    """Lower market-clearing duals to the buyer-optimal ones.

    Buyers are processed in ascending order. For a violating buyer with
    reach set R and partners M_R, p drops on R and q rises on M_R by the
    smaller of the cheapest price on R and the smallest slack from R to the
    buyers outside M_R.

    Args:
        instance: Market instance
        matching: Perfect matching the duals are complementary with
        duals: Market-clearing duals
        check_invariants: Re-check certified buyers stay certified after each step

    Returns:
        Buyer-optimal duals, complementary with the same matching
    """
    _require_clearing(instance, matching, duals)
    n = instance.n
    current = normalize_prices(duals)
    total = current.total
    certified: list[int] = []

    for buyer in range(n):
        steps = 0
        while True:
            forest = alternating_reach(instance, matching, current, buyer, REACH_MATCHED_FIRST)
            reach = forest.reached_items
            cheapest = min(current.prices[i] for i in reach)
            if cheapest == 0:
                break
            partners = set(forest.reached_buyers)
            others = [j for j in range(n) if j not in partners]
            delta = cheapest
            if others:
                slack = slack_matrix(instance, current)[np.ix_(list(reach), others)]
                delta = min(delta, int(slack.min()))
            in_reach = set(reach)
            current = DualSolution(
                prices=tuple(
                    p - delta if i in in_reach else p for i, p in enumerate(current.prices)
                ),
                profits=tuple(
                    q + delta if j in partners else q for j, q in enumerate(current.profits)
                ),
            )
            steps += 1
            _LOGGER.debug("Buyer %d: lowered prices on %s by %d", buyer, reach, delta)
            if steps > n:
                raise InvariantViolation(f"buyer {buyer} needed more than {n} reduction steps")
            if current.total != total:
                raise InvariantViolation("reduction changed the dual total")
            if check_invariants:
                _require_clearing(instance, matching, current)
                for earlier in certified:
                    outcome = _certify_buyer(instance, matching, current, earlier)
                    if isinstance(outcome, OptimalityViolation):
                        raise InvariantViolation(f"buyer {earlier} lost its zero-price path")
        certified.append(buyer)

    return current


def buyer_optimal_prices(
    instance: MarketInstance,
    *,
    init: str = INIT_ITEMS,
    check_invariants: bool = False,
) -> tuple[Matching, DualSolution]:
    """Solve the market and reduce its duals to buyer-optimal prices.

    Returns:
        (maximum matching, buyer-optimal duals)
    """
    matching, duals = solve_assignment(instance, init=init, check_invariants=check_invariants)
    reduced = reduce_to_buyer_optimal(
        instance, matching, duals, check_invariants=check_invariants
    )
    for item in instance.dummy_items:
        if reduced.prices[item] != 0:
            raise InvariantViolation(f"dummy item {item} priced at {reduced.prices[item]}")
    if check_invariants and not check_buyer_optimal(instance, matching, reduced):
        raise InvariantViolation("reduced prices fail the buyer-optimality certificate")
    return matching, reduced


def is_market_clearing(instance: MarketInstance, duals: DualSolution) -> bool:
    """True if duals are feasible, p >= 0, and the equality graph has a perfect matching."""
    if duals.min_price < 0 or first_infeasible_pair(instance, duals) is not None:
        return False
    return find_clearing_matching(instance, duals) is not None


def lattice_meet(
    instance: MarketInstance, first: DualSolution, second: DualSolution
) -> DualSolution:
    """Componentwise minimum of two market-clearing price vectors.

    Profits take the componentwise maximum. The result is checked against a
    freshly computed maximum matching.

    Args:
        instance: Market instance
        first: Market-clearing duals
        second: Market-clearing duals

    Returns:
        Market-clearing duals with p = min(p', p'') and q = max(q', q'')

    Raises:
        NotMarketClearingError: if either input is not market clearing
    """
    for name, duals in (("first", first), ("second", second)):
        if not is_market_clearing(instance, duals):
            raise NotMarketClearingError(f"{name} price vector is not market clearing")

    meet = DualSolution(
        prices=tuple(min(a, b) for a, b in zip(first.prices, second.prices, strict=True)),
        profits=tuple(max(a, b) for a, b in zip(first.profits, second.profits, strict=True)),
    )
    matching, _ = solve_assignment(instance)
    try:
        _require_clearing(instance, matching, meet)
    except NotMarketClearingError as err:
        raise InvariantViolation(f"lattice meet is not market clearing: {err}") from err
    return meet
