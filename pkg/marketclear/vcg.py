"""VCG personalized prices for matching markets.

Each buyer j matched to item i pays v_{-j} - v_{-j}^{-i}: the optimum of the
others without j, minus their optimum once j has also taken i. Every
sub-optimum is computed by a fresh solver run, independent of the
price-raising pipeline, so comparing the two is a genuine cross-check.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TypeVar

from .buyer_optimal import (
    buyer_optimal_prices,
    check_buyer_optimal,
    is_market_clearing,
    reduce_to_buyer_optimal,
)
from .const import REACH_MATCHED_FIRST
from .exceptions import EquivalenceError, InvariantViolation
from .market import MarketInstance, Matching, Money, equality_graph, profits_for_prices
from .solver import alternating_reach, solve_assignment

_LOGGER = logging.getLogger(__name__)

_T = TypeVar("_T")


@dataclass(frozen=True)
class VcgEntry:
    """VCG quantities for one matched (item, buyer) pair."""

    item: int
    buyer: int
    value: Money
    v_minus_j: Money
    v_minus_j_minus_i: Money
    personalized_price: Money
    buyer_utility: Money
    dummy_buyer: bool = False


@dataclass(frozen=True)
class VcgReport:
    """Maximum matching and the personalized price of every matched pair."""

    matching: Matching
    optimum: Money
    entries: tuple[VcgEntry, ...]

    @property
    def prices(self) -> tuple[Money, ...]:
        """Personalized price indexed by item."""
        by_item = {entry.item: entry.personalized_price for entry in self.entries}
        return tuple(by_item[i] for i in range(len(self.entries)))


@dataclass(frozen=True)
class EquivalenceReport:
    """Comparison of buyer-optimal prices with VCG prices.

    Truthy when the two vectors agree everywhere, on the alternative
    maximum matching too when one exists.
    """

    buyer_optimal_prices: tuple[Money, ...]
    vcg_prices: tuple[Money, ...]
    mismatched_items: tuple[int, ...]
    alternate_matching: Matching | None
    alternate_agrees: bool
    profit_identity_holds: bool
    vcg_prices_clear_market: bool
    optimum: Money

    @property
    def equivalent(self) -> bool:
        """True when every comparison agreed."""
        return (
            not self.mismatched_items
            and self.alternate_agrees
            and self.profit_identity_holds
            and self.vcg_prices_clear_market
        )

    def __bool__(self) -> bool:
        """Allow using the report in boolean context."""
        return self.equivalent


def _optimum(instance: MarketInstance) -> Money:
    matching, _ = solve_assignment(instance)
    return matching.value


def value_without_buyer(instance: MarketInstance, buyer: int) -> Money:
    """Optimum once ``buyer`` is replaced by a zero-valuation stand-in."""
    return _optimum(instance.without_buyer(buyer))


def value_without_pair(instance: MarketInstance, item: int, buyer: int) -> Money:
    """Optimum once ``buyer`` has left and taken ``item`` with them."""
    return _optimum(instance.without_pair(item, buyer))


def _run_all(tasks: Sequence[Callable[[], _T]], max_workers: int | None) -> list[_T]:
    """Run independent tasks, optionally on a thread pool, keeping task order."""
    if not max_workers or max_workers <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(lambda task: task(), tasks))


def vcg_prices(
    instance: MarketInstance,
    matching: Matching | None = None,
    *,
    max_workers: int | None = None,
) -> VcgReport:
    """Compute VCG personalized prices.

    Args:
        instance: Market instance
        matching: Maximum matching to price; solved for when omitted
        max_workers: Thread pool size for the 2n sub-solves (sequential if unset)

    Returns:
        VcgReport with one entry per matched pair

    Raises:
        InvariantViolation: if a VCG identity fails
    """
    if matching is None:
        matching, _ = solve_assignment(instance)
    optimum = _optimum(instance)
    if matching.value != optimum:
        raise InvariantViolation(f"matching value {matching.value} is not the optimum {optimum}")

    pairs = matching.pairs
    without_buyer = _run_all(
        [lambda j=buyer: value_without_buyer(instance, j) for _, buyer in pairs], max_workers
    )
    without_pair = _run_all(
        [lambda i=item, j=buyer: value_without_pair(instance, i, j) for item, buyer in pairs],
        max_workers,
    )

    entries = []
    for (item, buyer), v_minus_j, v_minus_ji in zip(
        pairs, without_buyer, without_pair, strict=True
    ):
        value = instance.value(item, buyer)
        price = v_minus_j - v_minus_ji
        entry = VcgEntry(
            item=item,
            buyer=buyer,
            value=value,
            v_minus_j=v_minus_j,
            v_minus_j_minus_i=v_minus_ji,
            personalized_price=price,
            buyer_utility=value - price,
            dummy_buyer=buyer in instance.dummy_buyers,
        )
        _check_entry(entry, optimum)
        entries.append(entry)

    _LOGGER.debug("VCG prices: %s", [entry.personalized_price for entry in entries])
    return VcgReport(matching=matching, optimum=optimum, entries=tuple(entries))


def _check_entry(entry: VcgEntry, optimum: Money) -> None:
    if entry.v_minus_j_minus_i != optimum - entry.value:
        raise InvariantViolation(
            f"pair ({entry.item}, {entry.buyer}): v_-j^-i = {entry.v_minus_j_minus_i}, "
            f"expected v* - v_ij = {optimum - entry.value}"
        )
    if not entry.v_minus_j_minus_i <= entry.v_minus_j <= optimum:
        raise InvariantViolation(
            f"pair ({entry.item}, {entry.buyer}): expected "
            f"{entry.v_minus_j_minus_i} <= {entry.v_minus_j} <= {optimum}"
        )
    if entry.personalized_price < 0 or entry.buyer_utility < 0:
        raise InvariantViolation(
            f"pair ({entry.item}, {entry.buyer}): price {entry.personalized_price}, "
            f"utility {entry.buyer_utility}"
        )
    if entry.dummy_buyer and entry.personalized_price != 0:
        raise InvariantViolation(f"dummy buyer {entry.buyer} charged {entry.personalized_price}")


def alternate_optimal_matching(instance: MarketInstance) -> Matching | None:
    """Find a maximum matching other than the solver's.

    Every maximum matching lies inside the equality graph of optimal duals, so
    another one exists exactly when that graph holds an alternating cycle
    through the solver's matching. The first cycle closed by a non-matching
    edge (ascending item, then buyer) is swapped.

    Returns:
        A different maximum matching, or None when the optimum is unique
    """
    primary, duals = solve_assignment(instance)
    graph = equality_graph(instance, duals)
    for item in range(instance.n):
        for buyer in graph.buyers_of_item(item):
            if buyer == primary.buyer_of(item):
                continue
            forest = alternating_reach(instance, primary, duals, buyer, REACH_MATCHED_FIRST)
            if item not in forest.reached_items:
                continue
            assignment = list(primary.assignment)
            assignment[item] = buyer
            # Odd positions of a matched-first path are its non-matching edges
            for path_item, path_buyer in forest.path_to(item)[1::2]:
                assignment[path_item] = path_buyer
            alternate = Matching.from_assignment(instance, assignment)
            if alternate.value != primary.value:
                raise InvariantViolation(
                    f"alternating cycle changed the matching value to {alternate.value}"
                )
            _LOGGER.debug("Alternate matching via edge (%d, %d)", item, buyer)
            return alternate
    return None


def check_equivalence(instance: MarketInstance, *, strict: bool = True) -> EquivalenceReport:
    """Compare buyer-optimal prices with VCG prices.

    Also repeats the comparison on a differently tie-broken maximum matching,
    checks v_{-j} = v* - q_j for the buyer-optimal profits, and checks that the
    VCG prices are themselves market clearing.

    Args:
        instance: Market instance
        strict: Raise EquivalenceError on any disagreement

    Returns:
        EquivalenceReport
    """
    matching, duals = buyer_optimal_prices(instance)
    report = vcg_prices(instance, matching)
    optimal = duals.prices
    vcg = report.prices
    mismatched = tuple(i for i in range(instance.n) if optimal[i] != vcg[i])

    identity = all(
        entry.v_minus_j == report.optimum - duals.profits[entry.buyer] for entry in report.entries
    )
    clears = is_market_clearing(instance, profits_for_prices(instance, vcg))

    alternate = alternate_optimal_matching(instance)
    alternate_agrees = True
    if alternate is not None:
        alt_duals = reduce_to_buyer_optimal(instance, alternate, duals)
        alt_vcg = vcg_prices(instance, alternate).prices
        alternate_agrees = alt_duals.prices == optimal and alt_vcg == optimal
        if not check_buyer_optimal(instance, alternate, alt_duals):
            alternate_agrees = False

    result = EquivalenceReport(
        buyer_optimal_prices=optimal,
        vcg_prices=vcg,
        mismatched_items=mismatched,
        alternate_matching=alternate,
        alternate_agrees=alternate_agrees,
        profit_identity_holds=identity,
        vcg_prices_clear_market=clears,
        optimum=report.optimum,
    )
    if not result:
        _LOGGER.warning(
            "Equivalence failed: buyer-optimal %s, VCG %s, alternate agrees %s",
            optimal,
            vcg,
            alternate_agrees,
        )
        if strict:
            raise EquivalenceError(result)
    else:
        _LOGGER.info("Buyer-optimal and VCG prices agree: %s", list(optimal))
    return result
