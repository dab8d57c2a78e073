"""Incentive audit of buyer-optimal prices.

For every misreported column the whole pipeline reruns on the reported
market; the bidder's utility is then measured with the true valuations.
Truthful reporting is a dominant strategy, so no deviation may gain.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..buyer_optimal import buyer_optimal_prices
from ..const import DEFAULT_SEED, DEFAULT_TRIALS, STRATEGY_ALL
from ..exceptions import IncentiveViolationError
from ..market import MarketInstance, Money
from .strategies import Misreport, MisreportStrategy, get_strategy

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Outcome:
    """Item a bidder receives, its price, and the bidder's true utility."""

    item: int
    price: Money
    utility: Money


@dataclass(frozen=True)
class Deviation:
    """Result of one misreport."""

    misreport: Misreport
    item: int
    price: Money
    utility: Money
    utility_delta: Money


@dataclass(frozen=True)
class AuditReport:
    """All deviations tried for one bidder.

    Truthy when no deviation raised the bidder's utility.
    """

    bidder: int
    truthful_outcome: Outcome
    deviations: tuple[Deviation, ...]
    max_utility_delta: Money

    @property
    def violations(self) -> tuple[Deviation, ...]:
        """Deviations with a positive utility gain."""
        return tuple(d for d in self.deviations if d.utility_delta > 0)

    def __bool__(self) -> bool:
        """Allow using the report in boolean context."""
        return self.max_utility_delta <= 0


def bidder_outcome(true_instance: MarketInstance, reported: MarketInstance, bidder: int) -> Outcome:
    """Run the pipeline on ``reported`` and score the bidder with true valuations.

    A bidder left with a dummy item gets utility 0 - 0.
    """
    matching, duals = buyer_optimal_prices(reported)
    item = matching.item_of(bidder)
    price = duals.prices[item]
    return Outcome(item=item, price=price, utility=true_instance.value(item, bidder) - price)


def audit_incentive(
    instance: MarketInstance,
    bidder: int,
    strategy: str | MisreportStrategy = STRATEGY_ALL,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    *,
    max_workers: int | None = None,
    strict: bool = True,
) -> AuditReport:
    """Try misreports for ``bidder`` and compare utilities with the truthful one.

    Args:
        instance: Market with the true valuations
        bidder: Buyer index; must be a real buyer
        strategy: Strategy name or instance generating misreports
        trials: Random draws per randomised strategy, at least 1
        seed: Seed for the audit's random generator
        max_workers: Thread pool size for the reruns (sequential if unset)
        strict: Raise IncentiveViolationError when a deviation gains

    Returns:
        AuditReport with deviations in generation order
    """
    if not 0 <= bidder < instance.n:
        raise ValueError(f"bidder {bidder} out of range for n = {instance.n}")
    if bidder in instance.dummy_buyers:
        raise ValueError(f"bidder {bidder} is a dummy buyer")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    generator = get_strategy(strategy) if isinstance(strategy, str) else strategy

    rng = np.random.default_rng(seed)
    misreports = list(generator.generate(instance, bidder, trials, rng))
    truthful = bidder_outcome(instance, instance, bidder)

    def _deviate(misreport: Misreport) -> Deviation:
        outcome = bidder_outcome(instance, instance.with_buyer_column(bidder, misreport), bidder)
        return Deviation(
            misreport=misreport,
            item=outcome.item,
            price=outcome.price,
            utility=outcome.utility,
            utility_delta=outcome.utility - truthful.utility,
        )

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            deviations = tuple(executor.map(_deviate, misreports))
    else:
        deviations = tuple(_deviate(m) for m in misreports)

    max_delta = max((d.utility_delta for d in deviations), default=0)
    report = AuditReport(
        bidder=bidder,
        truthful_outcome=truthful,
        deviations=deviations,
        max_utility_delta=max_delta,
    )
    if not report:
        _LOGGER.warning(
            "Bidder %d gains %d by misreporting (%d violations)",
            bidder,
            max_delta,
            len(report.violations),
        )
        if strict:
            raise IncentiveViolationError(report)
    else:
        _LOGGER.info(
            "Audited bidder %d: %d deviations, max utility delta %d",
            bidder,
            len(deviations),
            max_delta,
        )
    return report
