"""Market-clearing verdicts for a matching and dual solution."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..exceptions import DimensionMismatchError
from ..market import DualSolution, MarketInstance, Matching, profits_for_prices, slack_matrix
from ..solver import solve_assignment

_LOGGER = logging.getLogger(__name__)

CheckName = Literal["feasibility", "permutation", "complementarity", "duality", "nonnegativity"]
CHECKS: tuple[CheckName, ...] = (
    "feasibility",
    "permutation",
    "complementarity",
    "duality",
    "nonnegativity",
)


@dataclass(frozen=True)
class ClearingFailure:
    """One failed check, with the pair or item it concerns when there is one."""

    check: CheckName
    message: str
    item: int | None = None
    buyer: int | None = None


@dataclass(frozen=True)
class ClearingVerdict:
    """Result of verifying a matching and duals against an instance."""

    matching: Matching
    duals: DualSolution
    failures: tuple[ClearingFailure, ...] = ()

    @property
    def market_clearing(self) -> bool:
        """True when all five checks hold."""
        return not self.failures

    @property
    def failed_checks(self) -> tuple[CheckName, ...]:
        """Names of the failed checks, in check order."""
        failed = {failure.check for failure in self.failures}
        return tuple(check for check in CHECKS if check in failed)

    def __bool__(self) -> bool:
        """Allow using the verdict in boolean context."""
        return self.market_clearing


def verify_market_clearing(
    instance: MarketInstance, matching: Matching, duals: DualSolution
) -> ClearingVerdict:
    """Check feasibility, perfectness, complementarity, strong duality and p >= 0.

    Every violation is reported separately; failures are part of the verdict,
    not exceptions.

    Args:
        instance: Market instance
        matching: Candidate assignment
        duals: Candidate prices and profits

    Returns:
        ClearingVerdict
    """
    n = instance.n
    if len(matching.assignment) != n:
        raise DimensionMismatchError(f"matching covers {len(matching.assignment)} of {n} items")
    failures: list[ClearingFailure] = []

    slack = slack_matrix(instance, duals)
    for item, buyer in np.argwhere(slack < 0):
        i, j = int(item), int(buyer)
        failures.append(
            ClearingFailure(
                "feasibility",
                f"p[{i}] + q[{j}] = {duals.prices[i] + duals.profits[j]} "
                f"< v[{i}][{j}] = {instance.value(i, j)}",
                item=i,
                buyer=j,
            )
        )

    if not matching.is_perfect:
        failures.append(ClearingFailure("permutation", "matching is not a permutation"))

    for item, buyer in matching.pairs:
        if int(slack[item, buyer]) != 0:
            failures.append(
                ClearingFailure(
                    "complementarity",
                    f"matched pair ({item}, {buyer}) has slack {int(slack[item, buyer])}",
                    item=item,
                    buyer=buyer,
                )
            )

    value = sum(instance.value(item, buyer) for item, buyer in matching.pairs)
    if duals.total != value:
        failures.append(
            ClearingFailure("duality", f"sum(p) + sum(q) = {duals.total} != v(M) = {value}")
        )

    for item, price in enumerate(duals.prices):
        if price < 0:
            failures.append(
                ClearingFailure("nonnegativity", f"p[{item}] = {price} < 0", item=item)
            )

    verdict = ClearingVerdict(matching=matching, duals=duals, failures=tuple(failures))
    if not verdict:
        _LOGGER.warning("Not market clearing: failed %s", ", ".join(verdict.failed_checks))
    return verdict


def verify_prices(
    instance: MarketInstance,
    prices: DualSolution | Sequence[int],
    matching: Matching | None = None,
) -> ClearingVerdict:
    """Verify user-supplied prices.

    Bare price vectors are completed with best-response profits; without a
    matching, a solver-optimal one is used, since any maximum matching is
    complementary with any optimal duals.
    """
    duals = prices if isinstance(prices, DualSolution) else profits_for_prices(instance, prices)
    if matching is None:
        matching, _ = solve_assignment(instance)
    return verify_market_clearing(instance, matching, duals)
