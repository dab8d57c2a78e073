"""Exceptions raised by marketclear."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .verification.audit import AuditReport
    from .vcg import EquivalenceReport


class MarketError(Exception):
    """Base class for every marketclear error."""


class InvalidInstanceError(MarketError, ValueError):
    """A market instance or instance document is malformed."""


class InstanceFormatError(InvalidInstanceError):
    """The instance document does not parse or does not match its schema."""


class NegativeValuationError(InvalidInstanceError):
    """A valuation entry is negative."""

    def __init__(self, item: int, buyer: int, value: object) -> None:
        """Initialize the error.

        Args:
            item: Row of the offending entry
            buyer: Column of the offending entry
            value: The negative value as read
        """
        super().__init__(f"negative valuation {value} at item {item}, buyer {buyer}")
        self.item = item
        self.buyer = buyer


class DuplicateLabelError(InvalidInstanceError):
    """An item or buyer label appears twice."""


class DimensionMismatchError(InvalidInstanceError):
    """Labels and valuation matrix disagree on dimensions."""


class InfeasibleDualsError(MarketError, ValueError):
    """Some pair violates p_i + q_j >= v_ij."""

    def __init__(self, item: int, buyer: int, slack: int) -> None:
        """Initialize the error.

        Args:
            item: Item index of the violated pair
            buyer: Buyer index of the violated pair
            slack: p_i + q_j - v_ij, negative
        """
        super().__init__(
            f"infeasible duals: pair (item {item}, buyer {buyer}) has slack {slack}"
        )
        self.item = item
        self.buyer = buyer
        self.slack = slack


class NotMarketClearingError(MarketError, ValueError):
    """Duals are not market clearing for the given matching."""


class ReachModeError(MarketError, ValueError):
    """Alternating reach started from a buyer with the wrong matched status."""


class OracleLimitError(MarketError, ValueError):
    """Instance is too large for the brute-force oracle."""


class InvariantViolation(MarketError, RuntimeError):
    """An algorithm invariant that must always hold was found broken."""


class EquivalenceError(MarketError):
    """Buyer-optimal prices and VCG prices disagree."""

    def __init__(self, report: EquivalenceReport) -> None:
        """Initialize the error.

        Args:
            report: Full equivalence report with both price vectors
        """
        super().__init__(
            "buyer-optimal prices "
            f"{list(report.buyer_optimal_prices)} differ from VCG prices "
            f"{list(report.vcg_prices)} at items {list(report.mismatched_items)}"
        )
        self.report = report


class IncentiveViolationError(MarketError):
    """A misreport raised the bidder's utility."""

    def __init__(self, report: AuditReport) -> None:
        """Initialize the error.

        Args:
            report: Audit report holding the profitable deviations
        """
        super().__init__(
            f"bidder {report.bidder} gains {report.max_utility_delta} by misreporting"
        )
        self.report = report
