"""Core types for two-sided matching markets.

Amounts are exact integers in minor units (``scale`` minor units per major
unit). Matrices are always oriented ``valuations[item][buyer]``.
"""

from __future__ import annotations

import logging
import operator
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from .const import (
    DEFAULT_SCALE,
    DUMMY_BUYER_PREFIX,
    DUMMY_ITEM_PREFIX,
    MAX_DUAL_UNITS,
    MAX_MINOR_UNITS,
)
from .exceptions import (
    DimensionMismatchError,
    DuplicateLabelError,
    InfeasibleDualsError,
    InstanceFormatError,
    InvalidInstanceError,
    NegativeValuationError,
)

_LOGGER = logging.getLogger(__name__)

# Minor units of currency
Money = int
Edge = tuple[int, int]  # (item, buyer)


def _as_money(value: object) -> Money:
    """Coerce an integral value (int or numpy integer) to a Python int."""
    if isinstance(value, bool):
        raise InstanceFormatError(f"expected an integer amount, got {value!r}")
    try:
        return operator.index(value)  # type: ignore[arg-type]
    except TypeError as err:
        raise InstanceFormatError(f"expected an integer amount, got {value!r}") from err


def _check_unique(labels: Sequence[str], kind: str) -> None:
    seen: set[str] = set()
    for label in labels:
        if label in seen:
            raise DuplicateLabelError(f"duplicate {kind} label {label!r}")
        seen.add(label)


@dataclass(frozen=True)
class MarketInstance:
    """Square market of n items and n unit-demand buyers.

    Dummy items are zero rows and dummy buyers are zero columns added by
    padding; they keep synthetic labels.
    """

    item_labels: tuple[str, ...]
    buyer_labels: tuple[str, ...]
    valuations: tuple[tuple[Money, ...], ...]
    dummy_items: frozenset[int] = frozenset()
    dummy_buyers: frozenset[int] = frozenset()
    scale: int = DEFAULT_SCALE

    def __post_init__(self) -> None:
        """Normalise containers and validate the instance invariants."""
        object.__setattr__(self, "item_labels", tuple(self.item_labels))
        object.__setattr__(self, "buyer_labels", tuple(self.buyer_labels))
        object.__setattr__(
            self,
            "valuations",
            tuple(tuple(_as_money(v) for v in row) for row in self.valuations),
        )
        object.__setattr__(self, "dummy_items", frozenset(self.dummy_items))
        object.__setattr__(self, "dummy_buyers", frozenset(self.dummy_buyers))

        n = len(self.item_labels)
        if n < 1:
            raise DimensionMismatchError("a market needs at least one item and one buyer")
        if len(self.buyer_labels) != n:
            raise DimensionMismatchError(
                f"market is not square: {n} items, {len(self.buyer_labels)} buyers"
            )
        if len(self.valuations) != n or any(len(row) != n for row in self.valuations):
            raise DimensionMismatchError(f"valuation matrix must be {n}x{n}")
        _check_unique(self.item_labels, "item")
        _check_unique(self.buyer_labels, "buyer")
        if self.scale < 1:
            raise InvalidInstanceError(f"scale must be positive, got {self.scale}")

        for i, row in enumerate(self.valuations):
            for j, value in enumerate(row):
                if value < 0:
                    raise NegativeValuationError(i, j, value)
                if value > MAX_MINOR_UNITS:
                    raise InvalidInstanceError(
                        f"valuation {value} at item {i}, buyer {j} exceeds {MAX_MINOR_UNITS}"
                    )

        if any(not 0 <= i < n for i in self.dummy_items | self.dummy_buyers):
            raise DimensionMismatchError("dummy index out of range")
        for i in self.dummy_items:
            if any(self.valuations[i]):
                raise InvalidInstanceError(f"dummy item {i} has a non-zero valuation")
        for j in self.dummy_buyers:
            if any(row[j] for row in self.valuations):
                raise InvalidInstanceError(f"dummy buyer {j} has a non-zero valuation")

    @property
    def n(self) -> int:
        """Side size after padding."""
        return len(self.item_labels)

    @property
    def real_items(self) -> tuple[int, ...]:
        """Indices of items that are not padding."""
        return tuple(i for i in range(self.n) if i not in self.dummy_items)

    @property
    def real_buyers(self) -> tuple[int, ...]:
        """Indices of buyers that are not padding."""
        return tuple(j for j in range(self.n) if j not in self.dummy_buyers)

    @property
    def max_valuation(self) -> Money:
        """Largest entry of the valuation matrix."""
        return max(max(row) for row in self.valuations)

    def value(self, item: int, buyer: int) -> Money:
        """Valuation of ``item`` to ``buyer``."""
        return self.valuations[item][buyer]

    def column(self, buyer: int) -> tuple[Money, ...]:
        """Valuations of every item for ``buyer``."""
        return tuple(row[buyer] for row in self.valuations)

    def as_array(self) -> np.ndarray:
        """Valuation matrix as an int64 array (exact under the magnitude guard)."""
        return np.array(self.valuations, dtype=np.int64).reshape(self.n, self.n)

    def with_buyer_column(self, buyer: int, column: Sequence[int]) -> MarketInstance:
        """Copy of the market with ``buyer``'s valuations replaced.

        Args:
            buyer: Buyer whose column is replaced
            column: New valuations, one per item

        Returns:
            New instance; labels and padding metadata unchanged
        """
        if len(column) != self.n:
            raise DimensionMismatchError(f"column must have {self.n} entries")
        rows = [list(row) for row in self.valuations]
        for i, value in enumerate(column):
            rows[i][buyer] = value
        return replace(self, valuations=tuple(tuple(row) for row in rows))

    def without_buyer(self, buyer: int) -> MarketInstance:
        """Replace ``buyer`` by a zero-valuation stand-in."""
        return self.with_buyer_column(buyer, [0] * self.n)

    def without_pair(self, item: int, buyer: int) -> MarketInstance:
        """Zero both ``item``'s row and ``buyer``'s column."""
        rows = [list(row) for row in self.valuations]
        rows[item] = [0] * self.n
        for row in rows:
            row[buyer] = 0
        return replace(self, valuations=tuple(tuple(row) for row in rows))

    def permuted(self, item_order: Sequence[int], buyer_order: Sequence[int]) -> MarketInstance:
        """Reorder items and buyers.

        Position k of the new market holds old item ``item_order[k]`` (and old
        buyer ``buyer_order[k]``).
        """
        item_pos = {old: new for new, old in enumerate(item_order)}
        buyer_pos = {old: new for new, old in enumerate(buyer_order)}
        return MarketInstance(
            item_labels=tuple(self.item_labels[i] for i in item_order),
            buyer_labels=tuple(self.buyer_labels[j] for j in buyer_order),
            valuations=tuple(
                tuple(self.valuations[i][j] for j in buyer_order) for i in item_order
            ),
            dummy_items=frozenset(item_pos[i] for i in self.dummy_items),
            dummy_buyers=frozenset(buyer_pos[j] for j in self.dummy_buyers),
            scale=self.scale,
        )


@dataclass(frozen=True)
class Matching:
    """Assignment of items to buyers, ``assignment[item] == buyer``."""

    assignment: tuple[int, ...]
    value: Money

    @classmethod
    def from_assignment(cls, instance: MarketInstance, assignment: Sequence[int]) -> Matching:
        """Build a matching and compute its valuation.

        Args:
            instance: Market the assignment refers to
            assignment: Buyer index per item

        Returns:
            Matching with ``value`` summed over its pairs
        """
        pairs = tuple(int(j) for j in assignment)
        if len(pairs) != instance.n or any(not 0 <= j < instance.n for j in pairs):
            raise DimensionMismatchError(
                f"assignment must map {instance.n} items to buyers in range"
            )
        value = sum(instance.value(i, j) for i, j in enumerate(pairs))
        return cls(assignment=pairs, value=value)

    @property
    def is_perfect(self) -> bool:
        """True if the assignment is a permutation."""
        return sorted(self.assignment) == list(range(len(self.assignment)))

    @property
    def pairs(self) -> tuple[Edge, ...]:
        """Matched (item, buyer) pairs in item order."""
        return tuple(enumerate(self.assignment))

    def buyer_of(self, item: int) -> int:
        """Buyer matched to ``item``."""
        return self.assignment[item]

    def item_of(self, buyer: int) -> int:
        """Item matched to ``buyer`` (first one if the assignment is not perfect)."""
        return self.assignment.index(buyer)


@dataclass(frozen=True)
class DualSolution:
    """Prices p (per item) and profits q (per buyer)."""

    prices: tuple[Money, ...]
    profits: tuple[Money, ...]

    def __post_init__(self) -> None:
        """Normalise to tuples of Python ints."""
        object.__setattr__(self, "prices", tuple(_as_money(p) for p in self.prices))
        object.__setattr__(self, "profits", tuple(_as_money(q) for q in self.profits))
        if len(self.prices) != len(self.profits):
            raise DimensionMismatchError(
                f"{len(self.prices)} prices but {len(self.profits)} profits"
            )
        if any(abs(x) > MAX_DUAL_UNITS for x in (*self.prices, *self.profits)):
            raise InvalidInstanceError(f"dual values must stay within {MAX_DUAL_UNITS}")

    @property
    def total(self) -> Money:
        """Dual objective sum(p) + sum(q)."""
        return sum(self.prices) + sum(self.profits)

    @property
    def min_price(self) -> Money:
        """Smallest price."""
        return min(self.prices)

    @property
    def is_normalized(self) -> bool:
        """True when p >= 0 and some price is exactly 0."""
        return self.min_price == 0

    def shifted(self, amount: Money) -> DualSolution:
        """Lower every price by ``amount`` and raise every profit by it."""
        return DualSolution(
            prices=tuple(p - amount for p in self.prices),
            profits=tuple(q + amount for q in self.profits),
        )

    def is_feasible(self, instance: MarketInstance) -> bool:
        """Check p_i + q_j >= v_ij over all pairs."""
        return first_infeasible_pair(instance, self) is None


@dataclass(frozen=True)
class EqualityGraph:
    """Pairs whose dual constraint is tight."""

    n: int
    edges: frozenset[Edge]

    def __contains__(self, edge: object) -> bool:
        """Test edge membership."""
        return edge in self.edges

    def __len__(self) -> int:
        """Number of equality edges."""
        return len(self.edges)

    def buyers_of_item(self, item: int) -> tuple[int, ...]:
        """Buyers joined to ``item``, ascending."""
        return tuple(j for j in range(self.n) if (item, j) in self.edges)

    def items_of_buyer(self, buyer: int) -> tuple[int, ...]:
        """Items joined to ``buyer``, ascending."""
        return tuple(i for i in range(self.n) if (i, buyer) in self.edges)


def slack_matrix(instance: MarketInstance, duals: DualSolution) -> np.ndarray:
    """Return the n x n matrix of p_i + q_j - v_ij."""
    if len(duals.prices) != instance.n:
        raise DimensionMismatchError(
            f"duals have {len(duals.prices)} entries, market has {instance.n}"
        )
    prices = np.array(duals.prices, dtype=np.int64)
    profits = np.array(duals.profits, dtype=np.int64)
    return prices[:, None] + profits[None, :] - instance.as_array()


def first_infeasible_pair(
    instance: MarketInstance, duals: DualSolution
) -> tuple[int, int, Money] | None:
    """Find the first pair (row-major) with negative slack.

    Returns:
        (item, buyer, slack) or None when the duals are feasible
    """
    slack = slack_matrix(instance, duals)
    violated = np.argwhere(slack < 0)
    if violated.size == 0:
        return None
    i, j = (int(x) for x in violated[0])
    return i, j, int(slack[i, j])


def require_feasible(instance: MarketInstance, duals: DualSolution) -> None:
    """Raise InfeasibleDualsError unless the duals are feasible."""
    violation = first_infeasible_pair(instance, duals)
    if violation is not None:
        raise InfeasibleDualsError(*violation)


def equality_graph(instance: MarketInstance, duals: DualSolution) -> EqualityGraph:
    """Derive the equality graph {(i, j) : p_i + q_j = v_ij}.

    Args:
        instance: Market instance
        duals: Feasible dual solution

    Returns:
        EqualityGraph of exactly tight pairs

    Raises:
        InfeasibleDualsError: if some pair has negative slack
    """
    require_feasible(instance, duals)
    tight = np.argwhere(slack_matrix(instance, duals) == 0)
    return EqualityGraph(n=instance.n, edges=frozenset((int(i), int(j)) for i, j in tight))


def pad_to_square(
    item_labels: Sequence[str],
    buyer_labels: Sequence[str],
    valuations: Sequence[Sequence[int]],
    scale: int = DEFAULT_SCALE,
) -> MarketInstance:
    """Pad an m x k market with zero rows or columns.

    Args:
        item_labels: m item labels
        buyer_labels: k buyer labels
        valuations: m x k matrix of nonnegative minor units
        scale: Minor units per major unit

    Returns:
        Square instance with n = max(m, k); added entities recorded as dummies
    """
    m, k = len(item_labels), len(buyer_labels)
    if m < 1 or k < 1:
        raise DimensionMismatchError("a market needs at least one item and one buyer")
    if len(valuations) != m or any(len(row) != k for row in valuations):
        raise DimensionMismatchError(f"valuation matrix must be {m}x{k} to match the labels")

    n = max(m, k)
    rows = [[*row, *([0] * (n - k))] for row in valuations]
    rows.extend([0] * n for _ in range(n - m))
    items = [*item_labels, *(f"{DUMMY_ITEM_PREFIX}{d}" for d in range(n - m))]
    buyers = [*buyer_labels, *(f"{DUMMY_BUYER_PREFIX}{d}" for d in range(n - k))]
    if n != m or n != k:
        _LOGGER.debug("Padded %dx%d market to %dx%d", m, k, n, n)

    return MarketInstance(
        item_labels=tuple(items),
        buyer_labels=tuple(buyers),
        valuations=tuple(tuple(row) for row in rows),
        dummy_items=frozenset(range(m, n)),
        dummy_buyers=frozenset(range(k, n)),
        scale=scale,
    )


def profits_for_prices(instance: MarketInstance, prices: Sequence[int]) -> DualSolution:
    """Complete a price vector with each buyer's best profit.

    q_j = max_i (v_ij - p_i), the smallest q making (p, q) feasible.
    """
    if len(prices) != instance.n:
        raise DimensionMismatchError(f"expected {instance.n} prices, got {len(prices)}")
    price_array = np.array([_as_money(p) for p in prices], dtype=np.int64)
    surplus = instance.as_array() - price_array[:, None]
    return DualSolution(
        prices=tuple(int(p) for p in price_array),
        profits=tuple(int(q) for q in surplus.max(axis=0)),
    )


def demand_set(instance: MarketInstance, prices: Sequence[int], buyer: int) -> tuple[int, ...]:
    """Items that give ``buyer`` maximum profit v_ij - p_i, ascending."""
    surplus = [instance.value(i, buyer) - prices[i] for i in range(instance.n)]
    best = max(surplus)
    return tuple(i for i, s in enumerate(surplus) if s == best)
