"""Maximum-valuation assignment by price raising (Hungarian method).

The solver keeps a feasible dual solution (p, q) and a matching inside the
equality graph. An unmatched buyer grows an alternating forest; when the
forest hits a free item the matching is augmented, otherwise prices are
raised on the reached items until a new equality edge appears.
"""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .const import INIT_BUYERS, INIT_ITEMS, REACH_FROM_UNMATCHED, REACH_MATCHED_FIRST
from .exceptions import InfeasibleDualsError, InvariantViolation, ReachModeError
from .market import (
    DualSolution,
    Edge,
    MarketInstance,
    Matching,
    equality_graph,
    first_infeasible_pair,
    slack_matrix,
)

_LOGGER = logging.getLogger(__name__)

ITEM = "item"
BUYER = "buyer"

Node = tuple[str, int]
PartialMatching = Sequence[int | None]


@dataclass(frozen=True)
class AlternatingForest:
    """Nodes reachable from ``root`` along alternating paths in the equality graph.

    ``parent_edge`` maps every reached node except the root to the
    (item, buyer) edge used to reach it. ``free_item`` is set when the
    search reached an unmatched item, which ends an augmenting path.
    """

    root: int
    mode: str
    reached_items: tuple[int, ...]
    reached_buyers: tuple[int, ...]
    parent_edge: Mapping[Node, Edge] = field(compare=False)
    free_item: int | None = None

    def path_to(self, item: int) -> tuple[Edge, ...]:
        """Edges of the alternating path from the root to ``item``, root first."""
        if (ITEM, item) not in self.parent_edge:
            raise KeyError(f"item {item} was not reached from buyer {self.root}")
        edges: list[Edge] = []
        node: Node = (ITEM, item)
        while node != (BUYER, self.root):
            edge = self.parent_edge[node]
            edges.append(edge)
            node = (BUYER, edge[1]) if node[0] == ITEM else (ITEM, edge[0])
        return tuple(reversed(edges))


def _as_partial(matching: Matching | PartialMatching) -> list[int | None]:
    if isinstance(matching, Matching):
        return list(matching.assignment)
    return list(matching)


def alternating_reach(
    instance: MarketInstance,
    matching: Matching | PartialMatching,
    duals: DualSolution,
    start: int,
    mode: str,
) -> AlternatingForest:
    """Collect the items reachable from ``start`` along alternating paths.

    In ``grow-from-unmatched`` mode the start buyer must be unmatched and paths
    leave it by a non-matching equality edge; the search stops at the first
    free item. In ``grow-matched-first`` mode the start buyer must be matched
    and paths start (and end) with a matching edge.

    Args:
        instance: Market instance
        matching: Item-to-buyer assignment, ``None`` for unmatched items
        duals: Feasible dual solution defining the equality graph
        start: Buyer index to grow from
        mode: One of the reach mode constants

    Returns:
        AlternatingForest with nodes in discovery order (ascending indices)

    Raises:
        ReachModeError: if the start buyer's matched status contradicts ``mode``
    """
    assignment = _as_partial(matching)
    buyer_to_item = {j: i for i, j in enumerate(assignment) if j is not None}
    graph = equality_graph(instance, duals)
    parent: dict[Node, Edge] = {}

    if mode == REACH_FROM_UNMATCHED:
        if start in buyer_to_item:
            raise ReachModeError(f"buyer {start} is matched; {mode} needs an unmatched buyer")
        items: list[int] = []
        buyers = [start]
        seen: set[int] = set()
        queue = deque([start])
        while queue:
            buyer = queue.popleft()
            for item in graph.items_of_buyer(buyer):
                if item in seen:
                    continue
                seen.add(item)
                items.append(item)
                parent[(ITEM, item)] = (item, buyer)
                partner = assignment[item]
                if partner is None:
                    return AlternatingForest(
                        start, mode, tuple(items), tuple(buyers), parent, free_item=item
                    )
                parent[(BUYER, partner)] = (item, partner)
                buyers.append(partner)
                queue.append(partner)
        return AlternatingForest(start, mode, tuple(items), tuple(buyers), parent)

    if mode == REACH_MATCHED_FIRST:
        if start not in buyer_to_item:
            raise ReachModeError(f"buyer {start} is unmatched; {mode} needs a matched buyer")
        first = buyer_to_item[start]
        items = [first]
        buyers = [start]
        seen_items = {first}
        seen_buyers = {start}
        parent[(ITEM, first)] = (first, start)
        queue = deque([first])
        while queue:
            item = queue.popleft()
            for buyer in graph.buyers_of_item(item):
                if buyer in seen_buyers:
                    continue
                partner_item = buyer_to_item.get(buyer)
                if partner_item is None or partner_item in seen_items:
                    continue
                seen_buyers.add(buyer)
                buyers.append(buyer)
                parent[(BUYER, buyer)] = (item, buyer)
                seen_items.add(partner_item)
                items.append(partner_item)
                parent[(ITEM, partner_item)] = (partner_item, buyer)
                queue.append(partner_item)
        return AlternatingForest(start, mode, tuple(items), tuple(buyers), parent)

    raise ReachModeError(f"unknown reach mode {mode!r}")


def price_raise_step(
    instance: MarketInstance,
    forest: AlternatingForest,
    duals: DualSolution,
) -> tuple[DualSolution, Edge]:
    """Raise p on the reached items and lower q on the reached buyers.

    The amount is the minimum slack between items outside the reach set and
    the reached buyers (the unmatched root included), so feasibility holds and
    at least one such pair becomes tight.

    Args:
        instance: Market instance
        forest: Forest without a free item
        duals: Current feasible duals

    Returns:
        New duals and the (item, buyer) pair that became tight
    """
    if forest.free_item is not None:
        raise ValueError("forest reaches a free item; augment instead of raising prices")
    reached = set(forest.reached_items)
    outside = [i for i in range(instance.n) if i not in reached]
    if not outside:
        raise InvariantViolation(f"buyer {forest.root} reaches every item yet is unmatched")
    buyers = sorted(forest.reached_buyers)

    slack = slack_matrix(instance, duals)[np.ix_(outside, buyers)]
    delta = int(slack.min())
    row, col = (int(x) for x in np.argwhere(slack == delta)[0])
    tight = (outside[row], buyers[col])
    if delta < 0:
        raise InfeasibleDualsError(tight[0], tight[1], delta)

    raised = set(buyers)
    prices = tuple(p + delta if i in reached else p for i, p in enumerate(duals.prices))
    profits = tuple(q - delta if j in raised else q for j, q in enumerate(duals.profits))
    return DualSolution(prices=prices, profits=profits), tight


def _augment(assignment: list[int | None], forest: AlternatingForest) -> None:
    """Flip the alternating path ending at the forest's free item."""
    if forest.free_item is None:
        raise ValueError("forest has no free item to augment to")
    path = forest.path_to(forest.free_item)
    # Non-matching edges sit at even positions of a path leaving an unmatched buyer
    for item, buyer in path[::2]:
        assignment[item] = buyer


def _initial_duals(instance: MarketInstance, init: str) -> DualSolution:
    values = instance.as_array()
    n = instance.n
    if init == INIT_ITEMS:
        return DualSolution(prices=tuple(int(v) for v in values.max(axis=1)), profits=(0,) * n)
    if init == INIT_BUYERS:
        return DualSolution(prices=(0,) * n, profits=tuple(int(v) for v in values.max(axis=0)))
    raise ValueError(f"unknown solver initialisation {init!r}")


def _check_step(instance: MarketInstance, assignment: PartialMatching, duals: DualSolution) -> None:
    violation = first_infeasible_pair(instance, duals)
    if violation is not None:
        raise InvariantViolation(f"dual feasibility lost at pair {violation[:2]}")
    for item, buyer in enumerate(assignment):
        if buyer is None:
            continue
        if duals.prices[item] + duals.profits[buyer] != instance.value(item, buyer):
            raise InvariantViolation(f"matched edge ({item}, {buyer}) left the equality graph")


def solve_assignment(
    instance: MarketInstance,
    *,
    init: str = INIT_ITEMS,
    check_invariants: bool = False,
) -> tuple[Matching, DualSolution]:
    """Compute a maximum-valuation perfect matching and optimal duals.

    Args:
        instance: Square market instance
        init: "items" starts from p = row maxima, q = 0; "buyers" from p = 0,
            q = column maxima
        check_invariants: Re-check feasibility and complementarity after every step

    Returns:
        (matching, duals) with every matched edge tight and
        matching.value == sum(p) + sum(q)
    """
    n = instance.n
    duals = _initial_duals(instance, init)
    assignment: list[int | None] = [None] * n

    graph = equality_graph(instance, duals)
    for buyer in range(n):
        for item in graph.items_of_buyer(buyer):
            if assignment[item] is None:
                assignment[item] = buyer
                break

    augmentations = 0
    for buyer in range(n):
        if buyer in assignment:
            continue
        raises = 0
        while True:
            forest = alternating_reach(instance, assignment, duals, buyer, REACH_FROM_UNMATCHED)
            if forest.free_item is not None:
                _augment(assignment, forest)
                augmentations += 1
                _LOGGER.debug(
                    "Augmented to buyer %d via item %d after %d raises",
                    buyer,
                    forest.free_item,
                    raises,
                )
                break
            duals, tight = price_raise_step(instance, forest, duals)
            raises += 1
            _LOGGER.debug("Raised prices on %s, new equality edge %s", forest.reached_items, tight)
            if raises > n:
                raise InvariantViolation(f"more than {n} price raises for buyer {buyer}")
            if check_invariants:
                _check_step(instance, assignment, duals)
        if augmentations > n:
            raise InvariantViolation(f"more than {n} augmentations")

    _check_step(instance, assignment, duals)
    matching = Matching.from_assignment(instance, [j for j in assignment if j is not None])
    if matching.value != duals.total:
        raise InvariantViolation(
            f"strong duality fails: matching value {matching.value} != dual total {duals.total}"
        )
    return matching, duals


def find_clearing_matching(instance: MarketInstance, duals: DualSolution) -> Matching | None:
    """Find a perfect matching inside the equality graph of ``duals``.

    Args:
        instance: Market instance
        duals: Feasible duals

    Returns:
        A perfect matching of tight edges, or None if the equality graph has none
    """
    assignment: list[int | None] = [None] * instance.n
    for buyer in range(instance.n):
        forest = alternating_reach(instance, assignment, duals, buyer, REACH_FROM_UNMATCHED)
        if forest.free_item is None:
            _LOGGER.debug("Buyer %d cannot be matched inside the equality graph", buyer)
            return None
        _augment(assignment, forest)
    return Matching.from_assignment(instance, [j for j in assignment if j is not None])
