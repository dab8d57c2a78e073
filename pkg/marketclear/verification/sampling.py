"""Random markets and random market-clearing duals for property checks."""

from __future__ import annotations

import logging

import numpy as np

from ..market import DualSolution, MarketInstance, Matching, pad_to_square, slack_matrix

_LOGGER = logging.getLogger(__name__)

# Upper bound on a price bump when the chosen item set is every item
_MAX_FREE_BUMP = 10


def random_instance(
    rng: np.random.Generator,
    n_items: int,
    n_buyers: int,
    high: int = 100,
    scale: int = 1,
) -> MarketInstance:
    """Draw a market with valuations uniform on ``[0, high]``, padded to square."""
    values = rng.integers(0, high, size=(n_items, n_buyers), endpoint=True)
    return pad_to_square(
        [f"item{i}" for i in range(n_items)],
        [f"buyer{j}" for j in range(n_buyers)],
        values.tolist(),
        scale=scale,
    )


def random_clearing_duals(
    instance: MarketInstance,
    matching: Matching,
    duals: DualSolution,
    rng: np.random.Generator,
    bumps: int = 1,
) -> DualSolution:
    """Walk to another market-clearing dual solution.

    Each bump raises p on a random item set S and lowers q on the buyers
    matched to S by the same amount, at most the smallest slack between the
    items outside S and those buyers. Matched edges stay tight and every
    other pair stays feasible.

    Args:
        instance: Market instance
        matching: Perfect matching complementary with ``duals``
        duals: Market-clearing duals
        rng: Random generator
        bumps: Number of random raises to apply

    Returns:
        Market-clearing duals complementary with ``matching``
    """
    n = instance.n
    current = duals
    for _ in range(bumps):
        chosen = rng.random(n) < 0.5
        if not chosen.any():
            chosen[rng.integers(n)] = True
        subset = np.flatnonzero(chosen)
        partners = [matching.buyer_of(int(i)) for i in subset]
        outside = np.flatnonzero(~chosen)

        bound = _MAX_FREE_BUMP
        if outside.size:
            slack = slack_matrix(instance, current)[np.ix_(outside, partners)]
            bound = int(slack.min())
        amount = int(rng.integers(0, bound, endpoint=True))
        if amount == 0:
            continue

        in_subset = {int(i) for i in subset}
        raised = set(partners)
        current = DualSolution(
            prices=tuple(p + amount if i in in_subset else p for i, p in enumerate(current.prices)),
            profits=tuple(q - amount if j in raised else q for j, q in enumerate(current.profits)),
        )
        _LOGGER.debug("Raised prices on %s by %d", sorted(in_subset), amount)
    return current
