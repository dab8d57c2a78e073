"""Brute-force optimum by enumerating every perfect matching."""

from __future__ import annotations

import logging
from itertools import permutations

import numpy as np

from ..const import DEFAULT_ORACLE_LIMIT
from ..exceptions import OracleLimitError
from ..market import MarketInstance, Matching, Money

_LOGGER = logging.getLogger(__name__)


def brute_force_optimum(
    instance: MarketInstance, limit: int = DEFAULT_ORACLE_LIMIT
) -> tuple[Money, Matching]:
    """Enumerate all n! assignments and keep the best.

    Args:
        instance: Market instance
        limit: Largest n the oracle accepts

    Returns:
        (optimum value, lexicographically smallest optimal matching)

    Raises:
        OracleLimitError: if n exceeds ``limit``
    """
    n = instance.n
    if n > limit:
        raise OracleLimitError(f"brute-force oracle is limited to n <= {limit}, got n = {n}")
    # permutations() yields assignments in lexicographic order, argmax keeps the first maximum
    candidates = np.array(list(permutations(range(n))), dtype=np.intp)
    totals = instance.as_array()[np.arange(n), candidates].sum(axis=1)
    best = int(np.argmax(totals))
    _LOGGER.debug("Oracle checked %d assignments, optimum %d", len(candidates), totals[best])
    return int(totals[best]), Matching.from_assignment(instance, candidates[best].tolist())
