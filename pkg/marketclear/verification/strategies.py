"""Misreport generators for the incentive audit.

Each strategy yields candidate valuation columns for one bidder. Entries for
dummy items are always 0, since padding rows must stay zero.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Iterable, Iterator
from itertools import product
from typing import ClassVar

import numpy as np

from ..const import (
    GRID_SIZE_LIMIT,
    MAX_MINOR_UNITS,
    STRATEGY_ALL,
    STRATEGY_GRID,
    STRATEGY_RANDOM,
    STRATEGY_STRUCTURED,
)
from ..market import MarketInstance

_LOGGER = logging.getLogger(__name__)

Misreport = tuple[int, ...]


def _top(instance: MarketInstance) -> int:
    """Reference magnitude for misreports: the largest valuation, at least 1."""
    return max(instance.max_valuation, 1)


def _clean(instance: MarketInstance, vector: Iterable[int]) -> Misreport:
    """Clip into the valid range and zero the dummy items."""
    return tuple(
        0 if i in instance.dummy_items else min(max(int(v), 0), MAX_MINOR_UNITS)
        for i, v in enumerate(vector)
    )


def _unique(vectors: Iterable[Misreport]) -> Iterator[Misreport]:
    seen: set[Misreport] = set()
    for vector in vectors:
        if vector not in seen:
            seen.add(vector)
            yield vector


class MisreportStrategy(ABC):
    """Base class for misreport generators."""

    name: ClassVar[str]

    @abstractmethod
    def generate(
        self,
        instance: MarketInstance,
        bidder: int,
        trials: int,
        rng: np.random.Generator,
    ) -> Iterator[Misreport]:
        """Yield misreported valuation columns for ``bidder``.

        Args:
            instance: Market with the true valuations
            bidder: Buyer index of the deviating bidder
            trials: Number of draws for randomised strategies
            rng: Random generator, the only source of randomness

        Returns:
            Iterator of columns, one entry per item
        """


class RandomMisreports(MisreportStrategy):
    """Uniform random columns on ``[0, 2 * max v + 1]``."""

    name = STRATEGY_RANDOM

    def generate(
        self,
        instance: MarketInstance,
        bidder: int,
        trials: int,
        rng: np.random.Generator,
    ) -> Iterator[Misreport]:
        """Yield ``trials`` random columns."""
        draws = rng.integers(0, 2 * _top(instance) + 1, size=(trials, instance.n), endpoint=True)
        for row in draws:
            yield _clean(instance, row.tolist())


class StructuredMisreports(MisreportStrategy):
    """Shifts, single-entry perturbations, all zeros and doubling of the truth."""

    name = STRATEGY_STRUCTURED

    def generate(
        self,
        instance: MarketInstance,
        bidder: int,
        trials: int,
        rng: np.random.Generator,
    ) -> Iterator[Misreport]:
        """Yield the structured family; ``trials`` and ``rng`` are unused."""
        return _unique(self._candidates(instance, bidder))

    @staticmethod
    def _candidates(instance: MarketInstance, bidder: int) -> Iterator[Misreport]:
        truth = instance.column(bidder)
        top = _top(instance)
        yield _clean(instance, truth)
        for shift in (1, max(top // 2, 1), top):
            yield _clean(instance, (v + shift for v in truth))
            yield _clean(instance, (v - shift for v in truth))
        for item in instance.real_items:
            for entry in (truth[item] + 1, truth[item] - 1, 0, 2 * top):
                vector = list(truth)
                vector[item] = entry
                yield _clean(instance, vector)
        yield _clean(instance, [0] * instance.n)
        yield _clean(instance, (2 * v for v in truth))


class GridMisreports(MisreportStrategy):
    """Every column over the levels {0, max v / 2, max v, 2 max v}, small markets only."""

    name = STRATEGY_GRID

    def generate(
        self,
        instance: MarketInstance,
        bidder: int,
        trials: int,
        rng: np.random.Generator,
    ) -> Iterator[Misreport]:
        """Yield the grid, or nothing when n exceeds the grid limit."""
        if instance.n > GRID_SIZE_LIMIT:
            _LOGGER.warning(
                "Skipping grid misreports: n = %d exceeds %d", instance.n, GRID_SIZE_LIMIT
            )
            return iter(())
        top = _top(instance)
        levels = (0, top // 2, top, 2 * top)
        return _unique(_clean(instance, vector) for vector in product(levels, repeat=instance.n))


class AllMisreports(MisreportStrategy):
    """Structured, then random, then grid misreports."""

    name = STRATEGY_ALL

    def generate(
        self,
        instance: MarketInstance,
        bidder: int,
        trials: int,
        rng: np.random.Generator,
    ) -> Iterator[Misreport]:
        """Chain the three families."""
        for strategy in (StructuredMisreports(), RandomMisreports(), GridMisreports()):
            yield from strategy.generate(instance, bidder, trials, rng)


STRATEGY_CLASSES: dict[str, type[MisreportStrategy]] = {
    STRATEGY_RANDOM: RandomMisreports,
    STRATEGY_STRUCTURED: StructuredMisreports,
    STRATEGY_GRID: GridMisreports,
    STRATEGY_ALL: AllMisreports,
}


def get_strategy(name: str) -> MisreportStrategy:
    """Instantiate a registered strategy by name."""
    try:
        return STRATEGY_CLASSES[name]()
    except KeyError as err:
        raise ValueError(
            f"unknown misreport strategy {name!r}; expected one of {sorted(STRATEGY_CLASSES)}"
        ) from err
