"""Test fixtures for marketclear."""

import sys
from collections.abc import Callable, Sequence
from pathlib import Path

# Add the repository root to the path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest

from marketclear.market import MarketInstance, pad_to_square

FIXTURES_DIR = Path(__file__).parent / "fixtures"
GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def make_market() -> Callable[[Sequence[Sequence[int]]], MarketInstance]:
    """Build a market from a matrix with generated labels, padding if rectangular."""

    def _make(rows: Sequence[Sequence[int]]) -> MarketInstance:
        return pad_to_square(
            [f"item{i}" for i in range(len(rows))],
            [f"buyer{j}" for j in range(len(rows[0]))],
            rows,
        )

    return _make


@pytest.fixture
def second_price() -> MarketInstance:
    """One item, a high bidder at 10 and a low bidder at 8."""
    return pad_to_square(["item"], ["high", "low"], [[10, 8]])


@pytest.fixture
def two_by_two() -> MarketInstance:
    """Square market whose optimum is the diagonal."""
    return MarketInstance(
        item_labels=("a", "b"),
        buyer_labels=("x", "y"),
        valuations=((3, 1), (1, 2)),
    )


@pytest.fixture
def competitive() -> MarketInstance:
    """Both buyers prefer item a; the optimum gives a to y at price 2."""
    return MarketInstance(
        item_labels=("a", "b"),
        buyer_labels=("x", "y"),
        valuations=((6, 5), (4, 1)),
    )


@pytest.fixture
def tied() -> MarketInstance:
    """Market with two maximum matchings of value 2."""
    return MarketInstance(
        item_labels=("a", "b"),
        buyer_labels=("x", "y"),
        valuations=((2, 1), (1, 0)),
    )


@pytest.fixture
def single() -> MarketInstance:
    """One item, one buyer."""
    return MarketInstance(item_labels=("a",), buyer_labels=("x",), valuations=((5,),))


@pytest.fixture
def all_zero() -> MarketInstance:
    """Three items nobody values."""
    return MarketInstance(
        item_labels=("a", "b", "c"),
        buyer_labels=("x", "y", "z"),
        valuations=((0, 0, 0), (0, 0, 0), (0, 0, 0)),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded random generator."""
    return np.random.default_rng(20240607)


@pytest.fixture
def fixtures_dir() -> Path:
    """Directory of instance and price fixture files."""
    return FIXTURES_DIR


@pytest.fixture
def golden_dir() -> Path:
    """Directory of golden CLI reports."""
    return GOLDEN_DIR
