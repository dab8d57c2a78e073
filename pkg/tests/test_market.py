"""Tests for market core types."""

from itertools import permutations

import numpy as np
import pytest

from marketclear.const import DUMMY_BUYER_PREFIX, DUMMY_ITEM_PREFIX, MAX_MINOR_UNITS
from marketclear.exceptions import (
    DimensionMismatchError,
    DuplicateLabelError,
    InfeasibleDualsError,
    InstanceFormatError,
    InvalidInstanceError,
    NegativeValuationError,
)
from marketclear.market import (
    DualSolution,
    MarketInstance,
    Matching,
    demand_set,
    equality_graph,
    first_infeasible_pair,
    pad_to_square,
    profits_for_prices,
    slack_matrix,
)
from marketclear.verification import brute_force_optimum


class TestMarketInstance:
    """Tests for MarketInstance validation and transforms."""

    def test_square_instance(self, two_by_two):
        """Test basic accessors."""
        assert two_by_two.n == 2
        assert two_by_two.value(0, 1) == 1
        assert two_by_two.column(1) == (1, 2)
        assert two_by_two.max_valuation == 3
        assert two_by_two.real_items == (0, 1)
        assert two_by_two.real_buyers == (0, 1)

    def test_numpy_values_become_ints(self):
        """Test that numpy integers are stored as Python ints."""
        instance = MarketInstance(("a",), ("x",), np.array([[7]], dtype=np.int64))
        assert instance.valuations == ((7,),)
        assert type(instance.valuations[0][0]) is int

    def test_not_square(self):
        """Test that a rectangular instance is rejected."""
        with pytest.raises(DimensionMismatchError):
            MarketInstance(("a", "b"), ("x",), ((1,), (2,)))

    def test_ragged_matrix(self):
        """Test that a ragged matrix is rejected."""
        with pytest.raises(DimensionMismatchError):
            MarketInstance(("a", "b"), ("x", "y"), ((1, 2), (3,)))

    def test_empty(self):
        """Test that an empty market is rejected."""
        with pytest.raises(DimensionMismatchError):
            MarketInstance((), (), ())

    def test_duplicate_labels(self):
        """Test that duplicate labels are rejected."""
        with pytest.raises(DuplicateLabelError):
            MarketInstance(("a", "a"), ("x", "y"), ((1, 2), (3, 4)))
        with pytest.raises(DuplicateLabelError):
            MarketInstance(("a", "b"), ("x", "x"), ((1, 2), (3, 4)))

    def test_negative_valuation(self):
        """Test that negative entries are rejected with their position."""
        with pytest.raises(NegativeValuationError) as err:
            MarketInstance(("a", "b"), ("x", "y"), ((1, 2), (-3, 4)))
        assert err.value.item == 1
        assert err.value.buyer == 0
        assert "negative" in str(err.value)

    def test_boolean_valuation(self):
        """Test that booleans are not accepted as amounts."""
        with pytest.raises(InstanceFormatError):
            MarketInstance(("a",), ("x",), ((True,),))

    def test_magnitude_guard(self):
        """Test that oversized valuations are rejected."""
        with pytest.raises(InvalidInstanceError):
            MarketInstance(("a",), ("x",), ((MAX_MINOR_UNITS + 1,),))

    def test_dummy_must_be_zero(self):
        """Test that dummy rows and columns must be zero."""
        with pytest.raises(InvalidInstanceError):
            MarketInstance(("a", "b"), ("x", "y"), ((1, 2), (3, 4)), dummy_items=frozenset({1}))
        with pytest.raises(InvalidInstanceError):
            MarketInstance(("a", "b"), ("x", "y"), ((1, 0), (3, 4)), dummy_buyers=frozenset({1}))

    def test_invalid_scale(self):
        """Test that the scale must be positive."""
        with pytest.raises(InvalidInstanceError):
            MarketInstance(("a",), ("x",), ((1,),), scale=0)

    def test_with_buyer_column(self, two_by_two):
        """Test replacing one buyer's valuations."""
        changed = two_by_two.with_buyer_column(1, [9, 9])
        assert changed.valuations == ((3, 9), (1, 9))
        assert changed.buyer_labels == two_by_two.buyer_labels
        assert two_by_two.valuations == ((3, 1), (1, 2))

    def test_without_buyer(self, two_by_two):
        """Test zeroing a buyer's column."""
        assert two_by_two.without_buyer(0).valuations == ((0, 1), (0, 2))

    def test_without_pair(self, two_by_two):
        """Test zeroing an item's row and a buyer's column."""
        assert two_by_two.without_pair(0, 1).valuations == ((0, 0), (1, 0))

    def test_permuted(self, second_price):
        """Test reordering items and buyers keeps dummies aligned."""
        flipped = second_price.permuted([1, 0], [1, 0])
        assert flipped.item_labels == (f"{DUMMY_ITEM_PREFIX}0", "item")
        assert flipped.buyer_labels == ("low", "high")
        assert flipped.valuations == ((0, 0), (8, 10))
        assert flipped.dummy_items == frozenset({0})


class TestPadToSquare:
    """Tests for padding rectangular markets."""

    def test_more_buyers(self, second_price):
        """Test that dummy items are appended as zero rows."""
        assert second_price.n == 2
        assert second_price.valuations == ((10, 8), (0, 0))
        assert second_price.dummy_items == frozenset({1})
        assert second_price.dummy_buyers == frozenset()
        assert second_price.item_labels[1] == f"{DUMMY_ITEM_PREFIX}0"
        assert second_price.real_items == (0,)

    def test_more_items(self):
        """Test that dummy buyers are appended as zero columns."""
        instance = pad_to_square(["a", "b", "c"], ["x"], [[1], [2], [3]])
        assert instance.valuations == ((1, 0, 0), (2, 0, 0), (3, 0, 0))
        assert instance.dummy_buyers == frozenset({1, 2})
        assert instance.buyer_labels[1:] == (f"{DUMMY_BUYER_PREFIX}0", f"{DUMMY_BUYER_PREFIX}1")

    def test_square_input_unchanged(self):
        """Test that a square input gets no dummies."""
        instance = pad_to_square(["a"], ["x"], [[4]])
        assert not instance.dummy_items
        assert not instance.dummy_buyers

    def test_label_mismatch(self):
        """Test that the matrix must match the labels."""
        with pytest.raises(DimensionMismatchError):
            pad_to_square(["a", "b"], ["x"], [[1]])

    def test_padding_keeps_optimum(self, rng):
        """Test that padding leaves the optimal value of a rectangular market unchanged."""
        for _ in range(40):
            n_items, n_buyers = (int(x) for x in rng.integers(1, 7, size=2))
            rows = rng.integers(0, 20, size=(n_items, n_buyers), endpoint=True).tolist()
            if n_items <= n_buyers:
                rectangular = max(
                    sum(rows[i][j] for i, j in enumerate(chosen))
                    for chosen in permutations(range(n_buyers), n_items)
                )
            else:
                rectangular = max(
                    sum(rows[i][j] for j, i in enumerate(chosen))
                    for chosen in permutations(range(n_items), n_buyers)
                )
            padded = pad_to_square(
                [f"i{i}" for i in range(n_items)], [f"b{j}" for j in range(n_buyers)], rows
            )
            assert padded.n == max(n_items, n_buyers)
            assert brute_force_optimum(padded)[0] == rectangular


class TestMatching:
    """Tests for Matching."""

    def test_from_assignment(self, two_by_two):
        """Test value and accessors."""
        matching = Matching.from_assignment(two_by_two, [1, 0])
        assert matching.value == 2
        assert matching.pairs == ((0, 1), (1, 0))
        assert matching.buyer_of(0) == 1
        assert matching.item_of(1) == 0
        assert matching.is_perfect

    def test_not_perfect(self, two_by_two):
        """Test a matching that assigns one buyer twice."""
        assert not Matching.from_assignment(two_by_two, [0, 0]).is_perfect

    def test_out_of_range(self, two_by_two):
        """Test that out-of-range buyers are rejected."""
        with pytest.raises(DimensionMismatchError):
            Matching.from_assignment(two_by_two, [0, 2])


class TestDualSolution:
    """Tests for DualSolution."""

    def test_total_and_shift(self):
        """Test the dual objective and the uniform shift."""
        duals = DualSolution(prices=(3, 2), profits=(0, 0))
        shifted = duals.shifted(2)
        assert shifted.prices == (1, 0)
        assert shifted.profits == (2, 2)
        assert shifted.total == duals.total == 5
        assert shifted.is_normalized
        assert not duals.is_normalized

    def test_length_mismatch(self):
        """Test that prices and profits must have equal length."""
        with pytest.raises(DimensionMismatchError):
            DualSolution(prices=(1, 2), profits=(0,))

    def test_feasibility(self, two_by_two):
        """Test the feasibility check."""
        assert DualSolution(prices=(0, 0), profits=(3, 2)).is_feasible(two_by_two)
        assert not DualSolution(prices=(0, 0), profits=(0, 0)).is_feasible(two_by_two)


class TestSlackAndEqualityGraph:
    """Tests for slack matrices and equality graphs."""

    def test_slack_matrix(self, two_by_two):
        """Test p_i + q_j - v_ij entrywise."""
        slack = slack_matrix(two_by_two, DualSolution(prices=(0, 0), profits=(3, 2)))
        assert slack.tolist() == [[0, 1], [2, 0]]

    def test_equality_graph(self, two_by_two):
        """Test that only tight pairs are edges."""
        graph = equality_graph(two_by_two, DualSolution(prices=(0, 0), profits=(3, 2)))
        assert graph.edges == frozenset({(0, 0), (1, 1)})
        assert (0, 0) in graph
        assert len(graph) == 2
        assert graph.items_of_buyer(0) == (0,)
        assert graph.buyers_of_item(1) == (1,)

    def test_infeasible_duals(self, two_by_two):
        """Test that the first violated pair is reported."""
        duals = DualSolution(prices=(0, 0), profits=(0, 0))
        assert first_infeasible_pair(two_by_two, duals) == (0, 0, -3)
        with pytest.raises(InfeasibleDualsError) as err:
            equality_graph(two_by_two, duals)
        assert (err.value.item, err.value.buyer, err.value.slack) == (0, 0, -3)

    def test_dimension_mismatch(self, two_by_two):
        """Test that duals must match the market size."""
        with pytest.raises(DimensionMismatchError):
            slack_matrix(two_by_two, DualSolution(prices=(0,), profits=(0,)))

    @pytest.mark.parametrize("item", [0, 1])
    def test_raised_price_drops_only_its_edges(self, tied, item):
        """Test that p_i + 1 removes item i's tight edges and adds none."""
        duals = DualSolution(prices=(1, 0), profits=(1, 0))
        before = equality_graph(tied, duals)
        prices = list(duals.prices)
        prices[item] += 1
        after = equality_graph(tied, DualSolution(prices=tuple(prices), profits=duals.profits))
        assert after.edges == frozenset(edge for edge in before.edges if edge[0] != item)
        assert not after.buyers_of_item(item)


class TestBestResponse:
    """Tests for profits_for_prices and demand_set."""

    def test_profits_for_prices(self, second_price):
        """Test that q_j is each buyer's best profit."""
        duals = profits_for_prices(second_price, [8, 0])
        assert duals.prices == (8, 0)
        assert duals.profits == (2, 0)
        assert duals.is_feasible(second_price)

    def test_profits_for_prices_length(self, second_price):
        """Test that one price per item is required."""
        with pytest.raises(DimensionMismatchError):
            profits_for_prices(second_price, [8])

    def test_demand_set(self, second_price):
        """Test ascending maximum-profit items."""
        assert demand_set(second_price, [8, 0], 0) == (0,)
        assert demand_set(second_price, [8, 0], 1) == (0, 1)
        assert demand_set(second_price, [9, 0], 1) == (1,)
