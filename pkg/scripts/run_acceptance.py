#!/usr/bin/env python3
"""Run the acceptance sweeps at full size and print a summary.

Each sweep draws random markets with valuations uniform on [0, 100] and
checks the pipeline against the brute-force oracle, VCG prices, the lattice
meet and the incentive audit.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from collections.abc import Callable, Iterator
from pathlib import Path

# Add parent to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np

from marketclear.buyer_optimal import (
    buyer_optimal_prices,
    lattice_meet,
    normalize_prices,
    reduce_to_buyer_optimal,
)
from marketclear.const import INIT_BUYERS
from marketclear.market import MarketInstance, pad_to_square
from marketclear.solver import solve_assignment
from marketclear.vcg import check_equivalence
from marketclear.verification import (
    audit_incentive,
    brute_force_optimum,
    random_clearing_duals,
    random_instance,
    verify_market_clearing,
)

Sweep = Callable[[argparse.Namespace], tuple[int, int]]


def _instances(seed: int, count: int, max_n: int) -> Iterator[MarketInstance]:
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n_items, n_buyers = (int(x) for x in rng.integers(1, max_n + 1, size=2))
        yield random_instance(rng, n_items, n_buyers, high=100)


def oracle_sweep(args: argparse.Namespace) -> tuple[int, int]:
    """Solver optimum equals the brute-force optimum."""
    passed = total = 0
    for instance in _instances(args.seed, args.instances, args.max_n):
        total += 1
        passed += solve_assignment(instance)[0].value == brute_force_optimum(instance)[0]
    return passed, total


def clearing_sweep(args: argparse.Namespace) -> tuple[int, int]:
    """Pipeline output passes all five clearing checks."""
    passed = total = 0
    for instance in _instances(args.seed, args.instances, args.max_n):
        total += 1
        passed += bool(verify_market_clearing(instance, *buyer_optimal_prices(instance)))
    return passed, total


def equivalence_sweep(args: argparse.Namespace) -> tuple[int, int]:
    """Buyer-optimal prices equal VCG prices."""
    passed = total = 0
    for instance in _instances(args.seed, args.instances, args.max_n):
        total += 1
        passed += check_equivalence(instance, strict=False).equivalent
    return passed, total


def lattice_sweep(args: argparse.Namespace) -> tuple[int, int]:
    """Meets of random clearing vectors clear the market."""
    rng = np.random.default_rng(args.seed)
    passed = total = 0
    for instance in _instances(args.seed, args.lattice_instances, 5):
        matching, duals = solve_assignment(instance)
        start = normalize_prices(duals)
        for _ in range(args.pairs):
            first = random_clearing_duals(instance, matching, start, rng, bumps=3)
            second = random_clearing_duals(instance, matching, start, rng, bumps=3)
            total += 1
            passed += bool(
                verify_market_clearing(instance, matching, lattice_meet(instance, first, second))
            )
    return passed, total


def uniqueness_sweep(args: argparse.Namespace) -> tuple[int, int]:
    """Different clearing starts and a relabelled market give the same prices."""
    passed = total = 0
    for instance in _instances(args.seed, args.instances, args.max_n):
        matching, duals = solve_assignment(instance)
        expected = reduce_to_buyer_optimal(instance, matching, duals).prices
        other = reduce_to_buyer_optimal(instance, *solve_assignment(instance, init=INIT_BUYERS))
        shifted = reduce_to_buyer_optimal(instance, matching, duals.shifted(-5))
        order = list(range(instance.n - 1, -1, -1))
        _, relabelled = buyer_optimal_prices(instance.permuted(order, order))
        total += 1
        passed += other.prices == expected == shifted.prices == relabelled.prices[::-1]
    return passed, total


def audit_sweep(args: argparse.Namespace) -> tuple[int, int]:
    """No misreport raises a bidder's utility; counts deviations."""
    passed = total = 0
    for index, instance in enumerate(_instances(args.seed, args.audit_instances, 4)):
        for bidder in instance.real_buyers:
            report = audit_incentive(
                instance, bidder, "all", trials=args.trials, seed=index, strict=False
            )
            total += len(report.deviations)
            passed += len(report.deviations) - len(report.violations)
    return passed, total


def second_price_sweep(args: argparse.Namespace) -> tuple[int, int]:
    """High bidder wins at the low bid."""
    passed = total = 0
    for high in range(20):
        for low in range(high):
            matching, duals = buyer_optimal_prices(
                pad_to_square(["item"], ["high", "low"], [[high, low]])
            )
            total += 1
            passed += matching.buyer_of(0) == 0 and duals.prices[0] == low
    return passed, total


SWEEPS: dict[str, Sweep] = {
    "oracle": oracle_sweep,
    "clearing": clearing_sweep,
    "equivalence": equivalence_sweep,
    "lattice": lattice_sweep,
    "uniqueness": uniqueness_sweep,
    "audit": audit_sweep,
    "second-price": second_price_sweep,
}


def main() -> None:
    """Run the selected sweeps and exit non-zero on any failure."""
    parser = argparse.ArgumentParser(description="Run the acceptance sweeps")
    parser.add_argument("--sweep", choices=sorted(SWEEPS), action="append")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--instances", type=int, default=1000)
    parser.add_argument("--max-n", type=int, default=8)
    parser.add_argument("--lattice-instances", type=int, default=20)
    parser.add_argument("--pairs", type=int, default=500)
    parser.add_argument("--audit-instances", type=int, default=200)
    parser.add_argument("--trials", type=int, default=300)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    failed = False
    for name in args.sweep or list(SWEEPS):
        started = time.perf_counter()
        passed, total = SWEEPS[name](args)
        elapsed = time.perf_counter() - started
        status = "ok" if passed == total else "FAIL"
        failed |= passed != total
        print(f"{name:<14} {passed:>8}/{total:<8} {elapsed:7.1f}s  {status}")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
