#!/usr/bin/env python3
"""Regenerate the golden CLI reports under tests/golden.

Run after an intentional change to a report layout, then review the diff.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

# Add parent to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from marketclear.cli import RunConfig, run

ROOT = Path(__file__).parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
GOLDEN = ROOT / "tests" / "golden"
PRICE_OPTIONS = ("prices", "other")

# golden file -> (command, instance, extra config); price documents are fixture names
CASES: dict[str, tuple[str, str, dict[str, object]]] = {
    "solve_two_by_two.json": ("solve", "two_by_two.json", {}),
    "prices_second_price.json": ("prices", "second_price.json", {}),
    "vcg_second_price.json": ("vcg", "second_price.json", {}),
    "check_second_price.json": ("check", "second_price.json", {}),
    "check_tied.json": ("check", "tied.json", {}),
    "audit_second_price.json": (
        "audit",
        "second_price.json",
        {"bidder": "high", "strategy": "structured", "trials": 5, "seed": 0},
    ),
    "verify_infeasible.json": (
        "verify",
        "second_price.json",
        {"prices": "infeasible_prices.json"},
    ),
    "meet_second_price.json": (
        "meet",
        "second_price.json",
        {"prices": "clearing_prices.json", "other": "first_prices.json"},
    ),
}


def main() -> None:
    """Write every golden report."""
    parser = argparse.ArgumentParser(description="Regenerate golden CLI reports")
    parser.add_argument("--only", choices=sorted(CASES), help="Regenerate a single report")
    args = parser.parse_args()

    GOLDEN.mkdir(parents=True, exist_ok=True)
    for golden, (command, instance, extra) in CASES.items():
        if args.only and golden != args.only:
            continue
        config = RunConfig(
            command=command,
            input=FIXTURES / instance,
            output=GOLDEN / golden,
            **{
                key: FIXTURES / str(value) if key in PRICE_OPTIONS else value
                for key, value in extra.items()
            },
        )
        status = run(config)
        print(f"{golden}: exit {status}")


if __name__ == "__main__":
    main()
