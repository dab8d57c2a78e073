"""Command-line interface.

Reports go to stdout (or ``--output``), diagnostics to stderr. Exit status is
0 on success, 1 when a verdict fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from pathlib import Path

from .buyer_optimal import (
    buyer_optimal_prices,
    check_buyer_optimal,
    lattice_meet,
    normalize_prices,
)
from .const import (
    COMMAND_AUDIT,
    COMMAND_CHECK,
    COMMAND_MEET,
    COMMAND_PRICES,
    COMMAND_SOLVE,
    COMMAND_VCG,
    COMMAND_VERIFY,
    DEFAULT_ORACLE_LIMIT,
    DEFAULT_SCALE,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERDICT_FAILED,
    FORMAT_CSV,
    FORMAT_JSON,
    FORMATS,
    INIT_ITEMS,
    SOLVER_INITS,
    STRATEGY_ALL,
)
from .exceptions import InvariantViolation, MarketError, OracleLimitError
from .instance_io import PriceDocument, load_instance, load_prices
from .market import MarketInstance
from .reports import (
    Report,
    audit_report,
    check_report,
    dumps,
    meet_report,
    prices_report,
    solve_report,
    vcg_report,
    verify_report,
)
from .solver import solve_assignment
from .vcg import check_equivalence, vcg_prices
from .verification import (
    STRATEGY_CLASSES,
    audit_incentive,
    brute_force_optimum,
    verify_market_clearing,
    verify_prices,
)

_LOGGER = logging.getLogger(__name__)


class UsageError(MarketError, ValueError):
    """Command-line arguments do not fit the instance."""


@dataclass(frozen=True)
class RunConfig:
    """Options for one CLI invocation."""

    command: str
    input: Path
    fmt: str = FORMAT_JSON
    scale: int = DEFAULT_SCALE
    oracle_limit: int = DEFAULT_ORACLE_LIMIT
    seed: int = DEFAULT_SEED
    trials: int = DEFAULT_TRIALS
    output: Path | None = None
    init: str = INIT_ITEMS
    oracle: bool = False
    buyer_optimal: bool = True
    certificate: bool = False
    prices: Path | None = None
    other: Path | None = None
    bidder: str | None = None
    strategy: str = STRATEGY_ALL
    max_workers: int | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        """Build a config from parsed arguments, inferring the input format."""
        fmt = args.format
        if fmt is None:
            fmt = FORMAT_CSV if args.input.suffix.lower() == ".csv" else FORMAT_JSON
        scale = DEFAULT_SCALE if args.scale is None else args.scale
        if args.scale is not None and fmt == FORMAT_JSON:
            _LOGGER.warning("Ignoring --scale %d: JSON instances declare their own scale", scale)
        return cls(
            command=args.command,
            input=args.input,
            fmt=fmt,
            scale=scale,
            oracle_limit=args.oracle_limit,
            seed=getattr(args, "seed", DEFAULT_SEED),
            trials=getattr(args, "trials", DEFAULT_TRIALS),
            output=args.output,
            init=getattr(args, "init", INIT_ITEMS),
            oracle=getattr(args, "oracle", False),
            buyer_optimal=getattr(args, "buyer_optimal", True),
            certificate=getattr(args, "certificate", False),
            prices=getattr(args, "prices", None),
            other=getattr(args, "other", None),
            bidder=getattr(args, "bidder", None),
            strategy=getattr(args, "strategy", STRATEGY_ALL),
            max_workers=args.workers,
        )


def _require_oracle_size(instance: MarketInstance, limit: int) -> None:
    if instance.n > limit:
        raise OracleLimitError(
            f"instance has n = {instance.n} after padding; the brute-force oracle is "
            f"limited to {limit} (raise --oracle-limit to override)"
        )


def _read_prices(path: Path | None, instance: MarketInstance, flag: str) -> PriceDocument:
    if path is None:
        raise UsageError(f"{flag} is required")
    return load_prices(path.read_bytes(), instance)


def _solve(config: RunConfig, instance: MarketInstance) -> tuple[Report, bool]:
    oracle = None
    if config.oracle:
        _require_oracle_size(instance, config.oracle_limit)
        oracle = brute_force_optimum(instance, config.oracle_limit)
    matching, duals = solve_assignment(instance, init=config.init)
    ok = oracle is None or oracle[0] == matching.value
    return solve_report(instance, matching, duals, config.init, oracle), ok


def _prices(config: RunConfig, instance: MarketInstance) -> tuple[Report, bool]:
    if config.buyer_optimal:
        matching, duals = buyer_optimal_prices(instance, init=config.init)
    else:
        matching, duals = solve_assignment(instance, init=config.init)
        duals = normalize_prices(duals)
    certificate = check_buyer_optimal(instance, matching, duals)
    report = prices_report(
        instance, matching, duals, certificate, buyer_optimal=config.buyer_optimal
    )
    return report, True


def _vcg(config: RunConfig, instance: MarketInstance) -> tuple[Report, bool]:
    return vcg_report(instance, vcg_prices(instance, max_workers=config.max_workers)), True


def _check(config: RunConfig, instance: MarketInstance) -> tuple[Report, bool]:
    _require_oracle_size(instance, config.oracle_limit)
    oracle_value, _ = brute_force_optimum(instance, config.oracle_limit)
    equivalence = check_equivalence(instance, strict=False)
    certificate = None
    if config.certificate:
        matching, duals = buyer_optimal_prices(instance)
        certificate = check_buyer_optimal(instance, matching, duals)
    ok = bool(equivalence) and oracle_value == equivalence.optimum
    if oracle_value != equivalence.optimum:
        _LOGGER.warning(
            "Solver optimum %d differs from oracle %d", equivalence.optimum, oracle_value
        )
    return check_report(instance, equivalence, oracle_value, certificate), ok


def _verify(config: RunConfig, instance: MarketInstance) -> tuple[Report, bool]:
    document = _read_prices(config.prices, instance, "--prices")
    if document.matching is not None:
        verdict = verify_market_clearing(instance, document.matching, document.duals)
    else:
        verdict = verify_prices(instance, document.duals)
    return verify_report(instance, verdict), verdict.market_clearing


def _audit(config: RunConfig, instance: MarketInstance) -> tuple[Report, bool]:
    if config.bidder is None:
        raise UsageError("--bidder is required")
    if config.bidder not in instance.buyer_labels:
        raise UsageError(f"unknown bidder label {config.bidder!r}")
    bidder = instance.buyer_labels.index(config.bidder)
    audit = audit_incentive(
        instance,
        bidder,
        config.strategy,
        config.trials,
        config.seed,
        max_workers=config.max_workers,
        strict=False,
    )
    report = audit_report(
        instance, audit, strategy=config.strategy, trials=config.trials, seed=config.seed
    )
    return report, bool(audit)


def _meet(config: RunConfig, instance: MarketInstance) -> tuple[Report, bool]:
    first = _read_prices(config.prices, instance, "--prices")
    second = _read_prices(config.other, instance, "--other")
    return meet_report(instance, lattice_meet(instance, first.duals, second.duals)), True


COMMAND_HANDLERS: dict[str, Callable[[RunConfig, MarketInstance], tuple[Report, bool]]] = {
    COMMAND_SOLVE: _solve,
    COMMAND_PRICES: _prices,
    COMMAND_VCG: _vcg,
    COMMAND_CHECK: _check,
    COMMAND_VERIFY: _verify,
    COMMAND_AUDIT: _audit,
    COMMAND_MEET: _meet,
}


def _write(config: RunConfig, text: str) -> None:
    if config.output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        config.output.write_text(text, encoding="utf-8")


def run(config: RunConfig) -> int:
    """Execute one command and write its report.

    Args:
        config: Parsed options

    Returns:
        Exit status
    """
    try:
        instance = load_instance(config.input.read_bytes(), config.fmt, scale=config.scale)
        report, ok = COMMAND_HANDLERS[config.command](config, instance)
        text = dumps(report)
    except InvariantViolation:
        _LOGGER.exception("Internal invariant failed while running %s", config.command)
        return EXIT_VERDICT_FAILED
    except (OSError, ValueError) as err:
        _LOGGER.error("%s: %s", config.command, err)  # noqa: TRY400
        return EXIT_USAGE
    except MarketError:
        _LOGGER.exception("Unexpected failure while running %s", config.command)
        return EXIT_VERDICT_FAILED

    _write(config, text)
    _LOGGER.info("Wrote %s report (%s)", config.command, "pass" if ok else "fail")
    return EXIT_OK if ok else EXIT_VERDICT_FAILED


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per report."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", type=Path, help="Instance file (JSON or CSV)")
    common.add_argument(
        "--format", choices=FORMATS, default=None, help="Instance format (default: by suffix)"
    )
    common.add_argument(
        "--scale", type=int, default=None, help="Minor units per major unit (CSV only)"
    )
    common.add_argument(
        "--oracle-limit",
        type=int,
        default=DEFAULT_ORACLE_LIMIT,
        help="Largest n accepted by brute-force commands",
    )
    common.add_argument("--output", type=Path, default=None, help="Write the report here")
    common.add_argument("--workers", type=int, default=None, help="Thread pool size")
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug"
    )

    parser = argparse.ArgumentParser(
        prog="marketclear",
        description="Buyer-optimal market-clearing prices and VCG prices for matching markets",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser(
        COMMAND_SOLVE, parents=[common], help="Maximum matching and optimal duals"
    )
    solve.add_argument("--init", choices=SOLVER_INITS, default=INIT_ITEMS)
    solve.add_argument("--oracle", action="store_true", help="Cross-check by brute force")

    prices = commands.add_parser(
        COMMAND_PRICES, parents=[common], help="Market-clearing prices with certificate"
    )
    prices.add_argument("--init", choices=SOLVER_INITS, default=INIT_ITEMS)
    prices.add_argument(
        "--buyer-optimal",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="Reduce to buyer-optimal prices (default) or keep normalized solver prices",
    )

    commands.add_parser(COMMAND_VCG, parents=[common], help="VCG personalized prices")

    check = commands.add_parser(
        COMMAND_CHECK, parents=[common], help="Compare buyer-optimal and VCG prices"
    )
    check.add_argument("--certificate", action="store_true", help="Include the certificate")

    verify = commands.add_parser(
        COMMAND_VERIFY, parents=[common], help="Check whether supplied prices clear the market"
    )
    verify.add_argument("--prices", type=Path, required=True, help="Price document")

    audit = commands.add_parser(
        COMMAND_AUDIT, parents=[common], help="Search for profitable misreports"
    )
    audit.add_argument("--bidder", required=True, help="Buyer label to audit")
    audit.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    audit.add_argument("--seed", type=int, default=DEFAULT_SEED)
    audit.add_argument("--strategy", choices=sorted(STRATEGY_CLASSES), default=STRATEGY_ALL)

    meet = commands.add_parser(
        COMMAND_MEET, parents=[common], help="Componentwise minimum of two price vectors"
    )
    meet.add_argument("--prices", type=Path, required=True, help="First price document")
    meet.add_argument("--other", type=Path, required=True, help="Second price document")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Console entry point."""
    args = build_parser().parse_args(argv)
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    return run(RunConfig.from_args(args))


if __name__ == "__main__":
    sys.exit(main())
