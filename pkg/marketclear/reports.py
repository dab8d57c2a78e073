"""JSON reports emitted by the command-line interface.

Every amount is an integer in minor units next to the instance ``scale``.
Entities are identified by label; padding entities carry ``"dummy": true``.
Reports are validated against the schemas below before they are written.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from typing import Any

import voluptuous as vol

from .buyer_optimal import OptimalityCertificate
from .const import (
    COMMAND_AUDIT,
    COMMAND_CHECK,
    COMMAND_MEET,
    COMMAND_PRICES,
    COMMAND_SOLVE,
    COMMAND_VCG,
    COMMAND_VERIFY,
)
from .exceptions import InvariantViolation
from .market import DualSolution, MarketInstance, Matching, Money
from .vcg import EquivalenceReport, VcgReport
from .verification.audit import AuditReport
from .verification.clearing import CHECKS, ClearingVerdict

_LOGGER = logging.getLogger(__name__)

Report = dict[str, Any]


def _int(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise vol.Invalid(f"expected an integer, got {value!r}")
    return value


_ITEM = vol.Schema({"label": str, "dummy": bool, vol.Optional("price"): _int})
_BUYER = vol.Schema({"label": str, "dummy": bool, vol.Optional("profit"): _int})
_PAIR = vol.Schema({"item": str, "buyer": str, "value": _int})
_EDGE = vol.Schema({"item": str, "buyer": str})

_CERTIFICATE = vol.Schema(
    {
        "buyer_optimal": bool,
        "paths": [{"buyer": str, "zero_item": str, "sequence": [str], "edges": [_EDGE]}],
        "violation": vol.Any(None, {"buyer": str, "reach": [str], "min_price": _int}),
    }
)

_BASE = {"command": str, "scale": vol.All(_int, vol.Range(min=1)), "n": _int}

REPORT_SCHEMAS: dict[str, vol.Schema] = {
    COMMAND_SOLVE: vol.Schema(
        {
            **_BASE,
            "init": str,
            "value": _int,
            "items": [_ITEM],
            "buyers": [_BUYER],
            "matching": [_PAIR],
            vol.Optional("oracle"): {"value": _int, "agrees": bool, "matching": [_PAIR]},
        }
    ),
    COMMAND_PRICES: vol.Schema(
        {
            **_BASE,
            "buyer_optimal": bool,
            "value": _int,
            "items": [_ITEM],
            "buyers": [_BUYER],
            "matching": [_PAIR],
            "certificate": _CERTIFICATE,
        }
    ),
    COMMAND_VCG: vol.Schema(
        {
            **_BASE,
            "value": _int,
            "items": [_ITEM],
            "entries": [
                {
                    "item": str,
                    "buyer": str,
                    "value": _int,
                    "v_minus_j": _int,
                    "v_minus_j_minus_i": _int,
                    "price": _int,
                    "utility": _int,
                    "dummy_buyer": bool,
                }
            ],
        }
    ),
    COMMAND_CHECK: vol.Schema(
        {
            **_BASE,
            "equivalent": bool,
            "value": _int,
            "oracle_value": _int,
            "prices": [_int],
            "items": [
                {"label": str, "dummy": bool, "buyer_optimal_price": _int, "vcg_price": _int}
            ],
            "mismatched_items": [str],
            "alternate_matching": vol.Any(None, [_PAIR]),
            "alternate_agrees": bool,
            "profit_identity_holds": bool,
            "vcg_prices_clear_market": bool,
            vol.Optional("certificate"): _CERTIFICATE,
        }
    ),
    COMMAND_VERIFY: vol.Schema(
        {
            **_BASE,
            "market_clearing": bool,
            "failed_checks": [vol.In(CHECKS)],
            "failures": [
                {
                    "check": vol.In(CHECKS),
                    "message": str,
                    "item": vol.Any(None, str),
                    "buyer": vol.Any(None, str),
                }
            ],
            "items": [_ITEM],
            "buyers": [_BUYER],
            "matching": [_PAIR],
        }
    ),
    COMMAND_AUDIT: vol.Schema(
        {
            **_BASE,
            "bidder": str,
            "strategy": str,
            "trials": _int,
            "seed": _int,
            "incentive_compatible": bool,
            "truthful": {"item": str, "price": _int, "utility": _int},
            "deviation_count": _int,
            "max_utility_delta": _int,
            "deviations": [
                {
                    "misreport": [_int],
                    "item": str,
                    "price": _int,
                    "utility": _int,
                    "utility_delta": _int,
                }
            ],
        }
    ),
    COMMAND_MEET: vol.Schema(
        {
            **_BASE,
            "market_clearing": bool,
            "items": [_ITEM],
            "buyers": [_BUYER],
        }
    ),
}


def _base(command: str, instance: MarketInstance) -> Report:
    return {"command": command, "scale": instance.scale, "n": instance.n}


def item_entries(
    instance: MarketInstance, prices: Sequence[Money] | None = None
) -> list[dict[str, Any]]:
    """Item labels with dummy flags and, optionally, prices."""
    entries = []
    for i, label in enumerate(instance.item_labels):
        entry: dict[str, Any] = {"label": label, "dummy": i in instance.dummy_items}
        if prices is not None:
            entry["price"] = prices[i]
        entries.append(entry)
    return entries


def buyer_entries(
    instance: MarketInstance, profits: Sequence[Money] | None = None
) -> list[dict[str, Any]]:
    """Buyer labels with dummy flags and, optionally, profits."""
    entries = []
    for j, label in enumerate(instance.buyer_labels):
        entry: dict[str, Any] = {"label": label, "dummy": j in instance.dummy_buyers}
        if profits is not None:
            entry["profit"] = profits[j]
        entries.append(entry)
    return entries


def matching_entries(instance: MarketInstance, matching: Matching) -> list[dict[str, Any]]:
    """Matched pairs by label, in item order."""
    return [
        {
            "item": instance.item_labels[i],
            "buyer": instance.buyer_labels[j],
            "value": instance.value(i, j),
        }
        for i, j in matching.pairs
    ]


def certificate_entry(
    instance: MarketInstance, certificate: OptimalityCertificate
) -> dict[str, Any]:
    """Certified paths (by buyer) or the violating buyer."""
    items = instance.item_labels
    buyers = instance.buyer_labels
    violation = None
    if certificate.violation is not None:
        violation = {
            "buyer": buyers[certificate.violation.buyer],
            "reach": [items[i] for i in certificate.violation.reach],
            "min_price": certificate.violation.min_price,
        }
    return {
        "buyer_optimal": bool(certificate),
        "paths": [
            {
                "buyer": buyers[buyer],
                "zero_item": items[path.zero_item],
                "sequence": [
                    items[index] if kind == "item" else buyers[index]
                    for kind, index in path.nodes
                ],
                "edges": [{"item": items[i], "buyer": buyers[j]} for i, j in path.edges],
            }
            for buyer, path in sorted(certificate.paths.items())
        ],
        "violation": violation,
    }


def solve_report(
    instance: MarketInstance,
    matching: Matching,
    duals: DualSolution,
    init: str,
    oracle: tuple[Money, Matching] | None = None,
) -> Report:
    """Maximum matching with its optimal duals, optionally checked by brute force."""
    report = {
        **_base(COMMAND_SOLVE, instance),
        "init": init,
        "value": matching.value,
        "items": item_entries(instance, duals.prices),
        "buyers": buyer_entries(instance, duals.profits),
        "matching": matching_entries(instance, matching),
    }
    if oracle is not None:
        value, oracle_matching = oracle
        report["oracle"] = {
            "value": value,
            "agrees": value == matching.value,
            "matching": matching_entries(instance, oracle_matching),
        }
    return report


def prices_report(
    instance: MarketInstance,
    matching: Matching,
    duals: DualSolution,
    certificate: OptimalityCertificate,
    *,
    buyer_optimal: bool,
) -> Report:
    """Market-clearing prices and the buyer-optimality certificate."""
    return {
        **_base(COMMAND_PRICES, instance),
        "buyer_optimal": buyer_optimal,
        "value": matching.value,
        "items": item_entries(instance, duals.prices),
        "buyers": buyer_entries(instance, duals.profits),
        "matching": matching_entries(instance, matching),
        "certificate": certificate_entry(instance, certificate),
    }


def vcg_report(instance: MarketInstance, report: VcgReport) -> Report:
    """Personalized VCG prices, one entry per matched pair."""
    return {
        **_base(COMMAND_VCG, instance),
        "value": report.optimum,
        "items": item_entries(instance, report.prices),
        "entries": [
            {
                "item": instance.item_labels[entry.item],
                "buyer": instance.buyer_labels[entry.buyer],
                "value": entry.value,
                "v_minus_j": entry.v_minus_j,
                "v_minus_j_minus_i": entry.v_minus_j_minus_i,
                "price": entry.personalized_price,
                "utility": entry.buyer_utility,
                "dummy_buyer": entry.dummy_buyer,
            }
            for entry in report.entries
        ],
    }


def check_report(
    instance: MarketInstance,
    equivalence: EquivalenceReport,
    oracle_value: Money,
    certificate: OptimalityCertificate | None = None,
) -> Report:
    """Buyer-optimal against VCG prices, item by item."""
    report = {
        **_base(COMMAND_CHECK, instance),
        "equivalent": equivalence.equivalent,
        "value": equivalence.optimum,
        "oracle_value": oracle_value,
        "prices": list(equivalence.buyer_optimal_prices),
        "items": [
            {
                "label": label,
                "dummy": i in instance.dummy_items,
                "buyer_optimal_price": equivalence.buyer_optimal_prices[i],
                "vcg_price": equivalence.vcg_prices[i],
            }
            for i, label in enumerate(instance.item_labels)
        ],
        "mismatched_items": [instance.item_labels[i] for i in equivalence.mismatched_items],
        "alternate_matching": (
            None
            if equivalence.alternate_matching is None
            else matching_entries(instance, equivalence.alternate_matching)
        ),
        "alternate_agrees": equivalence.alternate_agrees,
        "profit_identity_holds": equivalence.profit_identity_holds,
        "vcg_prices_clear_market": equivalence.vcg_prices_clear_market,
    }
    if certificate is not None:
        report["certificate"] = certificate_entry(instance, certificate)
    return report


def verify_report(instance: MarketInstance, verdict: ClearingVerdict) -> Report:
    """Market-clearing verdict with every failed check."""

    def _label(labels: Sequence[str], index: int | None) -> str | None:
        return None if index is None else labels[index]

    return {
        **_base(COMMAND_VERIFY, instance),
        "market_clearing": verdict.market_clearing,
        "failed_checks": list(verdict.failed_checks),
        "failures": [
            {
                "check": failure.check,
                "message": failure.message,
                "item": _label(instance.item_labels, failure.item),
                "buyer": _label(instance.buyer_labels, failure.buyer),
            }
            for failure in verdict.failures
        ],
        "items": item_entries(instance, verdict.duals.prices),
        "buyers": buyer_entries(instance, verdict.duals.profits),
        "matching": matching_entries(instance, verdict.matching),
    }


def audit_report(
    instance: MarketInstance,
    audit: AuditReport,
    *,
    strategy: str,
    trials: int,
    seed: int,
) -> Report:
    """Truthful outcome and every deviation tried."""
    items = instance.item_labels
    truthful = audit.truthful_outcome
    return {
        **_base(COMMAND_AUDIT, instance),
        "bidder": instance.buyer_labels[audit.bidder],
        "strategy": strategy,
        "trials": trials,
        "seed": seed,
        "incentive_compatible": bool(audit),
        "truthful": {
            "item": items[truthful.item],
            "price": truthful.price,
            "utility": truthful.utility,
        },
        "deviation_count": len(audit.deviations),
        "max_utility_delta": audit.max_utility_delta,
        "deviations": [
            {
                "misreport": list(d.misreport),
                "item": items[d.item],
                "price": d.price,
                "utility": d.utility,
                "utility_delta": d.utility_delta,
            }
            for d in audit.deviations
        ],
    }


def meet_report(instance: MarketInstance, meet: DualSolution) -> Report:
    """Componentwise minimum of two market-clearing price vectors."""
    return {
        **_base(COMMAND_MEET, instance),
        "market_clearing": True,
        "items": item_entries(instance, meet.prices),
        "buyers": buyer_entries(instance, meet.profits),
    }


def validate_report(report: Report) -> Report:
    """Check a report against the schema of its command.

    Raises:
        InvariantViolation: if the report does not match its schema
    """
    schema = REPORT_SCHEMAS[report["command"]]
    try:
        return schema(report)
    except vol.Invalid as err:
        raise InvariantViolation(f"{report['command']} report breaks its schema: {err}") from err


def dumps(report: Report) -> str:
    """Serialize a validated report deterministically."""
    return json.dumps(validate_report(report), indent=2, sort_keys=True) + "\n"
