"""Reading and writing market instances and price documents.

JSON instance format::

    {"scale": 100, "units": "major", "items": ["a", "b"], "buyers": ["x", "y"],
     "valuations": [[3.25, 1], [1, 2]]}

CSV format: the header row holds the buyer labels (first cell is ignored),
every other row starts with an item label followed by that item's
valuations. Rectangular inputs are padded to square on load.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from decimal import Decimal, Inexact, InvalidOperation, localcontext
from typing import IO, Any

import voluptuous as vol

from .const import (
    DEFAULT_SCALE,
    FORMAT_CSV,
    FORMAT_JSON,
    MAX_MINOR_UNITS,
    UNITS_MAJOR,
    UNITS_MINOR,
)
from .exceptions import (
    DimensionMismatchError,
    InstanceFormatError,
    NegativeValuationError,
)
from .market import DualSolution, MarketInstance, Matching, pad_to_square, profits_for_prices

_LOGGER = logging.getLogger(__name__)


def _number(value: Any) -> int | Decimal:
    """Accept JSON numbers, rejecting booleans."""
    if isinstance(value, bool) or not isinstance(value, (int, Decimal)):
        raise vol.Invalid(f"expected a number, got {value!r}")
    return value


def _integer(value: Any) -> int:
    """Accept JSON integers, rejecting booleans and fractions."""
    if isinstance(value, bool) or not isinstance(value, int):
        raise vol.Invalid(f"expected an integer, got {value!r}")
    return value


INSTANCE_SCHEMA = vol.Schema(
    {
        vol.Optional("scale", default=DEFAULT_SCALE): vol.All(_integer, vol.Range(min=1)),
        vol.Optional("units", default=UNITS_MAJOR): vol.In([UNITS_MAJOR, UNITS_MINOR]),
        vol.Required("items"): [str],
        vol.Required("buyers"): [str],
        vol.Required("valuations"): [[_number]],
    }
)

PRICE_SCHEMA = vol.Schema(
    {
        vol.Required("scale"): vol.All(_integer, vol.Range(min=1)),
        vol.Required("prices"): {str: _integer},
        vol.Optional("profits"): {str: _integer},
        vol.Optional("matching"): {str: str},
    },
    extra=vol.ALLOW_EXTRA,
)

# Price data embedded in solve/prices reports
REPORT_PRICE_SCHEMA = vol.Schema(
    {
        vol.Required("scale"): vol.All(_integer, vol.Range(min=1)),
        vol.Required("items"): [
            vol.Schema(
                {vol.Required("label"): str, vol.Required("price"): _integer},
                extra=vol.ALLOW_EXTRA,
            )
        ],
        vol.Optional("buyers"): [
            vol.Schema(
                {vol.Required("label"): str, vol.Required("profit"): _integer},
                extra=vol.ALLOW_EXTRA,
            )
        ],
        vol.Optional("matching"): [
            vol.Schema(
                {vol.Required("item"): str, vol.Required("buyer"): str},
                extra=vol.ALLOW_EXTRA,
            )
        ],
    },
    extra=vol.ALLOW_EXTRA,
)


@dataclass(frozen=True)
class PriceDocument:
    """Duals (and optionally a matching) read from a price document."""

    duals: DualSolution
    matching: Matching | None
    profits_supplied: bool


def _read_bytes(source: bytes | IO[bytes]) -> str:
    raw = source if isinstance(source, bytes) else source.read()
    try:
        return raw.decode("utf-8-sig")
    except UnicodeDecodeError as err:
        raise InstanceFormatError(f"input is not UTF-8: {err}") from err


def _to_minor(value: int | Decimal, scale: int, units: str, item: int, buyer: int) -> int:
    """Convert one valuation entry to integer minor units."""
    if isinstance(value, Decimal) and not value.is_finite():
        raise InstanceFormatError(f"valuation {value} at item {item}, buyer {buyer} is not finite")
    if value < 0:
        raise NegativeValuationError(item, buyer, value)
    if units == UNITS_MINOR:
        if not isinstance(value, int):
            raise InstanceFormatError(
                f"minor-unit valuation {value} at item {item}, buyer {buyer} is not an integer"
            )
        return value
    # Reject by magnitude before any arithmetic can overflow the decimal context
    if value > MAX_MINOR_UNITS:
        raise InstanceFormatError(
            f"valuation {value} at item {item}, buyer {buyer} exceeds {MAX_MINOR_UNITS}"
        )
    try:
        with localcontext() as context:
            context.traps[Inexact] = True
            scaled = Decimal(value) * scale
            exact = scaled == scaled.to_integral_value()
    except ArithmeticError as err:
        raise InstanceFormatError(
            f"valuation {value} at item {item}, buyer {buyer} cannot be scaled: {err!r}"
        ) from err
    if not exact:
        raise InstanceFormatError(
            f"valuation {value} at item {item}, buyer {buyer} is not representable "
            f"at scale {scale}"
        )
    if scaled > MAX_MINOR_UNITS:
        raise InstanceFormatError(
            f"valuation {value} at item {item}, buyer {buyer} exceeds {MAX_MINOR_UNITS} "
            f"minor units at scale {scale}"
        )
    return int(scaled)


def _build(
    items: list[str],
    buyers: list[str],
    matrix: list[list[int | Decimal]],
    scale: int,
    units: str,
) -> MarketInstance:
    if len(matrix) != len(items):
        raise DimensionMismatchError(
            f"{len(items)} item labels but {len(matrix)} valuation rows"
        )
    for i, row in enumerate(matrix):
        if len(row) != len(buyers):
            raise DimensionMismatchError(
                f"row {i} has {len(row)} entries for {len(buyers)} buyer labels"
            )
    minor = [
        [_to_minor(value, scale, units, i, j) for j, value in enumerate(row)]
        for i, row in enumerate(matrix)
    ]
    return pad_to_square(items, buyers, minor, scale=scale)


def _load_json(text: str) -> MarketInstance:
    try:
        data = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as err:
        raise InstanceFormatError(f"invalid JSON: {err}") from err
    try:
        data = INSTANCE_SCHEMA(data)
    except vol.Invalid as err:
        raise InstanceFormatError(f"invalid instance document: {err}") from err
    return _build(data["items"], data["buyers"], data["valuations"], data["scale"], data["units"])


def _load_csv(text: str, scale: int) -> MarketInstance:
    rows = [row for row in csv.reader(io.StringIO(text)) if any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise InstanceFormatError("CSV needs a header row and at least one item row")
    buyers = [cell.strip() for cell in rows[0][1:]]
    items: list[str] = []
    matrix: list[list[int | Decimal]] = []
    for line, row in enumerate(rows[1:], start=2):
        items.append(row[0].strip())
        try:
            matrix.append([Decimal(cell.strip()) for cell in row[1:]])
        except InvalidOperation as err:
            raise InstanceFormatError(f"non-numeric valuation on CSV line {line}") from err
    return _build(items, buyers, matrix, scale, UNITS_MAJOR)


def load_instance(
    source: bytes | IO[bytes],
    fmt: str = FORMAT_JSON,
    *,
    scale: int = DEFAULT_SCALE,
) -> MarketInstance:
    """Parse an instance and pad it to square.

    Args:
        source: Raw bytes or a binary stream
        fmt: "json" or "csv"
        scale: Minor units per major unit for CSV input (JSON declares its own)

    Returns:
        Square MarketInstance with labels and scale preserved

    Raises:
        InstanceFormatError: parse or schema failure
        NegativeValuationError: a valuation is negative
        DuplicateLabelError: repeated item or buyer label
        DimensionMismatchError: labels and matrix disagree
    """
    text = _read_bytes(source)
    if fmt == FORMAT_JSON:
        instance = _load_json(text)
    elif fmt == FORMAT_CSV:
        if scale < 1:
            raise InstanceFormatError(f"scale must be positive, got {scale}")
        instance = _load_csv(text, scale)
    else:
        raise InstanceFormatError(f"unknown instance format {fmt!r}")
    _LOGGER.debug(
        "Loaded %s instance: n=%d, %d dummy items, %d dummy buyers, scale %d",
        fmt,
        instance.n,
        len(instance.dummy_items),
        len(instance.dummy_buyers),
        instance.scale,
    )
    return instance


def serialize_instance(instance: MarketInstance) -> bytes:
    """Write the un-padded instance as minor-unit JSON.

    ``load_instance(serialize_instance(x)) == x`` for every loaded instance.
    """
    items = instance.real_items
    buyers = instance.real_buyers
    document = {
        "scale": instance.scale,
        "units": UNITS_MINOR,
        "items": [instance.item_labels[i] for i in items],
        "buyers": [instance.buyer_labels[j] for j in buyers],
        "valuations": [[instance.value(i, j) for j in buyers] for i in items],
    }
    return (json.dumps(document, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _flatten_report(data: dict[str, Any]) -> dict[str, Any]:
    """Turn the entity lists of a solve/prices report into a price document."""
    flat: dict[str, Any] = {
        "scale": data["scale"],
        "prices": {entry["label"]: entry["price"] for entry in data["items"]},
    }
    if "buyers" in data:
        flat["profits"] = {entry["label"]: entry["profit"] for entry in data["buyers"]}
    if "matching" in data:
        flat["matching"] = {pair["item"]: pair["buyer"] for pair in data["matching"]}
    return flat


def load_prices(source: bytes | IO[bytes], instance: MarketInstance) -> PriceDocument:
    """Read user-supplied prices for ``instance``.

    Accepts either ``{"scale", "prices": {item: int}, "profits"?, "matching"?}``
    or the report emitted by the ``solve``/``prices`` commands. Amounts are
    integer minor units. Dummy items default to price 0; missing profits are
    completed with each buyer's best response.

    Args:
        source: Raw bytes or a binary stream
        instance: Market the prices refer to

    Returns:
        PriceDocument with duals and the supplied matching, if any
    """
    text = _read_bytes(source)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise InstanceFormatError(f"invalid JSON: {err}") from err
    try:
        if isinstance(data, dict) and "prices" not in data and "items" in data:
            data = _flatten_report(REPORT_PRICE_SCHEMA(data))
        data = PRICE_SCHEMA(data)
    except vol.Invalid as err:
        raise InstanceFormatError(f"invalid price document: {err}") from err

    if data["scale"] != instance.scale:
        raise InstanceFormatError(
            f"price document scale {data['scale']} differs from instance scale {instance.scale}"
        )

    item_index = {label: i for i, label in enumerate(instance.item_labels)}
    buyer_index = {label: j for j, label in enumerate(instance.buyer_labels)}

    prices = [0] * instance.n
    for label, price in data["prices"].items():
        if label not in item_index:
            raise InstanceFormatError(f"unknown item label {label!r} in price document")
        prices[item_index[label]] = price
    missing = [
        instance.item_labels[i] for i in instance.real_items
        if instance.item_labels[i] not in data["prices"]
    ]
    if missing:
        raise InstanceFormatError(f"price document lacks prices for items {missing}")

    best = profits_for_prices(instance, prices)
    profits_supplied = "profits" in data
    profits = list(best.profits)
    if profits_supplied:
        for label, profit in data["profits"].items():
            if label not in buyer_index:
                raise InstanceFormatError(f"unknown buyer label {label!r} in price document")
            profits[buyer_index[label]] = profit
        missing = [
            instance.buyer_labels[j] for j in instance.real_buyers
            if instance.buyer_labels[j] not in data["profits"]
        ]
        if missing:
            raise InstanceFormatError(f"price document lacks profits for buyers {missing}")

    matching = None
    if "matching" in data:
        matching = _matching_from_labels(instance, data["matching"], item_index, buyer_index)

    return PriceDocument(
        duals=DualSolution(prices=tuple(prices), profits=tuple(profits)),
        matching=matching,
        profits_supplied=profits_supplied,
    )


def _matching_from_labels(
    instance: MarketInstance,
    pairs: dict[str, str],
    item_index: dict[str, int],
    buyer_index: dict[str, int],
) -> Matching:
    """Resolve a label matching; unlisted items take unused buyers in ascending order."""
    assignment: list[int | None] = [None] * instance.n
    for item_label, buyer_label in pairs.items():
        if item_label not in item_index or buyer_label not in buyer_index:
            raise InstanceFormatError(
                f"unknown label in matching pair {item_label!r} -> {buyer_label!r}"
            )
        assignment[item_index[item_label]] = buyer_index[buyer_label]
    unmatched_real = [
        instance.item_labels[i] for i in instance.real_items if assignment[i] is None
    ]
    if unmatched_real:
        raise InstanceFormatError(f"matching leaves items {unmatched_real} unassigned")
    used = {j for j in assignment if j is not None}
    spare = iter(j for j in range(instance.n) if j not in used)
    filled = [j if j is not None else next(spare, 0) for j in assignment]
    return Matching.from_assignment(instance, filled)
