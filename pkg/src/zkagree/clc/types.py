"""Value types shared by the data schema and the logic language."""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from typing import Any

from .errors import SchemaError

SCALAR_NAMES = ("Int", "Amount", "Bool", "String", "Bytes", "DateTime")

# decimal places per currency unit for amount literals such as "2 ETH"
UNITS = {"WEI": 0, "GWEI": 9, "ETH": 18, "USD": 2, "EUR": 2}


@dataclass(frozen=True)
class Ty:
    name: str
    variants: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.name == "Enum":
            return f"Enum[{', '.join(self.variants)}]"
        if self.name == "List":
            return f"List[{self.variants[0] if self.variants else '?'}]"
        return self.name


INT = Ty("Int")
BOOL = Ty("Bool")
STRING = Ty("String")
BYTES = Ty("Bytes")
DATETIME = Ty("DateTime")
PARTY = Ty("Party")
OUTCOME = Ty("Outcome")

_ENUM_RE = re.compile(r"^Enum\s*\[\s*([A-Za-z_][A-Za-z0-9_]*(?:\s*,\s*[A-Za-z_][A-Za-z0-9_]*)*)\s*\]$")


def parse_type(spec: str) -> Ty:
    """Parse a declared type name (``Amount`` is an alias of ``Int``)."""
    spec = str(spec).strip()
    if spec in ("Int", "Amount"):
        return INT
    if spec in SCALAR_NAMES:
        return Ty(spec)
    m = _ENUM_RE.match(spec)
    if m:
        variants = tuple(v.strip() for v in m.group(1).split(","))
        if len(set(variants)) != len(variants):
            raise SchemaError(f"duplicate enum variant in {spec!r}")
        return Ty("Enum", variants)
    raise SchemaError(f"unknown type {spec!r}")


def normalize_type_name(spec: str) -> str:
    spec = str(spec).strip()
    ty = parse_type(spec)
    if ty.name == "Enum":
        return str(ty)
    return spec


def compatible(a: Ty, b: Ty) -> bool:
    if a.name == "Enum" and b.name == "Enum":
        return set(a.variants) <= set(b.variants) or set(b.variants) <= set(a.variants)
    return a == b


def join(a: Ty, b: Ty) -> Ty | None:
    if a.name == "Enum" and b.name == "Enum":
        return Ty("Enum", tuple(dict.fromkeys(a.variants + b.variants)))
    return a if a == b else None


def parse_amount(raw: Any) -> int:
    """Integer base units from an int, a digit string, or ``"<decimal> <UNIT>"``."""
    if isinstance(raw, bool):
        raise SchemaError(f"not an amount: {raw!r}")
    if isinstance(raw, int):
        return raw
    text = str(raw).strip().replace("_", "")
    parts = text.split()
    if len(parts) == 1 and parts[0].lstrip("-").isdigit():
        return int(parts[0])
    if len(parts) != 2 or parts[1].upper() not in UNITS:
        raise SchemaError(f"cannot parse amount {raw!r}")
    places = UNITS[parts[1].upper()]
    try:
        scaled = Decimal(parts[0]).scaleb(places)
    except InvalidOperation as exc:
        raise SchemaError(f"cannot parse amount {raw!r}") from exc
    if scaled != scaled.to_integral_value():
        raise SchemaError(f"amount {raw!r} is finer than the unit's base precision")
    return int(scaled)


def normalize_datetime(raw: Any) -> str:
    """ISO-8601 timestamp normalized to ``YYYY-MM-DDTHH:MM:SSZ`` (UTC)."""
    if isinstance(raw, datetime):
        dt = raw
    else:
        text = str(raw).strip()
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        try:
            dt = datetime.fromisoformat(text)
        except ValueError as exc:
            raise SchemaError(f"bad DateTime {raw!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def epoch_seconds(text: str) -> int:
    return int(datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc).timestamp())


def coerce_value(type_name: str, raw: Any) -> Any:
    """Validate ``raw`` against a declared type and return its stored form.

    Stored forms: Int/Amount -> int, Bool -> bool, String -> str,
    Bytes -> bytes, DateTime -> normalized ISO string, Enum -> variant str.
    """
    ty = parse_type(type_name)
    if type_name.strip() == "Amount":
        return parse_amount(raw)
    if ty == INT:
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise SchemaError(f"expected Int, got {raw!r}")
        return raw
    if ty == BOOL:
        if not isinstance(raw, bool):
            raise SchemaError(f"expected Bool, got {raw!r}")
        return raw
    if ty == STRING:
        if not isinstance(raw, str):
            raise SchemaError(f"expected String, got {raw!r}")
        return raw
    if ty == BYTES:
        if isinstance(raw, (bytes, bytearray)):
            return bytes(raw)
        if isinstance(raw, str):
            text = raw[2:] if raw.startswith("0x") else raw
            try:
                return bytes.fromhex(text)
            except ValueError as exc:
                raise SchemaError(f"expected hex Bytes, got {raw!r}") from exc
        raise SchemaError(f"expected Bytes, got {raw!r}")
    if ty == DATETIME:
        return normalize_datetime(raw)
    if ty.name == "Enum":
        if raw not in ty.variants:
            raise SchemaError(f"expected one of {ty.variants}, got {raw!r}")
        return raw
    raise SchemaError(f"unsupported type {type_name!r}")  # pragma: no cover


def to_json_value(type_name: str, value: Any) -> Any:
    if parse_type(type_name) == BYTES:
        return value.hex()
    return value


def runtime_value(type_name: str, stored: Any) -> Any:
    """Value as seen by the logic evaluator (DateTime becomes epoch seconds)."""
    if parse_type(type_name) == DATETIME:
        return epoch_seconds(stored)
    return stored
