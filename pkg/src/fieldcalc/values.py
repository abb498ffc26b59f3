"""Runtime value model: local values, neighbouring values, comparison and equality.

Local values are plain Python data where possible: numbers are floats (IEEE
doubles, infinities included), booleans are bools, strings are strs, the null
constructor is None. Device identifiers and constructor trees get their own
small types. Neighbouring values map device ids to local values and always
carry the device's own entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import FcError


@dataclass(frozen=True, slots=True)
class DeviceId:
    """Identifier of a device, ordered by its integer id."""

    id: int

    def __repr__(self) -> str:
        return f"DeviceId({self.id})"


@dataclass(frozen=True, slots=True)
class Constructor:
    """A data-constructor value, e.g. Tuple(1, 2) or HIGH."""

    name: str
    args: tuple["LocalValue", ...] = ()

    def __repr__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(map(repr, self.args))})"


LocalValue = Union[float, bool, str, None, DeviceId, Constructor]


def tuple_value(*args: LocalValue) -> Constructor:
    return Constructor("Tuple", tuple(args))


def vec2(x: float, y: float) -> Constructor:
    return Constructor("Vec2", (float(x), float(y)))


def is_local(v: object) -> bool:
    return not isinstance(v, NeighbouringValue)


class NeighbouringValue:
    """Map from device id to local value; the self entry is always present.

    Entries are kept sorted by device id so that iteration order (and hence
    every fold and trace rendering) is deterministic.
    """

    __slots__ = ("entries", "self_id")

    def __init__(self, self_id: int, entries: dict[int, LocalValue]):
        if self_id not in entries:
            raise FcError("neighbouring value is missing its self entry")
        self.self_id = self_id
        self.entries = {k: entries[k] for k in sorted(entries)}

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, NeighbouringValue)
            and self.self_id == other.self_id
            and self.entries == other.entries
        )

    def __hash__(self):  # pragma: no cover - fields are mutable dicts
        raise TypeError("NeighbouringValue is not hashable")

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v!r}" for k, v in self.entries.items())
        return f"phi{{{body}; self={self.self_id}}}"

    def others(self) -> dict[int, LocalValue]:
        """Entries without the self entry."""
        return {k: v for k, v in self.entries.items() if k != self.self_id}


Value = Union[LocalValue, NeighbouringValue]


class IncomparableError(FcError):
    """Raised when compare() is applied across value kinds."""


def _kind(v: LocalValue) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, (int, float)):
        return "number"
    if isinstance(v, str):
        return "string"
    if v is None:
        return "null"
    if isinstance(v, DeviceId):
        return "device"
    if isinstance(v, Constructor):
        return "constructor"
    raise FcError(f"not a field-calculus value: {v!r}")


def compare(a: LocalValue, b: LocalValue) -> int:
    """Total order within each comparable class; returns -1, 0 or 1.

    Numbers (with infinities) order as IEEE doubles, False < True, strings
    lexicographically, device ids by integer, same-name same-arity
    constructors lexicographically over their arguments. Anything else is
    incomparable.
    """
    ka, kb = _kind(a), _kind(b)
    if ka != kb:
        raise IncomparableError(f"cannot compare {ka} with {kb}")
    if ka == "number":
        if math.isnan(a) or math.isnan(b):
            raise IncomparableError("nan is not comparable")
        return (a > b) - (a < b)
    if ka in ("bool", "string"):
        return (a > b) - (a < b)
    if ka == "null":
        return 0
    if ka == "device":
        return (a.id > b.id) - (a.id < b.id)
    if a.name != b.name or len(a.args) != len(b.args):
        raise IncomparableError(
            f"cannot compare constructors {a.name}/{len(a.args)} and {b.name}/{len(b.args)}"
        )
    for x, y in zip(a.args, b.args):
        c = compare(x, y)
        if c != 0:
            return c
    return 0


def equal(a: Value, b: Value) -> bool:
    """Structural equality across all value kinds (never raises)."""
    if isinstance(a, NeighbouringValue) or isinstance(b, NeighbouringValue):
        return (
            isinstance(a, NeighbouringValue)
            and isinstance(b, NeighbouringValue)
            and a == b
        )
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return a == b or (math.isnan(a) and math.isnan(b))
    if isinstance(a, Constructor) and isinstance(b, Constructor):
        return (
            a.name == b.name
            and len(a.args) == len(b.args)
            and all(equal(x, y) for x, y in zip(a.args, b.args))
        )
    if type(a) is not type(b):
        return False
    return a == b


def encode_value(v: Value) -> str:
    """Stable single-line text encoding used in traces and reports."""
    if isinstance(v, NeighbouringValue):
        body = ", ".join(f"@{k}:{encode_value(x)}" for k, x in v.entries.items())
        return f"phi{{{body}; self=@{v.self_id}}}"
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, (int, float)):
        f = float(v)
        if math.isinf(f):
            return "infinity" if f > 0 else "-infinity"
        if math.isnan(f):
            return "nan"
        if f.is_integer() and abs(f) < 2**53:
            return str(int(f))
        return repr(f)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if v is None:
        return "Null"
    if isinstance(v, DeviceId):
        return f"@{v.id}"
    if isinstance(v, Constructor):
        if v.name == "Tuple":
            return "[" + ", ".join(encode_value(x) for x in v.args) + "]"
        if not v.args:
            return v.name
        return v.name + "(" + ", ".join(encode_value(x) for x in v.args) + ")"
    raise FcError(f"not a field-calculus value: {v!r}")
