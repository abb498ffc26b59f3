"""Built-in functions: hood folds, multiplexing, lifted operators, geometry.

Pointwise lifting: when any argument of a value-level builtin is a
neighbouring value, the remaining local arguments are promoted to constant
fields over the same entries and the operator applies entrywise. Lifting two
fields restricts to the intersection of their entry domains; the self entry
is always present because every field carries one.

Two fold families are exposed: ``minHood``/``maxHood``/``sumHood``/
``anyHood``/``allHood`` fold over the neighbours only, and the
``...PlusSelf`` variants include the device's own entry. On an empty
post-exclusion domain: sum is 0, any is False, all is True, min/max fall
back to the self entry. Ties in min/max go to the smallest device id.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import FcError
from .values import (
    Constructor, DeviceId, LocalValue, NeighbouringValue, Value, compare,
    equal, vec2,
)


class BuiltinError(FcError):
    """Raised by builtin implementations; the evaluator adds the path."""

    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(message)


def _type_error(message: str) -> BuiltinError:
    return BuiltinError("type-error", message)


def _as_number(v) -> float:
    if isinstance(v, bool):
        raise _type_error("expected a number, got a boolean")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, DeviceId):
        return float(v.id)
    raise _type_error(f"expected a number, got {v!r}")


def _as_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    raise _type_error(f"expected a boolean, got {v!r}")


def _num2(fn):
    return lambda a: fn(_as_number(a[0]), _as_number(a[1]))


def _div(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0:
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


def _mod(a: float, b: float) -> float:
    if b == 0.0:
        return math.nan
    return a % b


def _neg(args):
    v = args[0]
    if isinstance(v, Constructor) and v.name == "Vec2" and len(v.args) == 2:
        return vec2(-_as_number(v.args[0]), -_as_number(v.args[1]))
    return -_as_number(v)


def _cmp_op(rel):
    def op(args):
        return rel(compare(args[0], args[1]))

    return op


def _min2(args):
    return args[1] if compare(args[1], args[0]) < 0 else args[0]


def _max2(args):
    return args[1] if compare(args[1], args[0]) > 0 else args[0]


def _mux(args):
    return args[1] if _as_bool(args[0]) else args[2]


def _vec_components(v, what: str) -> tuple[float, float]:
    if isinstance(v, Constructor) and v.name == "Vec2" and len(v.args) == 2:
        return _as_number(v.args[0]), _as_number(v.args[1])
    raise _type_error(f"{what} expects a Vec2, got {v!r}")


def angle_degrees(u, v) -> float:
    """Signed angle from u to v in degrees, in (-180, 180].

    Zero vectors yield 0 (the atan2 convention); this keeps pointwise
    lifting over nbrVector() total at the self entry.
    """
    ux, uy = _vec_components(u, "angle")
    vx, vy = _vec_components(v, "angle")
    cross = ux * vy - uy * vx
    dot = ux * vx + uy * vy
    if (ux == 0.0 and uy == 0.0) or (vx == 0.0 and vy == 0.0):
        return 0.0
    a = math.degrees(math.atan2(cross, dot))
    if a <= -180.0:
        a = 180.0
    return a


def _tuple_get(t, k: int):
    if not (isinstance(t, Constructor) and t.name == "Tuple"):
        raise _type_error(f"projection expects a tuple, got {t!r}")
    if not 1 <= k <= len(t.args):
        raise _type_error(f"projection index {k} out of range for {len(t.args)}-tuple")
    return t.args[k - 1]


def _nth(args):
    idx = _as_number(args[1])
    if not float(idx).is_integer():
        raise _type_error("nth expects an integral index")
    return _tuple_get(args[0], int(idx))


_ORDINAL = re.compile(r"^([0-9]+)(st|nd|rd|th)$")

_PURE: dict[str, tuple[int, object]] = {
    "+": (2, _num2(lambda a, b: a + b)),
    "*": (2, _num2(lambda a, b: a * b)),
    "/": (2, _num2(_div)),
    "%": (2, _num2(_mod)),
    "==": (2, lambda a: equal(a[0], a[1])),
    "!=": (2, lambda a: not equal(a[0], a[1])),
    "<": (2, _cmp_op(lambda c: c < 0)),
    "<=": (2, _cmp_op(lambda c: c <= 0)),
    ">": (2, _cmp_op(lambda c: c > 0)),
    ">=": (2, _cmp_op(lambda c: c >= 0)),
    "&&": (2, lambda a: _as_bool(a[0]) and _as_bool(a[1])),
    "||": (2, lambda a: _as_bool(a[0]) or _as_bool(a[1])),
    "!": (1, lambda a: not _as_bool(a[0])),
    "mux": (3, _mux),
    "min": (2, _min2),
    "max": (2, _max2),
    "angle": (2, lambda a: angle_degrees(a[0], a[1])),
    "nth": (2, _nth),
}


def _sub(args):
    if len(args) == 1:
        return _neg(args)
    return _as_number(args[0]) - _as_number(args[1])


def lookup_pure(name: str, nargs: int):
    """Pure liftable builtin for ``name``, or None. Raises on bad arity."""
    if name == "-":
        if nargs not in (1, 2):
            raise BuiltinError("arity", f"'-' takes 1 or 2 arguments, got {nargs}")
        return _sub
    entry = _PURE.get(name)
    if entry is not None:
        arity, fn = entry
        if nargs != arity:
            raise BuiltinError("arity", f"{name!r} takes {arity} argument(s), got {nargs}")
        return fn
    m = _ORDINAL.match(name)
    if m:
        if nargs != 1:
            raise BuiltinError("arity", f"{name!r} takes 1 argument, got {nargs}")
        k = int(m.group(1))
        return lambda a: _tuple_get(a[0], k)
    return None


def apply_lifted(fn, args: list[Value], self_id: int) -> Value:
    """Apply ``fn`` with pointwise lifting over neighbouring-value arguments."""
    fields = [a for a in args if isinstance(a, NeighbouringValue)]
    if not fields:
        return fn(args)
    ids = set(fields[0].entries)
    for f in fields[1:]:
        ids &= set(f.entries)
    out = {}
    for i in sorted(ids):
        row = [a.entries[i] if isinstance(a, NeighbouringValue) else a for a in args]
        out[i] = fn(row)
    return NeighbouringValue(self_id, out)


def make_constructor(name: str):
    def build(args):
        for a in args:
            if isinstance(a, NeighbouringValue):
                raise _type_error("constructor arguments must be local values")
        return Constructor(name, tuple(args))

    return build


# Hood folds.

FOLD_NAMES = {
    "minHood": ("min", False), "maxHood": ("max", False), "sumHood": ("sum", False),
    "anyHood": ("any", False), "allHood": ("all", False),
    "minHoodPlusSelf": ("min", True), "maxHoodPlusSelf": ("max", True),
    "sumHoodPlusSelf": ("sum", True), "anyHoodPlusSelf": ("any", True),
    "allHoodPlusSelf": ("all", True),
}


def hood_fold(kind: str, include_self: bool, phi: NeighbouringValue) -> LocalValue:
    if not isinstance(phi, NeighbouringValue):
        raise _type_error(f"hood fold expects a neighbouring value, got {phi!r}")
    skip = None if include_self else phi.self_id
    if kind == "sum":
        return sum(_as_number(v) for d, v in phi.entries.items() if d != skip)
    if kind == "any":
        return any(_as_bool(v) for d, v in phi.entries.items() if d != skip)
    if kind == "all":
        return all(_as_bool(v) for d, v in phi.entries.items() if d != skip)
    best = None
    # entries iterate in ascending id order, so ties keep the smallest id
    for d, v in phi.entries.items():
        if d == skip:
            continue
        if best is None:
            best = v
        else:
            c = compare(v, best)
            if (kind == "min" and c < 0) or (kind == "max" and c > 0):
                best = v
    return phi.entries[phi.self_id] if best is None else best


# Sensors.

@dataclass
class SensorDecl:
    """A named sensor with a per-device value timeline.

    ``kind`` is "local" (values are local values) or "neighbouring" (values
    are device-id -> local-value maps rendered as neighbouring values at
    read time). Timeline times must be strictly increasing per device.
    """

    name: str
    kind: str = "local"
    timelines: dict[int, list[tuple[float, object]]] = field(default_factory=dict)

    def value_at(self, device: int, t: float):
        timeline = self.timelines.get(device, [])
        current = None
        found = False
        for when, value in timeline:
            if when <= t:
                current, found = value, True
            else:
                break
        if not found:
            raise FcError(f"sensor {self.name!r} has no value for device {device} at {t}")
        return current

    def change_times(self) -> list[tuple[float, int, object]]:
        out = []
        for device, timeline in self.timelines.items():
            for when, value in timeline:
                if when > 0:
                    out.append((when, device, value))
        return sorted(out)


def sense(ctx, name: str) -> Value:
    """Current value of a declared sensor from a round context snapshot."""
    try:
        return ctx.sensors[name]
    except KeyError:
        raise BuiltinError("unknown-sensor", f"sensor {name!r} is not declared") from None


def nbr_vector(self_id: int, positions) -> NeighbouringValue:
    """Displacement vectors from self to each current neighbour (self: zero)."""
    sx, sy = positions[self_id]
    entries = {}
    for d in sorted(positions):
        px, py = positions[d]
        entries[d] = vec2(px - sx, py - sy)
    entries[self_id] = vec2(0.0, 0.0)
    return NeighbouringValue(self_id, entries)


BUILTIN_NAMES = (
    set(_PURE) | set(FOLD_NAMES) | {"-", "nth", "myID", "nbrVector"}
)


def is_builtin_name(name: str) -> bool:
    return name in BUILTIN_NAMES or bool(_ORDINAL.match(name))
