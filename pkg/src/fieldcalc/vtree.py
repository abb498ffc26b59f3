"""Value trees: the per-round structure of sub-expression results.

A ValueTree mirrors one round's evaluation. Children are keyed by path steps:

* ``int`` child index for ordinary sub-expressions (call arguments, nbr and
  rep bodies, if conditions),
* ``"T"`` / ``"E"`` for the taken branch of an ``if`` (the untaken branch
  contributes nothing, and a mismatching tag makes lookups absent),
* ``("f", name, site)`` for the body of a user-function call, keyed by the
  function name and the call-site index, so distinct call sites and distinct
  recursion depths never share state.

A Path is a tuple of such steps; it addresses at most one node.
"""

from __future__ import annotations

import json
import math
from typing import Iterator, Optional, Union

from .errors import FcError
from .values import Constructor, DeviceId, NeighbouringValue, Value

Step = Union[int, str, tuple]
Path = tuple

BRANCH_THEN = "T"
BRANCH_ELSE = "E"


class _Absent:
    """Marks a path with no node; distinct from the Null value (None)."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "ABSENT"

    def __bool__(self) -> bool:
        return False


ABSENT = _Absent()


def frame_step(fname: str, site: int) -> tuple:
    return ("f", fname, site)


class ValueTree:
    """One evaluated sub-expression: its value plus child subtrees."""

    __slots__ = ("value", "kids")

    def __init__(self, value: Value, kids: Optional[dict] = None):
        self.value = value
        self.kids = kids if kids is not None else {}

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ValueTree)
            and _values_eq(self.value, other.value)
            and self.kids == other.kids
        )

    def __hash__(self):  # pragma: no cover
        raise TypeError("ValueTree is not hashable")

    def __repr__(self) -> str:
        return f"ValueTree({self.value!r}, kids={list(self.kids)})"

    def child(self, step: Step) -> Optional["ValueTree"]:
        return self.kids.get(step)

    def size(self) -> int:
        return 1 + sum(k.size() for k in self.kids.values())

    def walk(self) -> Iterator[tuple[Path, "ValueTree"]]:
        stack = [((), self)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for step, kid in node.kids.items():
                stack.append((path + (step,), kid))


def _values_eq(a: Value, b: Value) -> bool:
    from .values import equal

    return equal(a, b)


def vt_lookup(tree: Optional[ValueTree], path: Path):
    """Value at ``path`` in ``tree``, or ABSENT when the path is missing.

    Branch steps only descend when the tree recorded the same taken branch,
    which is what isolates the two arms of an ``if`` across devices.
    """
    node = tree
    for step in path:
        if node is None:
            return ABSENT
        node = node.kids.get(step)
    return ABSENT if node is None else node.value


def vt_node(tree: Optional[ValueTree], path: Path) -> Optional[ValueTree]:
    node = tree
    for step in path:
        if node is None:
            return None
        node = node.kids.get(step)
    return node


# Serialization: a deterministic, self-describing JSON form. Values are
# tagged lists; children are [step, subtree] pairs in evaluation order.


def value_to_json(v: Value):
    if isinstance(v, NeighbouringValue):
        return ["phi", v.self_id, [[k, value_to_json(x)] for k, x in v.entries.items()]]
    if isinstance(v, bool):
        return v
    if isinstance(v, (int, float)):
        f = float(v)
        if math.isinf(f):
            return ["num", "inf" if f > 0 else "-inf"]
        if math.isnan(f):
            return ["num", "nan"]
        return ["num", f]
    if isinstance(v, str):
        return ["str", v]
    if v is None:
        return None
    if isinstance(v, DeviceId):
        return ["dev", v.id]
    if isinstance(v, Constructor):
        return ["con", v.name, [value_to_json(a) for a in v.args]]
    raise FcError(f"not a serializable value: {v!r}")


def value_from_json(j) -> Value:
    if j is None or isinstance(j, bool):
        return j
    if not isinstance(j, list):
        raise FcError(f"malformed value encoding: {j!r}")
    tag = j[0]
    if tag == "num":
        raw = j[1]
        if raw == "inf":
            return math.inf
        if raw == "-inf":
            return -math.inf
        if raw == "nan":
            return math.nan
        return float(raw)
    if tag == "str":
        return j[1]
    if tag == "dev":
        return DeviceId(j[1])
    if tag == "con":
        return Constructor(j[1], tuple(value_from_json(a) for a in j[2]))
    if tag == "phi":
        return NeighbouringValue(j[1], {k: value_from_json(x) for k, x in j[2]})
    raise FcError(f"malformed value encoding: {j!r}")


def _step_to_json(step: Step):
    if isinstance(step, tuple):
        return list(step)
    return step


def _step_from_json(j) -> Step:
    if isinstance(j, list):
        return (j[0], j[1], j[2])
    return j


def tree_to_json(tree: ValueTree):
    return [
        value_to_json(tree.value),
        [[_step_to_json(s), tree_to_json(k)] for s, k in tree.kids.items()],
    ]


def tree_from_json(j) -> ValueTree:
    value = value_from_json(j[0])
    kids = {}
    for s, k in j[1]:
        kids[_step_from_json(s)] = tree_from_json(k)
    return ValueTree(value, kids)


def serialize_tree(tree: ValueTree) -> str:
    return json.dumps(tree_to_json(tree), separators=(",", ":"))


def deserialize_tree(text: str) -> ValueTree:
    return tree_from_json(json.loads(text))
