"""Independent oracles the corpus programs are checked against.

These are deliberately direct graph algorithms with no dependency on the
interpreter or the simulator, so a corpus check always has two independent
routes to the same answer.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable, Mapping

from .errors import FcError
from .values import equal

Adjacency = Mapping[int, Iterable[int]]


def oracle_bfs(graph: Adjacency, sources: Iterable[int]) -> dict[int, float]:
    """Hop distance from the nearest source; +inf when unreachable."""
    dist = {d: math.inf for d in graph}
    frontier = deque()
    for s in sources:
        if s in dist and dist[s] > 0:
            dist[s] = 0.0
            frontier.append(s)
    while frontier:
        d = frontier.popleft()
        for n in graph[d]:
            if dist[n] == math.inf:
                dist[n] = dist[d] + 1
                frontier.append(n)
    return dist


def oracle_longest_chain(preds) -> dict[int, float]:
    """Longest event chain ending at each event, counting events (base 1).

    ``preds`` maps each event ordinal to its direct-predecessor ordinals
    (an EventStructure's ``preds`` mapping works as-is). Every predecessor
    must be an earlier ordinal; anything else signals a recorder bug.
    """
    if hasattr(preds, "preds"):
        preds = preds.preds
    values: dict[int, float] = {}
    for e in sorted(preds):
        best = 0.0
        for p in preds[e]:
            if p >= e:
                raise FcError(f"cycle detected: event {p} precedes {e}")
            best = max(best, values[p])
        values[e] = best + 1
    return values


def oracle_same_value_component(
    graph: Adjacency, value_map: Mapping[int, object], device: int
) -> int:
    """Size of ``device``'s connected component in the same-value subgraph."""
    if device not in graph:
        raise FcError(f"unknown device {device}")
    target = value_map[device]
    seen = {device}
    frontier = deque([device])
    while frontier:
        d = frontier.popleft()
        for n in graph[d]:
            if n not in seen and equal(value_map[n], target):
                seen.add(n)
                frontier.append(n)
    return len(seen)


def oracle_ellipse(
    d_source: Mapping[int, float],
    d_dest: Mapping[int, float],
    d_source_dest: float,
    width: float,
) -> set[int]:
    """Devices whose summed focal distances stay within the widened bound."""
    return {
        d
        for d in d_source
        if d_source[d] + d_dest[d] <= d_source_dest + width
    }


def diameter(graph: Adjacency) -> int:
    """Largest finite pairwise hop distance (0 for empty graphs)."""
    best = 0
    for d in graph:
        dist = oracle_bfs(graph, [d])
        finite = [v for v in dist.values() if v < math.inf]
        if finite:
            best = max(best, int(max(finite)))
    return best


def is_connected(graph: Adjacency) -> bool:
    if not graph:
        return True
    start = next(iter(graph))
    dist = oracle_bfs(graph, [start])
    return all(v < math.inf for v in dist.values())
