"""The oracles themselves, pinned against hand counts and brute force."""

import itertools
import math

import pytest

from fieldcalc.errors import FcError
from fieldcalc.oracles import (
    diameter, is_connected, oracle_bfs, oracle_ellipse, oracle_longest_chain,
    oracle_same_value_component,
)

LINE4 = {0: [1], 1: [0, 2], 2: [1, 3], 3: [2]}


class TestBfs:
    def test_line_from_one_end(self):
        assert oracle_bfs(LINE4, [0]) == {0: 0, 1: 1, 2: 2, 3: 3}

    def test_all_sources_all_zero(self):
        assert oracle_bfs(LINE4, [0, 1, 2, 3]) == {0: 0, 1: 0, 2: 0, 3: 0}

    def test_disconnected_is_infinite(self):
        graph = {0: [1], 1: [0], 2: []}
        assert oracle_bfs(graph, [0]) == {0: 0, 1: 1, 2: math.inf}

    def test_matches_brute_force_on_random_graphs(self, rng):
        for _ in range(20):
            n = rng.randrange(2, 9)
            graph = {i: set() for i in range(n)}
            for a in range(n):
                for b in range(a + 1, n):
                    if rng.random() < 0.35:
                        graph[a].add(b)
                        graph[b].add(a)
            source = rng.randrange(n)
            got = oracle_bfs(graph, [source])
            # brute force: shortest path by enumerating all simple paths
            for target in range(n):
                best = 0 if target == source else math.inf
                for length in range(1, n):
                    for mid in itertools.permutations(
                            [x for x in range(n) if x not in (source, target)],
                            length - 1):
                        path = (source,) + mid + (target,)
                        if all(path[i + 1] in graph[path[i]]
                               for i in range(len(path) - 1)):
                            best = min(best, length)
                    if best < math.inf:
                        break
                assert got[target] == best


class TestLongestChain:
    def test_predecessor_free_event_is_one(self):
        assert oracle_longest_chain({0: ()}) == {0: 1}

    def test_chain_of_three(self):
        preds = {0: (), 1: (0,), 2: (1,)}
        assert oracle_longest_chain(preds) == {0: 1, 1: 2, 2: 3}

    def test_max_of_predecessors_plus_one(self):
        # predecessors valued {2, 1} give 3, the circled-event pattern
        preds = {0: (), 1: (0,), 2: (), 3: (1, 2)}
        values = oracle_longest_chain(preds)
        assert values[1] == 2 and values[2] == 1
        assert values[3] == 3

    def test_cycle_detected(self):
        with pytest.raises(FcError, match="cycle"):
            oracle_longest_chain({0: (1,), 1: (0,)})


class TestSameValueComponent:
    def test_uniform_connected_graph(self):
        graph = {i: [j for j in range(5) if j != i] for i in range(5)}
        values = {i: 7.0 for i in range(5)}
        assert oracle_same_value_component(graph, values, 0) == 5

    def test_value_isolated_device(self):
        values = {0: 1.0, 1: 2.0, 2: 1.0}
        assert oracle_same_value_component(LINE4 | {}, {**values, 3: 9.0}, 1) == 1

    def test_line_with_values_1_1_2(self):
        graph = {0: [1], 1: [0, 2], 2: [1]}
        values = {0: 1.0, 1: 1.0, 2: 2.0}
        # brute force over all subsets containing device 0
        best = 0
        for r in range(1, 4):
            for comb in itertools.combinations(range(3), r):
                if 0 not in comb or any(values[c] != values[0] for c in comb):
                    continue
                # connected within the induced subgraph?
                seen = {0}
                frontier = [0]
                while frontier:
                    x = frontier.pop()
                    for y in graph[x]:
                        if y in comb and y not in seen:
                            seen.add(y)
                            frontier.append(y)
                if seen == set(comb):
                    best = max(best, len(comb))
        assert best == 2
        assert oracle_same_value_component(graph, values, 0) == best

    def test_unknown_device(self):
        with pytest.raises(FcError):
            oracle_same_value_component({0: []}, {0: 1.0}, 9)


class TestEllipse:
    def test_width_zero_line_is_every_shortest_path_node(self):
        ds = oracle_bfs(LINE4, [0])
        dd = oracle_bfs(LINE4, [3])
        got = oracle_ellipse(ds, dd, ds[3], 0)
        # brute force: nodes on some shortest 0-3 path
        on_path = set()
        for mid in itertools.permutations([1, 2]):
            path = (0,) + mid + (3,)
            if all(path[i + 1] in LINE4[path[i]] for i in range(3)):
                if len(path) - 1 == ds[3]:
                    on_path.update(path)
        assert got == on_path == {0, 1, 2, 3}

    def test_saturating_width_includes_everyone(self):
        graph = {0: [1], 1: [0, 2], 2: [1, 3], 3: [2], 4: [5], 5: [4]}
        ds = oracle_bfs(graph, [0])
        dd = oracle_bfs(graph, [3])
        got = oracle_ellipse(ds, dd, ds[3], 2 * diameter(graph))
        assert got == {0, 1, 2, 3}  # unreachable stays out (infinite sums)

    def test_coincident_foci(self):
        ds = oracle_bfs(LINE4, [1])
        got = oracle_ellipse(ds, ds, 0, 2)
        assert got == {d for d in LINE4 if 2 * ds[d] <= 2}


def test_diameter_and_connectivity():
    assert diameter(LINE4) == 3
    assert is_connected(LINE4)
    assert not is_connected({0: [], 1: []})
    assert diameter({}) == 0
