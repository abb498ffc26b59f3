"""Shared builders for scenarios and random graphs."""

from __future__ import annotations

import math
import random

import pytest

from fieldcalc.oracles import is_connected
from fieldcalc.scenario import scenario_from_dict


def make_scenario(**overrides):
    """A small synchronous lossless scenario; override any top-level key."""
    raw = {
        "seed": 1,
        "stop": {"rounds": 5},
        "topology": {"type": "grid", "width": 3, "height": 1},
        "scheduler": {"type": "periodic", "period": 1.0},
        "link": {"delay": 0.1, "loss": 0.0},
    }
    raw.update(overrides)
    return scenario_from_dict(raw)


def random_unit_disk_positions(rng: random.Random, n: int, radius: float,
                               require_connected: bool = True) -> dict[int, list[float]]:
    """Random positions in a square sized so the disk graph is usually
    connected; resamples until it is when required."""
    side = math.sqrt(n) * radius * 0.75
    while True:
        positions = {i: [rng.uniform(0, side), rng.uniform(0, side)] for i in range(n)}
        if not require_connected:
            return positions
        adj = {i: set() for i in range(n)}
        for a in range(n):
            for b in range(a + 1, n):
                if math.dist(positions[a], positions[b]) <= radius:
                    adj[a].add(b)
                    adj[b].add(a)
        if is_connected(adj):
            return positions


def unit_disk_scenario(rng: random.Random, n: int, radius: float = 1.0,
                       rounds: int = 10, require_connected: bool = True,
                       **extra):
    positions = random_unit_disk_positions(rng, n, radius, require_connected)
    raw = {
        "seed": rng.randrange(1 << 30),
        "stop": {"rounds": rounds},
        "topology": {"type": "unit_disk", "radius": radius, "positions": positions},
        "scheduler": {"type": "periodic", "period": 1.0},
        "link": {"delay": 0.1, "loss": 0.0},
    }
    raw.update(extra)
    return scenario_from_dict(raw)


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
