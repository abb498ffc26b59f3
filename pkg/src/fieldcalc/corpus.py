"""The executable program corpus: loading, oracle bindings, checking.

Each corpus entry is three files in ``fieldcalc/corpus/``: ``name.fc`` (the
program), ``name.scenario.yaml`` (a runnable scenario) and ``name.meta.yaml``
(oracle binding, stabilization horizon as a linear form over the network
diameter and size, transcription deviations, and the documented
single-token mutation that must make the check fail).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import yaml

from .errors import FcError
from .loader import load_core_program
from .netsim import build_adjacency, run
from .oracles import (
    diameter, oracle_bfs, oracle_ellipse, oracle_longest_chain,
    oracle_same_value_component,
)
from .scenario import ScenarioConfig, load_scenario
from .values import Constructor, Value, encode_value, equal


def corpus_dir() -> Path:
    return Path(resources.files("fieldcalc") / "corpus")


def list_entries() -> list[str]:
    return sorted(p.stem for p in corpus_dir().glob("*.fc"))


@dataclass
class CorpusEntry:
    """One corpus program with its scenario and metadata."""

    name: str
    source: str
    scenario_path: Path
    oracle: str
    horizon: dict[str, float]
    deviations: list[str] = field(default_factory=list)
    negative_mutation: Optional[dict[str, str]] = None
    description: str = ""

    def horizon_rounds(self, graph_diameter: int, nodes: int) -> int:
        h = self.horizon
        return max(1, math.ceil(h.get("diameter", 0) * graph_diameter
                                + h.get("nodes", 0) * nodes
                                + h.get("constant", 0)))


def load_entry(name_or_path: str) -> CorpusEntry:
    """Load by corpus name or by path to a ``.meta.yaml`` file."""
    p = Path(name_or_path)
    if p.suffix == ".yaml" and p.exists():
        base = p.parent
        name = p.name[: -len(".meta.yaml")]
    else:
        base = corpus_dir()
        name = name_or_path
        p = base / f"{name}.meta.yaml"
        if not p.exists():
            raise FcError(f"unknown corpus entry {name_or_path!r}")
    meta = yaml.safe_load(p.read_text(encoding="utf-8"))
    fc_path = base / f"{name}.fc"
    return CorpusEntry(
        name=name,
        source=fc_path.read_text(encoding="utf-8"),
        scenario_path=base / f"{name}.scenario.yaml",
        oracle=meta["oracle"],
        horizon=meta.get("horizon", {}),
        deviations=meta.get("deviations", []),
        negative_mutation=meta.get("negative_mutation"),
        description=meta.get("description", ""),
    )


def apply_mutation(source: str, frm: str, to: str) -> str:
    """The documented single-token negative-control mutation."""
    if frm not in source:
        raise FcError(f"mutation token {frm!r} not found")
    return source.replace(frm, to, 1)


# ---------------------------------------------------------------------------
# Check reports


@dataclass
class CheckRow:
    device: int
    expected: Value
    actual: Value
    ok: bool


@dataclass
class CheckReport:
    name: str
    scenario: str
    rows: list[CheckRow]
    verdict: str  # pass | fail
    first_divergence: Optional[int] = None  # trace ordinal

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_lines(self) -> str:
        lines = [f"check\t{self.name}\t{self.scenario}"]
        for r in self.rows:
            lines.append("row\t@{}\t{}\t{}\t{}".format(
                r.device, encode_value(r.expected), encode_value(r.actual),
                "ok" if r.ok else "FAIL"))
        if self.first_divergence is not None:
            lines.append(f"first-divergence\t{self.first_divergence}")
        lines.append(f"verdict\t{self.verdict}")
        return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# Checking machinery


def _initial(scenario: ScenarioConfig, sensor: str, device: int):
    return scenario.sensors[sensor].value_at(device, 0.0)


def _flag_devices(scenario: ScenarioConfig, sensor: str) -> list[int]:
    return [d for d in scenario.device_ids()
            if _initial(scenario, sensor, d) is True]


def _stabilized_report(entry, scenario, trace, expected: dict[int, Value],
                       horizon: int) -> CheckReport:
    """Compare each listed device's root value at its ``horizon``-th round
    and at every round after it."""
    rows = []
    first_div = None
    for d in sorted(expected):
        fires = [r for r in trace.fires_of(d) if not r.failed]
        if len(fires) < horizon:
            raise FcError(
                f"horizon {horizon} exceeds trace length {len(fires)} for device {d}")
        ok = True
        for r in fires[horizon - 1:]:
            if not equal(r.value, expected[d]):
                ok = False
                if first_div is None or r.ordinal < first_div:
                    first_div = r.ordinal
                break
        rows.append(CheckRow(d, expected[d], fires[horizon - 1].value, ok))
    verdict = "pass" if all(r.ok for r in rows) else "fail"
    return CheckReport(entry.name, str(entry.scenario_path.name), rows, verdict,
                       first_div if verdict == "fail" else None)


def _per_fire_report(entry, scenario, trace,
                     expected_fn: Callable, start_round: int = 1,
                     start_time: float = -math.inf) -> CheckReport:
    """Compare every fire from ``start_round`` (and ``start_time``) on,
    with the expectation recomputed per fire."""
    rows_by_device: dict[int, CheckRow] = {}
    first_div = None
    for r in trace.records:
        if r.kind != "fire" or r.failed:
            continue
        if r.round_index < start_round or r.time < start_time:
            continue
        exp = expected_fn(r.device, r.time, r.round_index)
        if exp is None:
            continue
        ok = equal(r.value, exp)
        if not ok and first_div is None:
            first_div = r.ordinal
        prev = rows_by_device.get(r.device)
        if prev is None or prev.ok:
            rows_by_device[r.device] = CheckRow(r.device, exp, r.value, ok)
    rows = [rows_by_device[d] for d in sorted(rows_by_device)]
    verdict = "pass" if rows and all(r.ok for r in rows) else "fail"
    return CheckReport(entry.name, str(entry.scenario_path.name), rows, verdict,
                       first_div if verdict == "fail" else None)


def check_entry(entry: CorpusEntry, *, source: Optional[str] = None,
                seed: Optional[int] = None, rounds: Optional[int] = None,
                extra_constants: Optional[dict] = None) -> CheckReport:
    """Run an entry's scenario and apply its bound oracle."""
    scenario = load_scenario(entry.scenario_path)
    if seed is not None:
        scenario.seed = seed
    if rounds is not None:
        scenario.stop.rounds = rounds
    if extra_constants:
        scenario.constants.update(extra_constants)
    program = load_core_program(source if source is not None else entry.source,
                                scenario)
    trace, es = run(scenario, program)
    es.check_sane()
    checker = _CHECKERS.get(entry.oracle)
    if checker is None:
        raise FcError(f"unknown oracle binding {entry.oracle!r}")
    return checker(entry, scenario, trace, es)


# ---------------------------------------------------------------------------
# Oracle bindings


def _graph(scenario: ScenarioConfig) -> dict[int, set[int]]:
    return build_adjacency(scenario)


def _horizon(entry, scenario, adj) -> int:
    return entry.horizon_rounds(diameter(adj), len(adj))


def _check_bfs(entry, scenario, trace, es):
    adj = _graph(scenario)
    expected = oracle_bfs(adj, _flag_devices(scenario, "source"))
    return _stabilized_report(entry, scenario, trace, expected,
                              _horizon(entry, scenario, adj))


def _check_chain(entry, scenario, trace, es):
    want = oracle_longest_chain(es)
    rows = []
    first_div = None
    for ev in es.events:
        if ev.ordinal not in es.values:
            raise FcError(f"event {ev.ordinal} failed; chain oracle needs all values")
        ok = equal(es.values[ev.ordinal], want[ev.ordinal])
        if not ok and first_div is None:
            first_div = ev.ordinal
        prev = next((r for r in rows if r.device == ev.device), None)
        row = CheckRow(ev.device, want[ev.ordinal], es.values[ev.ordinal], ok)
        if prev is None:
            rows.append(row)
        elif prev.ok and not ok:
            rows[rows.index(prev)] = row
    verdict = "pass" if rows and all(r.ok for r in rows) and first_div is None else "fail"
    return CheckReport(entry.name, str(entry.scenario_path.name), rows, verdict,
                       first_div)


def _sensor_at(scenario, name, device, t):
    return scenario.sensors[name].value_at(device, t)


def _last_sensor_change(scenario) -> float:
    latest = 0.0
    for decl in scenario.sensors.values():
        for t, _d, _v in decl.change_times():
            latest = max(latest, t)
    return latest


def _check_lights(entry, scenario, trace, es):
    adj = _graph(scenario)
    start = _last_sensor_change(scenario) + 2 * scenario.max_period()

    def expected(device, t, _round):
        group = [n for n in adj[device]
                 if scenario.location_of(n) == scenario.location_of(device)]
        lights = _sensor_at(scenario, "lights", device, t)
        anyone = any(_sensor_at(scenario, "people", x, t) is True
                     for x in group + [device])
        return lights is None or equal(lights, anyone)

    return _per_fire_report(entry, scenario, trace, expected, start_time=start)


def _check_stereo(entry, scenario, trace, es):
    adj = _graph(scenario)
    if scenario.link.delay_kind != "fixed" or scenario.link.loss != 0.0:
        raise FcError("the stereo replay oracle needs a fixed-delay lossless link")
    delay = scenario.link.delay_a
    ttl = scenario.effective_ttl()
    threshold = scenario.constants["THRESHOLD"]
    delay_rounds = scenario.constants["DELAY"]
    fire_times = {d: [r.time for r in trace.fires_of(d)] for d in scenario.device_ids()}

    verdicts: dict[tuple[int, int], bool] = {}
    counts: dict[int, float] = {}
    for d in sorted(fire_times):
        group = [n for n in adj[d]
                 if scenario.location_of(n) == scenario.location_of(d)]
        for k, t in enumerate(fire_times[d]):
            entries = [_sensor_at(scenario, "alert", d, t)]
            for n in group:
                sent = [t2 for t2 in fire_times[n]
                        if t2 + delay <= t and t - (t2 + delay) <= ttl]
                if sent:
                    entries.append(_sensor_at(scenario, "alert", n, max(sent)))
            condition = (all(not equal(v, False) for v in entries)
                         or _sensor_at(scenario, "level", d, t) <= threshold)
            count = 0.0 if condition else counts.get(d, 0.0) + 1
            counts[d] = count
            verdicts[(d, k + 1)] = count < delay_rounds

    def expected(device, _t, round_index):
        return verdicts[(device, round_index)]

    return _per_fire_report(entry, scenario, trace, expected)


def _vec(scenario, name, device):
    v = _initial(scenario, name, device)
    return float(v.args[0]), float(v.args[1])


def _check_evacuation(entry, scenario, trace, es):
    adj = _graph(scenario)

    def within(a: float) -> bool:
        return -60.0 < a < 60.0

    def rel_angle(u, v) -> float:
        cross = u[0] * v[1] - u[1] * v[0]
        dot = u[0] * v[0] + u[1] * v[1]
        a = math.degrees(math.atan2(cross, dot))
        return 180.0 if a <= -180.0 else a

    def collision(d, n) -> bool:
        pd, pn = scenario.topology.position(d), scenario.topology.position(n)
        to_n = (pn[0] - pd[0], pn[1] - pd[1])
        to_d = (-to_n[0], -to_n[1])
        return (within(rel_angle(to_n, _vec(scenario, "direction", d)))
                and within(rel_angle(to_d, _vec(scenario, "direction", n))))

    expected = {d: all(not collision(d, n) for n in sorted(adj[d]))
                for d in scenario.device_ids()}
    return _stabilized_report(entry, scenario, trace, expected,
                              _horizon(entry, scenario, adj))


def _global_fold(entry, scenario, trace, es, fold):
    adj = _graph(scenario)
    sources = _flag_devices(scenario, "source")
    if len(sources) != 1:
        raise FcError(f"{entry.name} expects exactly one source device")
    answer = fold(_initial(scenario, "prop", d) is True for d in scenario.device_ids())
    expected = {sources[0]: answer}
    return _stabilized_report(entry, scenario, trace, expected,
                              _horizon(entry, scenario, adj))


def _check_global_all(entry, scenario, trace, es):
    return _global_fold(entry, scenario, trace, es, all)


def _check_global_any(entry, scenario, trace, es):
    return _global_fold(entry, scenario, trace, es, any)


def _check_remote_lights(entry, scenario, trace, es):
    adj = _graph(scenario)
    anyone = any(_initial(scenario, "people", d) is True
                 for d in scenario.device_ids())
    expected = {}
    for d in scenario.device_ids():
        lights = _initial(scenario, "lights", d)
        expected[d] = True if lights is None else equal(lights, anyone)
    return _stabilized_report(entry, scenario, trace, expected,
                              _horizon(entry, scenario, adj))


def _check_remote_alert(entry, scenario, trace, es):
    adj = _graph(scenario)
    agreed = all(not equal(_initial(scenario, "alert", d), False)
                 for d in scenario.device_ids())
    threshold = scenario.constants["THRESHOLD"]
    expected = {}
    for d in scenario.device_ids():
        level = _initial(scenario, "level", d)
        expected[d] = agreed or level <= threshold
    return _stabilized_report(entry, scenario, trace, expected,
                              _horizon(entry, scenario, adj))


def _check_broadcast(entry, scenario, trace, es):
    adj = _graph(scenario)
    sources = _flag_devices(scenario, "source")
    if len(sources) != 1:
        raise FcError("broadcast expects exactly one source device")
    dist = oracle_bfs(adj, sources)
    src_val = _initial(scenario, "val", sources[0])
    expected = {d: src_val if dist[d] < math.inf else _initial(scenario, "val", d)
                for d in scenario.device_ids()}
    return _stabilized_report(entry, scenario, trace, expected,
                              _horizon(entry, scenario, adj))


def _ellipse_set(entry, scenario, adj) -> set[int]:
    sources = _flag_devices(scenario, "source")
    dests = _flag_devices(scenario, "dest")
    if len(sources) != 1 or len(dests) != 1:
        raise FcError(f"{entry.name} expects one source and one dest device")
    sc = oracle_bfs(adj, sources)
    dc = oracle_bfs(adj, dests)
    return oracle_ellipse(sc, dc, sc[dests[0]], scenario.constants["width"])


def _check_ellipse(entry, scenario, trace, es):
    adj = _graph(scenario)
    members = _ellipse_set(entry, scenario, adj)
    expected = {d: d in members for d in scenario.device_ids()}
    return _stabilized_report(entry, scenario, trace, expected,
                              _horizon(entry, scenario, adj))


def _check_channel(entry, scenario, trace, es):
    adj = _graph(scenario)
    members = _ellipse_set(entry, scenario, adj)
    src = _flag_devices(scenario, "source")[0]
    src_val = _initial(scenario, "val", src)
    expected = {d: src_val if d in members else _initial(scenario, "val", d)
                for d in scenario.device_ids()}
    return _stabilized_report(entry, scenario, trace, expected,
                              _horizon(entry, scenario, adj))


def _check_component(entry, scenario, trace, es):
    adj = _graph(scenario)
    value_map = oracle_bfs(adj, _flag_devices(scenario, "source"))
    expected = {d: float(oracle_same_value_component(adj, value_map, d))
                for d in scenario.device_ids()}
    return _stabilized_report(entry, scenario, trace, expected,
                              _horizon(entry, scenario, adj))


def monitor_status(w: float, minw: float, maxw: float) -> Constructor:
    if w > maxw:
        return Constructor("HIGH")
    if w < minw:
        return Constructor("LOW")
    return Constructor("OK")


def _check_monitor(entry, scenario, trace, es):
    adj = _graph(scenario)
    sc = oracle_bfs(adj, _flag_devices(scenario, "source"))
    dc = oracle_bfs(adj, _flag_devices(scenario, "dest"))
    minw, maxw = scenario.constants["minw"], scenario.constants["maxw"]
    expected = {}
    for d in scenario.device_ids():
        w = min(oracle_same_value_component(adj, sc, d),
                oracle_same_value_component(adj, dc, d))
        expected[d] = monitor_status(w, minw, maxw)
    return _stabilized_report(entry, scenario, trace, expected,
                              _horizon(entry, scenario, adj))


def _check_adjusting(entry, scenario, trace, es):
    minw, maxw = scenario.constants["minw"], scenario.constants["maxw"]
    rows_by_device: dict[int, CheckRow] = {}
    first_div = None
    for r in trace.records:
        if r.kind != "fire" or r.failed:
            continue
        narea, width, status, west = r.value.args
        width_ok = 1.0 <= width <= maxw
        want = monitor_status(west, minw, maxw) if narea else Constructor("OK")
        ok = width_ok and equal(status, want)
        if not ok and first_div is None:
            first_div = r.ordinal
        prev = rows_by_device.get(r.device)
        if prev is None or prev.ok:
            rows_by_device[r.device] = CheckRow(r.device, want, r.value, ok)
    rows = [rows_by_device[d] for d in sorted(rows_by_device)]
    verdict = "pass" if rows and all(r.ok for r in rows) else "fail"
    return CheckReport(entry.name, str(entry.scenario_path.name), rows, verdict,
                       first_div if verdict == "fail" else None)


_CHECKERS = {
    "bfs": _check_bfs,
    "chain": _check_chain,
    "lights": _check_lights,
    "stereo": _check_stereo,
    "evacuation": _check_evacuation,
    "global_all": _check_global_all,
    "global_any": _check_global_any,
    "remote_lights": _check_remote_lights,
    "remote_alert": _check_remote_alert,
    "broadcast": _check_broadcast,
    "ellipse": _check_ellipse,
    "channel": _check_channel,
    "component": _check_component,
    "monitor_status": _check_monitor,
    "adjusting": _check_adjusting,
}
