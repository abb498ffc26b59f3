"""Asynchronous network simulation with event-structure recording.

The world advances through a single deterministic event loop: a heap of
pending actions ordered by (time, kind, device, sequence) where deliveries
settle before environment changes and fires at the same instant. All
randomness (jitter, link delay, loss) comes from one seeded stream, so a
scenario is a pure function of its configuration.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .ast import Program
from .errors import FcError, FcRuntimeError
from .evaluator import RoundContext, eval_round
from .scenario import ScenarioConfig, SchedulerSpec
from .values import NeighbouringValue, Value, equal
from .vtree import ValueTree

_K_DELIVER, _K_ENV, _K_FIRE = 0, 1, 2
_SAME_TIME_EPS = 1e-9


@dataclass(frozen=True, slots=True)
class Event:
    """One device activation: (device, local time) plus a recorder ordinal."""

    device: int
    time: float
    ordinal: int


class EventStructure:
    """Recorded events, the direct-predecessor DAG and the field evolution."""

    def __init__(self):
        self.events: list[Event] = []
        self.by_ordinal: dict[int, Event] = {}
        self.preds: dict[int, tuple[int, ...]] = {}
        self.values: dict[int, Value] = {}
        self._succs: Optional[dict[int, list[int]]] = None

    def add_event(self, event: Event, pred_ordinals: tuple[int, ...],
                  value: Optional[Value], failed: bool) -> None:
        self.events.append(event)
        self.by_ordinal[event.ordinal] = event
        self.preds[event.ordinal] = pred_ordinals
        if not failed:
            self.values[event.ordinal] = value
        self._succs = None

    def edges(self) -> list[tuple[int, int]]:
        return [(p, e) for e, ps in sorted(self.preds.items()) for p in ps]

    def succs(self) -> dict[int, list[int]]:
        if self._succs is None:
            out: dict[int, list[int]] = {e: [] for e in self.preds}
            for e, ps in self.preds.items():
                for p in ps:
                    out[p].append(e)
            self._succs = out
        return self._succs

    def _require(self, ordinal: int) -> None:
        if ordinal not in self.preds:
            raise FcError(f"unknown event ordinal {ordinal}")

    def causal_past(self, ordinal: int) -> set[int]:
        """Ordinals strictly below the event in the causal order."""
        self._require(ordinal)
        out: set[int] = set()
        stack = list(self.preds[ordinal])
        while stack:
            e = stack.pop()
            if e not in out:
                out.add(e)
                stack.extend(self.preds[e])
        return out

    def causal_future(self, ordinal: int) -> set[int]:
        self._require(ordinal)
        succs = self.succs()
        out: set[int] = set()
        stack = list(succs[ordinal])
        while stack:
            e = stack.pop()
            if e not in out:
                out.add(e)
                stack.extend(succs[e])
        return out

    def concurrent(self, ordinal: int) -> set[int]:
        self._require(ordinal)
        rest = set(self.preds) - {ordinal}
        return rest - self.causal_past(ordinal) - self.causal_future(ordinal)

    def check_sane(self) -> None:
        """Acyclicity, per-device predecessor uniqueness, strict local time."""
        last_time: dict[int, float] = {}
        for ev in self.events:
            if ev.device in last_time and ev.time <= last_time[ev.device]:
                raise FcError(f"device {ev.device} times do not strictly increase")
            last_time[ev.device] = ev.time
            devices_seen = set()
            for p in self.preds[ev.ordinal]:
                if p >= ev.ordinal:
                    raise FcError(f"edge {p} -> {ev.ordinal} violates ordinal order")
                pd = self.by_ordinal[p].device
                if pd in devices_seen:
                    raise FcError(f"event {ev.ordinal} has two predecessors from {pd}")
                if pd == ev.device:
                    raise FcError(f"self edge recorded at event {ev.ordinal}")
                devices_seen.add(pd)


@dataclass(frozen=True, slots=True)
class TraceRecord:
    ordinal: int
    device: int
    time: float
    kind: str  # fire | env | delivery
    detail: str
    value: Optional[Value] = None
    round_index: int = 0  # per-device fire count, 1-based (fires only)
    failed: bool = False


class SimulationTrace:
    def __init__(self):
        self.records: list[TraceRecord] = []

    def fires(self) -> list[TraceRecord]:
        return [r for r in self.records if r.kind == "fire"]

    def fires_of(self, device: int) -> list[TraceRecord]:
        return [r for r in self.records if r.kind == "fire" and r.device == device]

    def final_values(self) -> dict[int, Value]:
        out: dict[int, Value] = {}
        for r in self.records:
            if r.kind == "fire" and not r.failed:
                out[r.device] = r.value
        return out


@dataclass
class _Mailbox:
    tree: ValueTree
    receipt: float
    sender_event: int


@dataclass
class DeviceState:
    id: int
    position: tuple[float, float]
    location: str
    scheduler: SchedulerSpec
    ttl: float
    clock_skew: float = 0.0
    alive: bool = True
    mailbox: dict[int, _Mailbox] = field(default_factory=dict)
    previous_export: Optional[ValueTree] = None
    fires_done: int = 0
    last_fire: Optional[float] = None
    next_fire: Optional[float] = None


class World:
    """Mutable simulation state driven by ``step`` until the stop condition."""

    def __init__(self, scenario: ScenarioConfig, program: Program,
                 keep_exports: bool = False):
        self.scenario = scenario
        self.program = program
        self.rng = random.Random(scenario.seed)
        self.clock = 0.0
        self.trace = SimulationTrace()
        self.event_structure = EventStructure()
        self.keep_exports = keep_exports
        self.exports: dict[int, ValueTree] = {}
        self._heap: list = []
        self._seq = 0
        self._ordinal = 0
        self._stopped = False

        self.adjacency = build_adjacency(scenario)
        self.devices: dict[int, DeviceState] = {}
        for d in scenario.device_ids():
            spec = scenario.scheduler_for(d)
            self.devices[d] = DeviceState(
                id=d,
                position=scenario.topology.position(d),
                location=scenario.location_of(d),
                scheduler=spec,
                ttl=scenario.effective_ttl(),
                clock_skew=scenario.clock_skew.get(d, 0.0),
            )
        # Initial fire for every device at its phase; sensor changes and
        # explicit env actions are prescheduled.
        for d in sorted(self.devices):
            self._schedule_fire(self.devices[d], self.devices[d].scheduler.phase)
        for name in sorted(scenario.sensors):
            for when, device, value in scenario.sensors[name].change_times():
                self._push(when, _K_ENV, device, ("sensor", name, device, value))
        for action in scenario.env_actions:
            dev = action.device if action.device >= 0 else 0
            self._push(action.time, _K_ENV, dev, ("env", action))

    # ------------------------------------------------------------------
    # Scheduling machinery

    def _push(self, time: float, kind: int, device: int, payload) -> None:
        heapq.heappush(self._heap, (time, kind, device, self._seq, payload))
        self._seq += 1

    def _schedule_fire(self, dev: DeviceState, when: float) -> None:
        if dev.next_fire is not None and dev.next_fire <= when:
            return
        dev.next_fire = when
        self._push(when, _K_FIRE, dev.id, ("fire",))

    def _rounds_remaining(self, dev: DeviceState) -> bool:
        rounds = self.scenario.stop.rounds
        return rounds is None or dev.fires_done < rounds

    def _wake_reactive(self, dev: DeviceState) -> None:
        if dev.scheduler.type != "reactive" or not dev.alive:
            return
        if not self._rounds_remaining(dev):
            return
        want = self.clock
        if dev.last_fire is not None:
            want = max(want, dev.last_fire + dev.scheduler.tmin,
                       dev.last_fire + _SAME_TIME_EPS)
        self._schedule_fire(dev, want)

    # ------------------------------------------------------------------
    # Stepping

    def done(self) -> bool:
        if self._stopped or not self._heap:
            return True
        if self.scenario.stop.time is not None and self._heap[0][0] > self.scenario.stop.time:
            return True
        return False

    def step(self) -> None:
        """Process the earliest pending action."""
        if self.done():
            self._stopped = True
            return
        time, kind, device, _seq, payload = heapq.heappop(self._heap)
        self.clock = time
        if kind == _K_DELIVER:
            self._deliver(device, payload)
        elif kind == _K_ENV:
            self._apply_env(payload)
        else:
            self._process_fire(self.devices[device])

    def run_to_completion(self) -> None:
        while not self.done():
            self.step()

    # ------------------------------------------------------------------
    # Actions

    def _record(self, device: int, time: float, kind: str, detail: str,
                value=None, round_index=0, failed=False) -> TraceRecord:
        rec = TraceRecord(self._ordinal, device, time, kind, detail,
                          value=value, round_index=round_index, failed=failed)
        self._ordinal += 1
        self.trace.records.append(rec)
        return rec

    def _deliver(self, receiver: int, payload) -> None:
        _tag, sender, tree, sender_event, root = payload
        dev = self.devices.get(receiver)
        if dev is None or not dev.alive:
            return
        old = dev.mailbox.get(sender)
        dev.mailbox[sender] = _Mailbox(tree, self.clock, sender_event)
        self._record(receiver, self.clock + dev.clock_skew, "delivery",
                     f"from=@{sender}", value=root)
        if dev.scheduler.type == "reactive":
            # The wake rule ignores a message equal to the stored one.
            if old is None or not equal(old.tree, tree):
                self._wake_reactive(dev)

    def _apply_env(self, payload) -> None:
        if payload[0] == "sensor":
            _tag, name, device, value = payload
            dev = self.devices[device]
            self._record(device, self.clock + dev.clock_skew, "env",
                         f"sensor={name}", value=value)
            self._wake_reactive(dev)
            return
        action = payload[1]
        if action.action == "set_alive":
            dev = self.devices[action.device]
            was = dev.alive
            dev.alive = bool(action.value)
            self._record(action.device, self.clock + dev.clock_skew, "env",
                         f"alive={dev.alive}")
            if dev.alive and not was:
                if dev.scheduler.type == "periodic" and self._rounds_remaining(dev):
                    self._schedule_fire(dev, self.clock + dev.scheduler.period)
        elif action.action in ("add_edge", "remove_edge"):
            a, b = action.a, action.b
            pairs = [(a, b)] if self.scenario.topology.directed else [(a, b), (b, a)]
            for x, y in pairs:
                if action.action == "add_edge":
                    self.adjacency.setdefault(x, set()).add(y)
                else:
                    self.adjacency.get(x, set()).discard(y)
            self._record(a, self.clock, "env", f"{action.action}=@{a}-@{b}")

    def _process_fire(self, dev: DeviceState) -> None:
        if dev.next_fire != self.clock:
            return  # stale duplicate wake
        dev.next_fire = None
        if not dev.alive or not self._rounds_remaining(dev):
            return
        self.fire(dev.id)
        if dev.scheduler.type == "periodic" and self._rounds_remaining(dev):
            gap = dev.scheduler.period
            if dev.scheduler.jitter > 0:
                gap += self.rng.uniform(-dev.scheduler.jitter, dev.scheduler.jitter)
            gap = max(gap, _SAME_TIME_EPS)
            self._schedule_fire(dev, self.clock + gap)

    def fire(self, device: int) -> Event:
        """Run one round at ``device``: build the context, evaluate, store
        and broadcast the export, record the event and its edges."""
        dev = self.devices[device]
        now = self.clock
        local_time = now + dev.clock_skew

        for sender in [s for s, m in dev.mailbox.items() if now - m.receipt > dev.ttl]:
            del dev.mailbox[sender]

        ctx = self._build_context(dev, local_time)
        preds = tuple(sorted(dev.mailbox[s].sender_event for s in dev.mailbox))

        event = Event(device, local_time, self._ordinal)
        dev.fires_done += 1
        dev.last_fire = now
        try:
            export = eval_round(self.program, ctx)
        except FcRuntimeError as err:
            self._record(device, local_time, "fire", f"error={err.kind}",
                         round_index=dev.fires_done, failed=True)
            self.event_structure.add_event(event, preds, None, failed=True)
            return event

        self._record(device, local_time, "fire", "ok", value=export.root_value,
                     round_index=dev.fires_done)
        self.event_structure.add_event(event, preds, export.root_value, failed=False)
        dev.previous_export = export.tree
        if self.keep_exports:
            self.exports[event.ordinal] = export.tree

        link = self.scenario.link
        for receiver in sorted(self.adjacency.get(device, ())):
            if link.loss > 0.0 and self.rng.random() < link.loss:
                continue
            if link.delay_kind == "uniform":
                delay = self.rng.uniform(link.delay_a, link.delay_b)
            else:
                delay = link.delay_a
            self._push(now + delay, _K_DELIVER, receiver,
                       ("deliver", device, export.tree, event.ordinal, export.root_value))
        return event

    def _build_context(self, dev: DeviceState, local_time: float) -> RoundContext:
        current = sorted(self.adjacency.get(dev.id, ()))
        positions = {dev.id: dev.position}
        locations = {dev.id: dev.location}
        for n in current:
            nd = self.devices[n]
            positions[n] = nd.position
            locations[n] = nd.location
        for s in dev.mailbox:
            locations.setdefault(s, self.devices[s].location)

        sensors: dict[str, Value] = {}
        for name, decl in self.scenario.sensors.items():
            if decl.kind == "local":
                sensors[name] = decl.value_at(dev.id, local_time)
            else:
                mapping = decl.value_at(dev.id, local_time)
                entries = {i: mapping.get(i) for i in positions}
                sensors[name] = NeighbouringValue(dev.id, entries)

        exports = {s: (m.tree, m.receipt) for s, m in sorted(dev.mailbox.items())}
        return RoundContext(
            self_id=dev.id,
            time=local_time,
            sensors=sensors,
            neighbour_exports=exports,
            previous_self_export=dev.previous_export,
            location_of=locations,
            position_of=positions,
            constants=self.scenario.constants,
        )


def neighbours(world: World, device: int) -> set[int]:
    """Topology neighbours of an alive device (self excluded)."""
    if device not in world.devices:
        raise FcError(f"unknown device {device}")
    if not world.devices[device].alive:
        raise FcError(f"device {device} is not alive")
    return set(world.adjacency.get(device, set()))


def build_adjacency(scenario: ScenarioConfig) -> dict[int, set[int]]:
    """Directed adjacency: a -> receivers of a's broadcasts."""
    topo = scenario.topology
    ids = topo.device_ids()
    adj: dict[int, set[int]] = {d: set() for d in ids}
    if topo.kind == "grid":
        w, h = topo.width, topo.height
        for d in ids:
            x, y = d % w, d // w
            for nx, ny in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)):
                if 0 <= nx < w and 0 <= ny < h:
                    adj[d].add(ny * w + nx)
    elif topo.kind == "unit_disk":
        for a in ids:
            ax, ay = topo.positions[a]
            for b in ids:
                if a == b:
                    continue
                bx, by = topo.positions[b]
                if math.dist((ax, ay), (bx, by)) <= topo.radius:
                    adj[a].add(b)
    else:
        for a, b in topo.edges:
            adj.setdefault(a, set()).add(b)
            if not topo.directed:
                adj.setdefault(b, set()).add(a)
        for d in ids:
            adj.setdefault(d, set())
    for d in adj:
        adj[d].discard(d)
    return adj


def run(scenario: ScenarioConfig, program: Optional[Program] = None
        ) -> tuple[SimulationTrace, EventStructure]:
    """Run a scenario to its stop condition; identical seeds give identical
    traces byte for byte."""
    if program is None:
        from .loader import load_core_program

        program = load_core_program(scenario.read_program_source(), scenario)
    world = World(scenario, program)
    world.run_to_completion()
    return world.trace, world.event_structure
