"""Declarative scenario configuration: topology, schedulers, sensors, links.

Scenarios are YAML files. Schema (defaults in parentheses):

    program: path/to/program.fc        # or program_source: |
    seed: 42                           # required
    stop: {rounds: 10}                 # or {time: 25.0}
    topology:
      type: grid                       # grid | unit_disk | edges
      width: 3                         # grid
      height: 3
      radius: 1.5                      # unit_disk
      positions: {0: [0, 0], ...}      # unit_disk (required), edges (optional)
      edges: [[0, 1], ...]             # edges
      directed: false                  # edges
      devices: [0, 1, 2]               # edges, optional extra device ids
    locations: shared                  # shared | distinct | {id: name, ...}
    scheduler:                         # global default, per-device overrides
      type: periodic                   # periodic | reactive
      period: 1.0
      jitter: 0.0
      phase: 0.0
      tmin: 0.1                        # reactive minimum span
      devices: {3: {type: reactive}}
    link:
      delay: 0.1                       # or {uniform: [lo, hi]}
      loss: 0.0
    ttl: 2.5                           # (2.5 * max period)
    clock_skew: {0: 0.05}              # optional per-device offsets
    sensors:
      name:
        kind: local                    # local | neighbouring
        initial: true                  # scalar for all devices, or {id: value}
        default: false                 # fallback when initial is a map
        changes: [{t: 3.0, device: 2, value: false}, ...]
    constants: {THRESHOLD: 10}
    env: [{t: 5.0, action: set_alive, device: 1, value: false},
          {t: 6.0, action: add_edge, a: 0, b: 2}]

Sensor and constant values use YAML scalars; tuples, vectors, constructors
and device ids are written as {tuple: [...]}, {vec: [x, y]},
{con: NAME, args: [...]}, {dev: 3}. Use .inf for infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .builtins import SensorDecl, is_builtin_name
from .errors import ScenarioError
from .values import Constructor, DeviceId, LocalValue


@dataclass
class SchedulerSpec:
    type: str = "periodic"  # periodic | reactive
    period: float = 1.0
    jitter: float = 0.0
    phase: float = 0.0
    tmin: float = 0.1


@dataclass
class LinkModel:
    delay_kind: str = "fixed"  # fixed | uniform
    delay_a: float = 0.1
    delay_b: float = 0.1
    loss: float = 0.0


@dataclass
class Topology:
    kind: str
    width: int = 0
    height: int = 0
    radius: float = 0.0
    positions: dict[int, tuple[float, float]] = field(default_factory=dict)
    edges: list[tuple[int, int]] = field(default_factory=list)
    directed: bool = False
    extra_devices: list[int] = field(default_factory=list)

    def device_ids(self) -> list[int]:
        if self.kind == "grid":
            return list(range(self.width * self.height))
        if self.kind == "unit_disk":
            return sorted(self.positions)
        ids = set(self.extra_devices) | set(self.positions)
        for a, b in self.edges:
            ids.add(a)
            ids.add(b)
        return sorted(ids)

    def position(self, device: int) -> tuple[float, float]:
        if self.kind == "grid":
            return (float(device % self.width), float(device // self.width))
        return self.positions.get(device, (0.0, 0.0))


@dataclass
class EnvAction:
    time: float
    action: str  # set_alive | add_edge | remove_edge
    device: int = -1
    value: object = None
    a: int = -1
    b: int = -1


@dataclass
class StopCondition:
    rounds: Optional[int] = None
    time: Optional[float] = None


@dataclass
class ScenarioConfig:
    topology: Topology
    seed: int
    stop: StopCondition
    scheduler: SchedulerSpec = field(default_factory=SchedulerSpec)
    scheduler_overrides: dict[int, SchedulerSpec] = field(default_factory=dict)
    link: LinkModel = field(default_factory=LinkModel)
    ttl: Optional[float] = None
    locations: dict[int, str] = field(default_factory=dict)
    clock_skew: dict[int, float] = field(default_factory=dict)
    sensors: dict[str, SensorDecl] = field(default_factory=dict)
    constants: dict[str, LocalValue] = field(default_factory=dict)
    env_actions: list[EnvAction] = field(default_factory=list)
    program_path: Optional[str] = None
    program_source: Optional[str] = None

    def device_ids(self) -> list[int]:
        return self.topology.device_ids()

    def scheduler_for(self, device: int) -> SchedulerSpec:
        return self.scheduler_overrides.get(device, self.scheduler)

    def max_period(self) -> float:
        periods = [self.scheduler.period]
        periods += [s.period for s in self.scheduler_overrides.values()]
        return max(periods)

    def effective_ttl(self) -> float:
        return self.ttl if self.ttl is not None else 2.5 * self.max_period()

    def location_of(self, device: int) -> str:
        return self.locations.get(device, "0")

    def read_program_source(self) -> str:
        if self.program_source is not None:
            return self.program_source
        if self.program_path is None:
            raise ScenarioError("scenario has no program reference")
        return Path(self.program_path).read_text(encoding="utf-8")


def decode_value(raw) -> LocalValue:
    """Config value to local value (see module docstring for the forms)."""
    if raw is None or isinstance(raw, bool):
        return raw
    if isinstance(raw, (int, float)):
        return float(raw)
    if isinstance(raw, str):
        return raw
    if isinstance(raw, dict):
        if "tuple" in raw:
            return Constructor("Tuple", tuple(decode_value(x) for x in raw["tuple"]))
        if "vec" in raw:
            x, y = raw["vec"]
            return Constructor("Vec2", (float(x), float(y)))
        if "con" in raw:
            return Constructor(raw["con"], tuple(decode_value(x) for x in raw.get("args", [])))
        if "dev" in raw:
            return DeviceId(int(raw["dev"]))
    if isinstance(raw, list):
        return Constructor("Tuple", tuple(decode_value(x) for x in raw))
    raise ScenarioError(f"cannot decode value {raw!r}")


def _decode_scheduler(raw: dict) -> SchedulerSpec:
    spec = SchedulerSpec()
    spec.type = raw.get("type", spec.type)
    if spec.type not in ("periodic", "reactive"):
        raise ScenarioError(f"unknown scheduler type {spec.type!r}")
    spec.period = float(raw.get("period", spec.period))
    spec.jitter = float(raw.get("jitter", spec.jitter))
    spec.phase = float(raw.get("phase", spec.phase))
    spec.tmin = float(raw.get("tmin", spec.tmin))
    if spec.period <= 0:
        raise ScenarioError("scheduler period must be positive")
    if spec.jitter < 0 or spec.jitter >= spec.period:
        raise ScenarioError("jitter must be in [0, period)")
    if spec.tmin < 0:
        raise ScenarioError("tmin must be nonnegative")
    return spec


def _decode_topology(raw: dict) -> Topology:
    kind = raw.get("type")
    if kind == "grid":
        t = Topology("grid", width=int(raw["width"]), height=int(raw["height"]))
        if t.width <= 0 or t.height <= 0:
            raise ScenarioError("grid dimensions must be positive")
        return t
    if kind == "unit_disk":
        if "positions" not in raw:
            raise ScenarioError("unit_disk topology requires positions")
        positions = {int(k): (float(v[0]), float(v[1]))
                     for k, v in raw["positions"].items()}
        return Topology("unit_disk", radius=float(raw["radius"]), positions=positions)
    if kind == "edges":
        positions = {int(k): (float(v[0]), float(v[1]))
                     for k, v in raw.get("positions", {}).items()}
        edges = [(int(a), int(b)) for a, b in raw.get("edges", [])]
        return Topology("edges", positions=positions, edges=edges,
                        directed=bool(raw.get("directed", False)),
                        extra_devices=[int(d) for d in raw.get("devices", [])])
    raise ScenarioError(f"unknown topology type {kind!r}")


def _decode_sensor(name: str, raw: dict, devices: list[int]) -> SensorDecl:
    kind = raw.get("kind", "local")
    if kind not in ("local", "neighbouring"):
        raise ScenarioError(f"sensor {name!r}: unknown kind {kind!r}")
    decode = decode_value if kind == "local" else _decode_nbr_map
    initial = raw.get("initial", None)
    timelines: dict[int, list[tuple[float, object]]] = {}
    if isinstance(initial, dict) and kind == "local":
        default = decode(raw["default"]) if "default" in raw else None
        has_default = "default" in raw
        for d in devices:
            if d in initial or str(d) in initial:
                v = decode(initial.get(d, initial.get(str(d))))
            elif has_default:
                v = default
            else:
                raise ScenarioError(f"sensor {name!r}: no initial value for device {d}")
            timelines[d] = [(0.0, v)]
    else:
        v = decode(initial)
        for d in devices:
            timelines[d] = [(0.0, v)]
    for change in raw.get("changes", []):
        t = float(change["t"])
        value = decode(change["value"])
        targets = devices if change.get("device") in (None, "all") else [int(change["device"])]
        for d in targets:
            last = timelines[d][-1][0]
            if t <= last:
                raise ScenarioError(
                    f"sensor {name!r}: change times must strictly increase for device {d}")
            timelines[d].append((t, value))
    return SensorDecl(name, kind, timelines)


def _decode_nbr_map(raw) -> dict[int, LocalValue]:
    if not isinstance(raw, dict):
        raise ScenarioError("neighbouring sensor values must be device->value maps")
    return {int(k): decode_value(v) for k, v in raw.items()}


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as err:
        raise ScenarioError(f"{path}: {err}") from None
    if not isinstance(raw, dict):
        raise ScenarioError(f"{path}: scenario must be a mapping")
    cfg = scenario_from_dict(raw, base_dir=path.parent)
    return cfg


def scenario_from_dict(raw: dict, base_dir: Optional[Path] = None) -> ScenarioConfig:
    if "seed" not in raw:
        raise ScenarioError("scenario requires a seed")
    if "topology" not in raw:
        raise ScenarioError("scenario requires a topology")
    topology = _decode_topology(raw["topology"])
    devices = topology.device_ids()
    if not devices and raw.get("allow_empty") is not True:
        pass  # empty networks are legal; run() yields an empty trace

    stop_raw = raw.get("stop", {})
    stop = StopCondition(
        rounds=int(stop_raw["rounds"]) if "rounds" in stop_raw else None,
        time=float(stop_raw["time"]) if "time" in stop_raw else None)
    if stop.rounds is None and stop.time is None:
        raise ScenarioError("scenario requires a stop condition (rounds or time)")

    sched_raw = dict(raw.get("scheduler", {}))
    overrides_raw = sched_raw.pop("devices", {})
    scheduler = _decode_scheduler(sched_raw)
    overrides = {}
    for dev, o in overrides_raw.items():
        merged = dict(sched_raw)
        merged.update(o)
        overrides[int(dev)] = _decode_scheduler(merged)

    link_raw = raw.get("link", {})
    link = LinkModel()
    delay = link_raw.get("delay", 0.1 * scheduler.period)
    if isinstance(delay, dict):
        lo, hi = delay["uniform"]
        link = LinkModel("uniform", float(lo), float(hi), float(link_raw.get("loss", 0.0)))
        if not 0 <= lo <= hi:
            raise ScenarioError("uniform delay bounds must satisfy 0 <= lo <= hi")
    else:
        d = float(delay)
        if d < 0:
            raise ScenarioError("delay must be nonnegative")
        link = LinkModel("fixed", d, d, float(link_raw.get("loss", 0.0)))
    if not 0.0 <= link.loss <= 1.0:
        raise ScenarioError("loss probability must be in [0, 1]")

    locations_raw = raw.get("locations", "shared")
    if locations_raw == "shared":
        locations = {d: "0" for d in devices}
    elif locations_raw == "distinct":
        locations = {d: str(d) for d in devices}
    elif isinstance(locations_raw, dict):
        locations = {int(k): str(v) for k, v in locations_raw.items()}
        for d in devices:
            locations.setdefault(d, "0")
    else:
        raise ScenarioError(f"bad locations spec {locations_raw!r}")

    sensors = {}
    for name, sraw in (raw.get("sensors") or {}).items():
        if is_builtin_name(name):
            raise ScenarioError(f"sensor {name!r} collides with a builtin name")
        sensors[name] = _decode_sensor(name, sraw or {}, devices)

    constants = {k: decode_value(v) for k, v in (raw.get("constants") or {}).items()}

    env_actions = []
    for a in raw.get("env", []) or []:
        action = a.get("action")
        if action == "set_alive":
            env_actions.append(EnvAction(float(a["t"]), "set_alive",
                                         device=int(a["device"]), value=bool(a["value"])))
        elif action in ("add_edge", "remove_edge"):
            if topology.kind != "edges":
                raise ScenarioError(f"{action} requires an edges topology")
            env_actions.append(EnvAction(float(a["t"]), action,
                                         a=int(a["a"]), b=int(a["b"])))
        else:
            raise ScenarioError(f"unknown env action {action!r}")

    program_path = raw.get("program")
    if program_path is not None and base_dir is not None:
        program_path = str((base_dir / program_path).resolve())

    ttl = float(raw["ttl"]) if "ttl" in raw else None
    if ttl is not None and ttl <= 0:
        raise ScenarioError("ttl must be positive")

    for dev in list(raw.get("clock_skew", {}) or {}):
        if int(dev) not in devices:
            raise ScenarioError(f"clock_skew references unknown device {dev}")

    cfg = ScenarioConfig(
        topology=topology,
        seed=int(raw["seed"]),
        stop=stop,
        scheduler=scheduler,
        scheduler_overrides=overrides,
        link=link,
        ttl=ttl,
        locations=locations,
        clock_skew={int(k): float(v) for k, v in (raw.get("clock_skew") or {}).items()},
        sensors=sensors,
        constants=constants,
        env_actions=env_actions,
        program_path=program_path,
        program_source=raw.get("program_source"),
    )
    _validate(cfg)
    return cfg


def _validate(cfg: ScenarioConfig) -> None:
    devices = set(cfg.device_ids())
    for dev in cfg.scheduler_overrides:
        if dev not in devices:
            raise ScenarioError(f"scheduler override references unknown device {dev}")
    for a in cfg.env_actions:
        if a.action == "set_alive" and a.device not in devices:
            raise ScenarioError(f"env action references unknown device {a.device}")
    if math.isinf(cfg.effective_ttl()):
        raise ScenarioError("ttl must be finite")
