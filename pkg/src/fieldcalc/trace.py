"""Stable text rendering of traces, event structures and check reports.

Line-record format, one tab-separated record per line:

    ordinal <TAB> device <TAB> local-time <TAB> kind <TAB> value

For fires the value column holds the root value in the stable encoding
(or ``error=<kind>`` for failed rounds); for deliveries the delivered
export's root prefixed with the sender; for env records ``name=value``.
Identical seeds produce byte-identical output.
"""

from __future__ import annotations

from .netsim import EventStructure, SimulationTrace, TraceRecord
from .values import encode_value
from .vtree import serialize_tree


def _fmt_time(t: float) -> str:
    return repr(t)


def record_line(r: TraceRecord) -> str:
    if r.kind == "fire":
        value = r.detail if r.failed else encode_value(r.value)
    elif r.kind == "delivery":
        value = f"{r.detail}:{encode_value(r.value)}"
    else:
        value = r.detail if r.value is None else f"{r.detail}:{encode_value(r.value)}"
    return f"{r.ordinal}\t@{r.device}\t{_fmt_time(r.time)}\t{r.kind}\t{value}"


def render_trace(trace: SimulationTrace) -> str:
    return "".join(record_line(r) + "\n" for r in trace.records)


def render_trace_text(trace: SimulationTrace) -> str:
    """Human-oriented variant: fires only, with per-device round numbers."""
    lines = []
    for r in trace.records:
        if r.kind != "fire":
            continue
        value = r.detail if r.failed else encode_value(r.value)
        lines.append(f"[{_fmt_time(r.time):>10}] device @{r.device} "
                     f"round {r.round_index}: {value}")
    return "".join(line + "\n" for line in lines)


def render_events(es: EventStructure) -> str:
    """Event-structure dump: event lines then the direct-predecessor edges."""
    lines = []
    for ev in es.events:
        value = es.values.get(ev.ordinal)
        tail = encode_value(value) if ev.ordinal in es.values else "failed"
        lines.append(f"event\t{ev.ordinal}\t@{ev.device}\t{_fmt_time(ev.time)}\t{tail}")
    for pred, succ in es.edges():
        lines.append(f"edge\t{pred}\t{succ}")
    return "".join(line + "\n" for line in lines)


def render_exports(trace: SimulationTrace, exports: dict[int, object]) -> str:
    """Full-export dump: one line per fire ordinal with the serialized tree."""
    lines = []
    for r in trace.records:
        if r.kind == "fire" and r.ordinal in exports:
            lines.append(f"export\t{r.ordinal}\t{serialize_tree(exports[r.ordinal])}")
    return "".join(line + "\n" for line in lines)
