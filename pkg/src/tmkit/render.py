"""Graphviz DOT and event-timeline output.

Every machine (the root included) becomes a ``cluster_<path>`` subgraph, and
every stage becomes a node labelled with its kind. A folded machine is a single
box node. Flows are solid edges labelled with their thing; triggers are dashed.
"""

from __future__ import annotations

from typing import Optional

from .errors import UnknownEvent
from .events import occurrences
from .model import ArcRef, Machine, Model, StageKind, StageRef
from .trace import Trace

# Fixed node style per stage kind.
STAGE_SHAPES: dict[StageKind, str] = {
    StageKind.CREATE: "doublecircle",
    StageKind.RECEIVE: "invhouse",
    StageKind.ARRIVE: "invtriangle",
    StageKind.ACCEPT: "invtrapezium",
    StageKind.PROCESS: "ellipse",
    StageKind.RELEASE: "trapezium",
    StageKind.TRANSFER: "house",
}
OPAQUE_SHAPE = "box3d"
HIGHLIGHT = 'color="red", penwidth=2'


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _region_sets(model: Model, event_name: str) -> tuple[set, set, set]:
    if not model.has_event(event_name):
        raise UnknownEvent(f"no event named {event_name!r}")
    ev = model.event(event_name)
    nodes = set(ev.stages)
    flow_arcs = set()
    trigger_arcs = set()
    for r in ev.region:
        if isinstance(r, ArcRef):
            (trigger_arcs if r.trigger else flow_arcs).add((r.source, r.target))
    for f in model.flows:
        if f.source in nodes and f.target in nodes:
            flow_arcs.add((f.source, f.target))
    for t in model.triggers:
        if t.source in nodes and t.target in nodes:
            trigger_arcs.add((t.source, t.target))
    return nodes, flow_arcs, trigger_arcs


def to_dot(model: Model, highlight: Optional[str] = None) -> str:
    """Render ``model``; ``highlight`` names an event whose region is drawn red."""
    nodes, flow_arcs, trigger_arcs = (set(), set(), set())
    if highlight is not None:
        nodes, flow_arcs, trigger_arcs = _region_sets(model, highlight)

    lines = [f"digraph {_q(model.name)} {{",
             "  graph [compound=true, rankdir=LR];",
             '  node [fontname="Helvetica"];',
             '  edge [fontname="Helvetica"];']

    def node_line(ref: StageRef, label: str, shape: str, indent: str) -> str:
        attrs = f"label={_q(label)}, shape={shape}"
        if ref in nodes:
            attrs += ", " + HIGHLIGHT
        return f"{indent}{_q(str(ref))} [{attrs}];"

    def emit(m: Machine, depth: int) -> None:
        pad = "  " * depth
        if m.opaque:
            lines.append(node_line(StageRef(m.path, None), m.name, OPAQUE_SHAPE, pad))
            return
        lines.append(f"{pad}subgraph {_q('cluster_' + m.path)} {{")
        lines.append(f"{pad}  label={_q(m.name)};")
        for kind in m.stages:
            lines.append(node_line(StageRef(m.path, kind), kind.value,
                                   STAGE_SHAPES[kind], pad + "  "))
        for sub in m.submachines:
            emit(sub, depth + 1)
        lines.append(f"{pad}}}")

    emit(model.root, 1)
    for f in model.flows:
        attrs = f"label={_q(f.thing)}"
        if (f.source, f.target) in flow_arcs:
            attrs += ", " + HIGHLIGHT
        lines.append(f"  {_q(str(f.source))} -> {_q(str(f.target))} [{attrs}];")
    for t in model.triggers:
        attrs = "style=dashed"
        if (t.source, t.target) in trigger_arcs:
            attrs += ", " + HIGHLIGHT
        lines.append(f"  {_q(str(t.source))} -> {_q(str(t.target))} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_event_timeline(trace: Trace, model: Model) -> str:
    """Tab-separated ``event start end`` rows, ordered by start then name."""
    rows = ["event\tstart\tend"]
    for o in occurrences(model, trace):
        rows.append(f"{o.name}\t{o.start}\t{o.end}")
    return "\n".join(rows) + "\n"
