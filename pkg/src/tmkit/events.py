"""Events as regions of the static model, their occurrences and system state.

An event occurrence starts at the first firing of any stage in its region and
lasts until the last such firing, but never less than the event's declared
duration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from . import diagnostics as dg
from .diagnostics import Diagnostic
from .errors import TickOutOfRange
from .model import ArcRef, Chronology, Event, Model, SourceSpan, StageRef
from .trace import RETIRED, Trace

__all__ = [
    "Event",
    "Chronology",
    "Occurrence",
    "SystemState",
    "elementary_events",
    "validate_event",
    "occurrences",
    "state_at",
]


def elementary_events(model: Model) -> list[Event]:
    """One single-stage event per stage, in canonical stage order."""
    return [Event(str(ref), (ref,), 1) for ref in model.stages()]


def _arc_exists(model: Model, arc: ArcRef) -> bool:
    if arc.trigger:
        return any(t.source == arc.source and t.target == arc.target for t in model.triggers)
    return any(f.source == arc.source and f.target == arc.target for f in model.flows)


def region_components(model: Model, stages) -> list[set[StageRef]]:
    """Weakly connected components of the sub-diagram induced by ``stages``."""
    nodes = set(stages)
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for arc in list(model.flows) + list(model.triggers):
        if arc.source in nodes and arc.target in nodes:
            a, b = find(arc.source), find(arc.target)
            if a != b:
                parent[a] = b
    groups: dict[StageRef, set[StageRef]] = {}
    for n in nodes:
        groups.setdefault(find(n), set()).add(n)
    return sorted(groups.values(), key=lambda g: min(g))


def validate_event(model: Model, event: Event) -> list[Diagnostic]:
    """Empty iff every region reference resolves and the region is connected."""
    span = model.spans.get(("event", event.name), SourceSpan())
    diags: list[Diagnostic] = []
    if not event.region:
        return [dg.error("empty-region", f"event {event.name} has an empty region", span)]
    for ref in event.region:
        if isinstance(ref, StageRef):
            if not model.has_stage(ref):
                diags.append(dg.error(
                    "dangling-reference", f"event {event.name}: no stage {ref}", span))
        else:
            missing = [s for s in (ref.source, ref.target) if not model.has_stage(s)]
            if missing:
                diags.append(dg.error(
                    "dangling-reference", f"event {event.name}: no stage {missing[0]}", span))
            elif not _arc_exists(model, ref):
                what = "trigger" if ref.trigger else "flow"
                diags.append(dg.error(
                    "dangling-reference", f"event {event.name}: no {what} {ref}", span))
    if diags:
        return diags
    parts = region_components(model, event.stages)
    if len(parts) > 1:
        listing = " | ".join(", ".join(str(s) for s in sorted(p)) for p in parts)
        diags.append(dg.error(
            "region-disconnected",
            f"event {event.name} region falls apart into {len(parts)} pieces: {listing}",
            span,
        ))
    return diags


@dataclass(frozen=True)
class Occurrence:
    name: str
    start: int
    end: int

    def contains(self, tick: int) -> bool:
        return self.start <= tick <= self.end


def occurrences(model: Model, trace: Trace, events=None) -> list[Occurrence]:
    """Occurrence interval of every event that fires in ``trace``.

    Sorted by start tick, then name. Events whose region never fires are
    absent from the result.
    """
    if events is None:
        events = model.events
    first: dict[str, int] = {}
    last: dict[str, int] = {}
    by_stage: dict[str, list[Event]] = {}
    for ev in events:
        for s in ev.stages:
            by_stage.setdefault(str(s), []).append(ev)
    for rec in trace.firings:
        for ev in by_stage.get(rec.stage, ()):
            first.setdefault(ev.name, rec.tick)
            last[ev.name] = rec.tick
    out = []
    for ev in events:
        if ev.name in first:
            start = first[ev.name]
            out.append(Occurrence(ev.name, start, max(last[ev.name], start + ev.duration - 1)))
    return sorted(out, key=lambda o: (o.start, o.name))


def first_starts(model: Model, trace: Trace) -> dict[str, int]:
    return {o.name: o.start for o in occurrences(model, trace)}


@dataclass(frozen=True)
class SystemState:
    time: int
    active: tuple[str, ...] = ()
    positions: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "time": self.time,
            "active": list(self.active),
            "positions": dict(sorted(self.positions.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def state_at(model: Model, trace: Trace, t: int,
             occ: Optional[list[Occurrence]] = None) -> SystemState:
    """Active events and live-instance positions at tick ``t``."""
    if not 0 <= t <= trace.horizon:
        raise TickOutOfRange(f"tick {t} outside 0..{trace.horizon}")
    positions: dict[str, str] = {}
    for rec in trace.records:
        if rec.tick > t:
            break
        if rec.cause == RETIRED:
            positions.pop(rec.thing, None)
        else:
            positions[rec.thing] = rec.stage
    if occ is None:
        occ = occurrences(model, trace)
    active = tuple(sorted(o.name for o in occ if o.contains(t)))
    return SystemState(t, active, positions)
