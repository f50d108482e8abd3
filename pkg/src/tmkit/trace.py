"""Simulation traces and their JSON-lines form."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

SPAWN = "spawn"
FLOW = "flow"
TRIGGER = "trigger"
RETIRED = "retired"
CAUSES = (SPAWN, FLOW, TRIGGER, RETIRED)


@dataclass(frozen=True)
class Firing:
    """One trace record. ``cause == "retired"`` marks an instance leaving."""

    tick: int
    stage: str
    thing: str
    cause: str

    @property
    def is_firing(self) -> bool:
        return self.cause != RETIRED

    @property
    def kind(self) -> str:
        return self.thing.split("#", 1)[0]

    def to_json(self) -> str:
        return json.dumps(
            {"tick": self.tick, "stage": self.stage, "thing": self.thing, "cause": self.cause}
        )

    @classmethod
    def from_json(cls, line: str) -> "Firing":
        d = json.loads(line)
        if d["cause"] not in CAUSES:
            raise ValueError(f"unknown cause {d['cause']!r}")
        return cls(int(d["tick"]), d["stage"], d["thing"], d["cause"])


@dataclass(frozen=True)
class Trace:
    records: tuple[Firing, ...]
    horizon: int
    quiescent: bool = True
    seed: int = 0

    @property
    def firings(self) -> tuple[Firing, ...]:
        """Stage firings only (retirement records dropped)."""
        return tuple(r for r in self.records if r.is_firing)

    def sequence(self) -> tuple[tuple[str, str], ...]:
        """Firing order as ``(stage, thing)`` pairs, without ticks."""
        return tuple((r.stage, r.thing) for r in self.firings)

    def instances(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.records:
            seen.setdefault(r.thing, None)
        return list(seen)

    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    @classmethod
    def from_jsonl(cls, text: str, horizon: Optional[int] = None) -> "Trace":
        records = tuple(Firing.from_json(l) for l in text.splitlines() if l.strip())
        if horizon is None:
            horizon = records[-1].tick if records else 0
        return cls(records, horizon)

    @classmethod
    def empty(cls) -> "Trace":
        return cls((), 0)


def conservation(trace: Trace) -> dict[str, int]:
    """Counts for the spawned/created = retired + live balance."""
    spawned = created = retired = 0
    live: set[str] = set()
    for r in trace.records:
        if r.cause == SPAWN:
            spawned += 1
            live.add(r.thing)
        elif r.cause == TRIGGER:
            created += 1
            live.add(r.thing)
        elif r.cause == RETIRED:
            retired += 1
            live.discard(r.thing)
    return {"spawned": spawned, "created": created, "retired": retired, "live": len(live)}

