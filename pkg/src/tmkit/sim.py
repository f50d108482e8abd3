"""Deterministic discrete-event simulation of a thinging-machine model.

Each tick runs in a fixed order:

1. scheduled spawns create thing instances at create stages (config order);
2. triggers that fell due fire: a create target gets a fresh instance, a
   transfer target gains one admission for its next inbound thing;
3. every instance whose stage duration has elapsed moves along the first
   open eligible flow (tie-break: target path, then canonical kind order),
   waits if all eligible flows are gated shut, or is retired when it has none;
4. each stage fired this tick schedules its triggers for the tick its own
   duration elapses.

A transfer stage that is the target of any trigger is *gated*: cross-machine
flows into it need an admission. Instances left waiting once nothing else can
happen are retired as stranded.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from . import diagnostics as dg
from .diagnostics import Diagnostic
from .errors import BudgetExceeded, ConfigError, InvalidModel, NondeterministicChoice
from .events import occurrences
from .kernels import enumerate_encoded
from .model import Model, SourceSpan, StageKind, StageRef
from .net import Net, compile_net
from .trace import FLOW, RETIRED, SPAWN, TRIGGER, Firing, Trace
from .validate import validate

MAX_BUDGET = 12


@dataclass(frozen=True)
class Spawn:
    stage: str
    count: int = 1
    start: int = 1

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ConfigError(f"spawn {self.stage}: count must be >= 1")
        if self.start < 1:
            raise ConfigError(f"spawn {self.stage}: start tick must be >= 1")


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    max_ticks: int = 100
    spawns: tuple[Spawn, ...] = ()
    durations: Mapping[StageKind, int] = field(default_factory=dict)
    accept: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.max_ticks < 1:
            raise ConfigError("max_ticks must be >= 1")
        for kind, d in self.durations.items():
            if d < 1:
                raise ConfigError(f"duration.{kind.value} must be >= 1")
        for path, policy in self.accept.items():
            if policy not in ("always", "never"):
                raise ConfigError(f"accept.{path} must be 'always' or 'never'")


_SPAWN_RE = re.compile(
    r"^\s*(?P<ref>[A-Za-z_][\w.]*)\s*(?:@\s*(?P<tick>\d+))?\s*(?:x\s*(?P<count>\d+))?\s*$"
)


def parse_spawn(text: str) -> Spawn:
    m = _SPAWN_RE.match(text)
    if not m:
        raise ConfigError(f"bad spawn {text!r}; expected 'path.create @ tick x count'")
    return Spawn(m["ref"], int(m["count"] or 1), int(m["tick"] or 1))


def parse_config(text: str) -> SimConfig:
    """Parse the ``key = value`` config format.

    Keys: ``seed``, ``max_ticks``, ``spawn`` (repeatable),
    ``duration.<kind>``, ``accept.<machine path>``. Values may be quoted.
    """
    seed, max_ticks = 0, 100
    spawns: list[Spawn] = []
    durations: dict[StageKind, int] = {}
    accept: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = key.strip(), value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        try:
            if key == "seed":
                seed = int(value)
            elif key == "max_ticks":
                max_ticks = int(value)
            elif key == "spawn":
                spawns.append(parse_spawn(value))
            elif key.startswith("duration."):
                durations[StageKind(key[len("duration."):])] = int(value)
            elif key.startswith("accept."):
                accept[key[len("accept."):]] = value
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return SimConfig(seed, max_ticks, tuple(spawns), durations, accept)


def load_config(path) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _check_config(model: Model, config: SimConfig) -> list[StageRef]:
    refs = []
    for sp in config.spawns:
        ref = model.ref(sp.stage)
        if ref.kind is not StageKind.CREATE or not model.has_stage(ref):
            raise ConfigError(f"spawn {sp.stage} does not name a create stage")
        refs.append(ref)
    for path in config.accept:
        ref = StageRef(model.qualify(path), StageKind.ACCEPT)
        if not model.has_stage(ref):
            raise ConfigError(f"accept.{path}: machine has no accept stage")
    return refs


def _prepare(model: Model, config: SimConfig) -> tuple[Net, list[StageRef]]:
    if any(m.opaque for m in model.root.walk()):
        raise ValueError("simulation needs a fully unfolded model")
    errs = dg.errors(validate(model))
    if errs:
        raise InvalidModel(errs)
    refs = _check_config(model, config)
    never = [p for p, policy in config.accept.items() if policy == "never"]
    return compile_net(model, config.durations, never), refs


class _Instance:
    __slots__ = ("seq", "ident", "kind", "stage", "mode", "ready", "waiting")

    def __init__(self, seq, ident, kind, stage, ready):
        self.seq = seq
        self.ident = ident
        self.kind = kind
        self.stage = stage
        self.mode = 0
        self.ready = ready
        self.waiting = False


def simulate(model: Model, config: SimConfig) -> Trace:
    """Run ``model`` under ``config`` and return its trace."""
    net, spawn_refs = _prepare(model, config)
    index = {r: i for i, r in enumerate(net.refs)}
    stages = net.stages
    kinds = net.kinds
    dur = net.duration

    spawns_at: dict[int, list[int]] = {}
    for sp, ref in zip(config.spawns, spawn_refs):
        spawns_at.setdefault(sp.start, []).extend([index[ref]] * sp.count)
    if not spawns_at:
        return Trace((), 0, True, config.seed)

    records: list[Firing] = []
    live: list[_Instance] = []
    counters = [0] * len(kinds)
    seq = 0
    permits = [0] * len(stages)
    due: dict[int, list[int]] = {}
    last_spawn = max(spawns_at)

    def fire(inst: _Instance, s: int, tick: int, cause: str, fired: list[int]) -> None:
        inst.stage = s
        inst.ready = tick + dur[s]
        records.append(Firing(tick, stages[s], inst.ident, cause))
        fired.append(s)

    def create(s: int, tick: int, cause: str, fired: list[int]) -> None:
        nonlocal seq
        k = net.created[s]
        counters[k] += 1
        seq += 1
        inst = _Instance(seq, f"{kinds[k]}#{counters[k]}", k, s, tick)
        live.append(inst)
        fire(inst, s, tick, cause, fired)

    def retire(inst: _Instance, tick: int) -> None:
        records.append(Firing(tick, stages[inst.stage], inst.ident, RETIRED))
        live.remove(inst)

    horizon = config.max_ticks
    quiescent = False
    for tick in range(1, config.max_ticks + 1):
        fired: list[int] = []
        for s in spawns_at.get(tick, ()):
            create(s, tick, SPAWN, fired)
        for s in due.pop(tick, ()):
            if _is_create(net, s):
                create(s, tick, TRIGGER, fired)
            else:
                permits[s] += 1
        for inst in sorted(live, key=lambda i: i.seq):
            if inst.ready > tick:
                continue
            s = inst.stage
            if net.reject[s]:
                retire(inst, tick)
                continue
            cands = net.candidates(s, inst.kind, inst.mode)
            if not cands:
                retire(inst, tick)
                continue
            chosen = None
            seen_targets = set()
            for c in cands:
                t = net.cand_target[c]
                if t in seen_targets:
                    raise NondeterministicChoice(
                        f"{inst.ident} at {stages[s]} has two flows to {stages[t]}")
                seen_targets.add(t)
                if net.cand_cross[c] and net.gated[t]:
                    if permits[t] == 0:
                        continue
                    permits[t] -= 1
                chosen = c
                break
            if chosen is None:
                inst.waiting = True
                continue
            inst.waiting = False
            inst.mode = net.cand_cross[chosen]
            fire(inst, net.cand_target[chosen], tick, FLOW, fired)
        for s in fired:
            for j in range(net.trig_start[s], net.trig_end[s]):
                due.setdefault(tick + dur[s], []).append(net.trig_target[j])

        future = tick < last_spawn or bool(due)
        if not live and not future:
            quiescent, horizon = True, tick
            break
        if not future and all(i.waiting for i in live) and all(i.ready <= tick for i in live):
            for inst in sorted(live, key=lambda i: i.seq):
                retire(inst, tick)
            quiescent, horizon = True, tick
            break
    return Trace(tuple(records), horizon, quiescent, config.seed)


def _is_create(net: Net, s: int) -> bool:
    return net.refs[s].kind is StageKind.CREATE


def check_chronology(model: Model, trace: Trace) -> list[Diagnostic]:
    """Errors for chronology edges whose events start out of order.

    Events named in the chronology that never occur produce warnings.
    """
    starts = {o.name: o.start for o in occurrences(model, trace)}
    out: list[Diagnostic] = []
    missing = set()
    for a, b in model.chronology.edges:
        span = model.spans.get(("edge", a, b), SourceSpan())
        if a not in starts or b not in starts:
            for n in (a, b):
                if n not in starts and n not in missing:
                    missing.add(n)
                    out.append(dg.warning(
                        "event-never-occurred", f"event {n} never occurred in the trace",
                        model.spans.get(("event", n), span)))
            continue
        if not starts[a] < starts[b]:
            out.append(dg.error(
                "chronology-violation",
                f"event {a} (first start {starts[a]}) must start before "
                f"event {b} (first start {starts[b]})",
                span))
    return dg.ordered(out)


def enumerate_interleavings(
    model: Model,
    config: SimConfig,
    budget: int = MAX_BUDGET,
    truncate: bool = False,
) -> set[tuple[tuple[str, str], ...]]:
    """Every firing sequence the flow/trigger rules allow, up to ``budget`` firings.

    Sequences are tuples of ``(stage, thing)`` pairs comparable with
    :meth:`Trace.sequence`. Without ``truncate``, an execution longer than
    ``budget`` raises :class:`BudgetExceeded`; with it, such executions are cut
    to their first ``budget`` firings.
    """
    if not 0 <= budget <= MAX_BUDGET:
        raise BudgetExceeded(f"budget {budget} outside 0..{MAX_BUDGET}")
    net, spawn_refs = _prepare(model, config)
    index = {r: i for i, r in enumerate(net.refs)}
    spawn_stages = [
        index[ref]
        for sp, ref in sorted(zip(config.spawns, spawn_refs), key=lambda p: p[0].start)
        for _ in range(sp.count)
    ]
    encoded, exceeded = enumerate_encoded(net, spawn_stages, budget)
    if exceeded and not truncate:
        raise BudgetExceeded(f"some execution needs more than {budget} firings")
    kinds, stages = net.kinds, net.stages
    return {
        tuple((stages[s], f"{kinds[k]}#{n}") for s, k, n in seq) for seq in encoded
    }


def truncated_sequence(trace: Trace, budget: int = MAX_BUDGET) -> tuple:
    return trace.sequence()[:budget]
