"""Stage-adjacency and boundary rules for thinging-machine models."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from . import diagnostics as dg
from .diagnostics import Diagnostic
from .errors import UnknownCode
from .events import validate_event
from .model import Model, SourceSpan, StageKind, StageRef

K = StageKind
WITHIN = "within-machine"
CROSS = "cross-machine"


@dataclass(frozen=True)
class AdjacencyRule:
    source: StageKind
    target: StageKind
    scope: str

    def __str__(self) -> str:
        return f"{self.source.value} -> {self.target.value} ({self.scope})"


# Legal within-machine successors. Transfer is both the outbound exit (after
# release) and the inbound entry (before receive/arrive).
_SUCCESSORS = {
    K.CREATE: (K.PROCESS, K.RELEASE),
    K.RECEIVE: (K.PROCESS, K.RELEASE),
    K.ARRIVE: (K.ACCEPT,),
    K.ACCEPT: (K.PROCESS, K.RELEASE),
    K.PROCESS: (K.RELEASE,),
    K.RELEASE: (K.TRANSFER,),
    K.TRANSFER: (K.RECEIVE, K.ARRIVE),
}

ADJACENCY_RULES: tuple[AdjacencyRule, ...] = tuple(
    AdjacencyRule(src, dst, WITHIN) for src, dsts in _SUCCESSORS.items() for dst in dsts
) + (AdjacencyRule(K.TRANSFER, K.TRANSFER, CROSS),)

_ALLOWED = {(r.source, r.target, r.scope) for r in ADJACENCY_RULES}


def successors(kind: StageKind) -> tuple[StageKind, ...]:
    return _SUCCESSORS[kind]


def rule_allows(source: StageKind, target: StageKind, scope: str) -> bool:
    return (source, target, scope) in _ALLOWED


def _succ_table() -> str:
    return "; ".join(
        f"{k.value} -> {{{', '.join(s.value for s in v) or 'none'}}}"
        for k, v in _SUCCESSORS.items()
    )


EXPLANATIONS = {
    "lexical-error": "The source contains a character that is not part of the model syntax.",
    "syntax-error": "The declaration does not follow the model grammar.",
    "duplicate-declaration": "The same machine, stage, thing, arc, event or chronology edge is declared twice.",
    "dangling-reference": "A reference names a machine, stage, arc or event that is not declared.",
    "implicit-parent": "A machine path named a parent that was never declared; it was created without stages.",
    "root-shadowed": "A top-level machine may not share the model's name, because that name addresses the root.",
    "illegal-adjacency": (
        "A flow inside one machine must follow the stage order. Legal within-machine "
        "successors: " + _succ_table() + "."
    ),
    "boundary-violation": (
        "Things cross machine boundaries only through transfer stages: the only legal "
        "flow between two machines is transfer -> transfer. Release marks a thing as "
        "ready to leave; transfer moves it."
    ),
    "illegal-trigger-target": (
        "A trigger may create a new thing (target a create stage) or activate inflow "
        "into another machine (target that machine's transfer stage); any other target is illegal."
    ),
    "undeclared-thing": "Every flow is labelled with a thing kind that must be declared with 'thing'.",
    "release-without-transfer": "A machine that releases things needs a transfer stage to move them out.",
    "accept-without-arrive": "Accept decides on things that have arrived; a machine with accept needs arrive.",
    "arrive-without-accept": "Arriving things must be accepted or rejected; a machine with arrive needs accept.",
    "receive-conflict": "Receive is arrive and accept fused; one machine cannot hold both forms.",
    "self-loop": "An arc may not start and end at the same stage.",
    "ambiguous-create": "A create stage must produce a single thing kind; its outgoing flows carry several.",
    "empty-region": "An event needs at least one stage or arc in its region.",
    "region-disconnected": "An event region must be one connected sub-diagram of stages, flows and triggers.",
    "chronology-cycle": "Chronology edges order event starts and must not form a cycle; the message names the cycle.",
    "chronology-violation": "An event started no later than an event that the chronology says precedes it.",
    "event-never-occurred": "An event named in the chronology never fired in the trace, so its ordering is vacuous.",
    "unreachable-stage": "No flow or trigger reaches this stage and it is not a create stage, so no thing can enter it.",
    "unknown-event": "The requested event is not declared in the model.",
}


def explain(code: str) -> str:
    """Fixed explanation for a diagnostic code."""
    try:
        return EXPLANATIONS[code]
    except KeyError:
        raise UnknownCode(f"unknown diagnostic code {code!r}") from None


def created_kind(model: Model, ref: StageRef) -> str:
    """Thing kind born at a create stage: the label of its outgoing flows.

    A create stage without outgoing flows creates a thing named after its machine.
    """
    kinds = sorted({f.thing for f in model.flows if f.source == ref})
    if kinds:
        return kinds[0]
    return ref.path.rsplit(".", 1)[-1]


def validate(model: Model) -> list[Diagnostic]:
    """All structural and semantic diagnostics for ``model``, ordered by position."""
    out: list[Diagnostic] = []
    spans = model.spans

    def span(*key) -> SourceSpan:
        return spans.get(key, SourceSpan())

    root = model.root.path
    for m in model.root.walk():
        s = span("machine", m.path)
        if m.parent == root and m.name == root:
            out.append(dg.error("root-shadowed", f"machine {m.path} shadows the root name", s))
        if m.has(K.RECEIVE) and (m.has(K.ARRIVE) or m.has(K.ACCEPT)):
            out.append(dg.error("receive-conflict", f"machine {m.path} has receive and arrive/accept", s))
        if m.has(K.ARRIVE) and not m.has(K.ACCEPT):
            out.append(dg.error("arrive-without-accept", f"machine {m.path} has arrive but no accept", s))
        if m.has(K.ACCEPT) and not m.has(K.ARRIVE):
            out.append(dg.error("accept-without-arrive", f"machine {m.path} has accept but no arrive", s))
        if m.has(K.RELEASE) and not m.has(K.TRANSFER):
            out.append(dg.error("release-without-transfer", f"machine {m.path} has release but no transfer", s))
        names = Counter(sub.name for sub in m.submachines)
        for name, n in names.items():
            if n > 1:
                out.append(dg.error("duplicate-declaration", f"machine {m.path}.{name} declared {n} times", s))

    things = set(model.things)
    flow_counts = Counter((f.thing, f.source, f.target) for f in model.flows)
    for f in model.flows:
        s = span("flow", f.thing, f.source, f.target)
        bad = [r for r in (f.source, f.target) if not model.has_stage(r)]
        if bad:
            out.append(dg.error("dangling-reference", f"flow {f}: no stage {bad[0]}", s))
            continue
        if f.thing not in things:
            out.append(dg.error(
                "undeclared-thing", f"flow {f}: thing {f.thing} is not declared",
                span("thing-use", f.thing, f.source, f.target) if ("thing-use", f.thing, f.source, f.target) in spans else s))
        if f.source == f.target:
            out.append(dg.error("self-loop", f"flow {f} starts and ends at the same stage", s))
            continue
        if f.source.opaque or f.target.opaque:
            continue
        if flow_counts[(f.thing, f.source, f.target)] > 1:
            out.append(dg.error("duplicate-declaration", f"flow {f} declared more than once", s))
        src, dst = f.source.kind, f.target.kind
        if f.source.path == f.target.path:
            if not rule_allows(src, dst, WITHIN):
                legal = ", ".join(k.value for k in successors(src)) or "none"
                out.append(dg.error(
                    "illegal-adjacency",
                    f"flow {f}: {src.value} cannot flow to {dst.value} inside a machine "
                    f"(legal: {legal})", s))
        elif not rule_allows(src, dst, CROSS):
            out.append(dg.error(
                "boundary-violation",
                f"flow {f}: only transfer -> transfer may cross from {f.source.path} to {f.target.path}",
                s))

    trig_counts = Counter((t.source, t.target) for t in model.triggers)
    for t in model.triggers:
        s = span("trigger", t.source, t.target)
        bad = [r for r in (t.source, t.target) if not model.has_stage(r)]
        if bad:
            out.append(dg.error("dangling-reference", f"trigger {t}: no stage {bad[0]}", s))
            continue
        if t.source == t.target:
            out.append(dg.error("self-loop", f"trigger {t} starts and ends at the same stage", s))
            continue
        if trig_counts[(t.source, t.target)] > 1 and not (t.source.opaque or t.target.opaque):
            out.append(dg.error("duplicate-declaration", f"trigger {t} declared more than once", s))
        if t.target.opaque:
            continue
        if t.target.kind is K.CREATE:
            continue
        if t.target.kind is K.TRANSFER and t.target.path != t.source.path:
            continue
        out.append(dg.error(
            "illegal-trigger-target",
            f"trigger {t}: target must be a create stage or another machine's transfer", s))

    for ref in model.stages():
        if ref.kind is K.CREATE:
            labels = {f.thing for f in model.flows if f.source == ref}
            if len(labels) > 1:
                out.append(dg.error(
                    "ambiguous-create",
                    f"{ref} creates several thing kinds: {', '.join(sorted(labels))}",
                    span("machine", ref.path)))
            continue
        reached = any(f.target == ref for f in model.flows) or any(
            t.target == ref for t in model.triggers)
        if not reached:
            out.append(dg.warning(
                "unreachable-stage", f"no flow or trigger enters {ref}", span("machine", ref.path)))

    names = {e.name for e in model.events}
    for ev in model.events:
        out.extend(validate_event(model, ev))
    for a, b in model.chronology.edges:
        s = span("edge", a, b)
        for n in (a, b):
            if n not in names:
                out.append(dg.error("dangling-reference", f"chronology: event {n} is not declared", s))
    cycle = model.chronology.find_cycle()
    if cycle:
        s = span("edge", cycle[0], cycle[1])
        out.append(dg.error(
            "chronology-cycle", "chronology cycle: " + " -> ".join(cycle), s))

    return dg.ordered(_unique(out))


def _unique(diags):
    seen = set()
    res = []
    for d in diags:
        if d not in seen:
            seen.add(d)
            res.append(d)
    return res


def is_valid(model: Model) -> bool:
    return not dg.errors(validate(model))
