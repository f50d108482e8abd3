"""In-memory representation of a thinging-machine model.

A model is a tree of machines rooted at the grand machine. Each machine owns
at most one stage of each kind; flows (solid arcs, labelled with a thing kind)
and triggers (dashed arcs) connect stages. All values are immutable; every
transformation returns a new model.

Paths are absolute and dot separated, starting with the root's name. The
helper :meth:`Model.qualify` also accepts paths written relative to the root.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

from .errors import CannotFuse, UnresolvedReference

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class StageKind(enum.Enum):
    # Definition order is the canonical print order.
    CREATE = "create"
    RECEIVE = "receive"
    ARRIVE = "arrive"
    ACCEPT = "accept"
    PROCESS = "process"
    RELEASE = "release"
    TRANSFER = "transfer"

    @property
    def order(self) -> int:
        return _KIND_ORDER[self]

    @classmethod
    def parse(cls, text: str) -> "StageKind":
        return cls(text)

    def __lt__(self, other: "StageKind") -> bool:
        return self.order < other.order


_KIND_ORDER = {k: i for i, k in enumerate(StageKind)}


def is_identifier(text: str) -> bool:
    return bool(IDENT_RE.match(text))


@dataclass(frozen=True)
class StageRef:
    """A stage addressed by machine path and kind.

    ``kind`` is ``None`` only for the opaque node of a folded machine.
    """

    path: str
    kind: Optional[StageKind]

    def __str__(self) -> str:
        if self.kind is None:
            return self.path
        return f"{self.path}.{self.kind.value}"

    @property
    def sort_key(self) -> tuple:
        return (self.path, -1 if self.kind is None else self.kind.order)

    def __lt__(self, other: "StageRef") -> bool:
        return self.sort_key < other.sort_key

    @property
    def opaque(self) -> bool:
        return self.kind is None


@dataclass(frozen=True)
class Flow:
    thing: str
    source: StageRef
    target: StageRef

    @property
    def sort_key(self) -> tuple:
        return (self.source.sort_key, self.target.sort_key, self.thing)

    def __str__(self) -> str:
        return f"{self.thing} : {self.source} -> {self.target}"


@dataclass(frozen=True)
class Trigger:
    source: StageRef
    target: StageRef

    @property
    def sort_key(self) -> tuple:
        return (self.source.sort_key, self.target.sort_key)

    def __str__(self) -> str:
        return f"{self.source} ~> {self.target}"


@dataclass(frozen=True)
class ArcRef:
    """A flow (``trigger=False``) or trigger arc named inside an event region."""

    source: StageRef
    target: StageRef
    trigger: bool = False

    @property
    def sort_key(self) -> tuple:
        return (self.source.sort_key, self.target.sort_key, self.trigger)

    def __str__(self) -> str:
        arrow = "~>" if self.trigger else "->"
        return f"{self.source} {arrow} {self.target}"


RegionRef = Union[StageRef, ArcRef]


def _region_key(ref: RegionRef) -> tuple:
    if isinstance(ref, StageRef):
        return (0, ref.sort_key)
    return (1, ref.sort_key)


@dataclass(frozen=True)
class Event:
    """A named region of the static model with a minimum time extent."""

    name: str
    region: tuple[RegionRef, ...]
    duration: int = 1

    def __post_init__(self) -> None:
        if self.duration < 1:
            raise ValueError(f"event {self.name!r}: duration must be >= 1")
        object.__setattr__(
            self, "region", tuple(sorted(set(self.region), key=_region_key))
        )

    @property
    def stages(self) -> frozenset[StageRef]:
        """Stages named directly plus the endpoints of named arcs."""
        out = set()
        for ref in self.region:
            if isinstance(ref, StageRef):
                out.add(ref)
            else:
                out.add(ref.source)
                out.add(ref.target)
        return frozenset(out)

    @property
    def arcs(self) -> tuple[ArcRef, ...]:
        return tuple(r for r in self.region if isinstance(r, ArcRef))


@dataclass(frozen=True)
class Chronology:
    """Precedence edges ``(before, after)`` between event names."""

    edges: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(sorted(set(self.edges))))

    def find_cycle(self) -> Optional[list[str]]:
        """Return one cycle as ``[e1, e2, ..., e1]`` or None if acyclic."""
        succ: dict[str, list[str]] = {}
        for a, b in self.edges:
            succ.setdefault(a, []).append(b)
        color: dict[str, int] = {}
        stack: list[str] = []

        def visit(node: str) -> Optional[list[str]]:
            color[node] = 1
            stack.append(node)
            for nxt in sorted(succ.get(node, ())):
                state = color.get(nxt, 0)
                if state == 1:
                    return stack[stack.index(nxt):] + [nxt]
                if state == 0:
                    found = visit(nxt)
                    if found:
                        return found
            stack.pop()
            color[node] = 2
            return None

        for node in sorted(succ):
            if color.get(node, 0) == 0:
                found = visit(node)
                if found:
                    return found
        return None


@dataclass(frozen=True)
class Machine:
    name: str
    path: str
    stages: tuple[StageKind, ...] = ()
    submachines: tuple["Machine", ...] = ()
    parent: Optional[str] = None
    opaque: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(sorted(set(self.stages))))

    def has(self, kind: StageKind) -> bool:
        return kind in self.stages

    def walk(self) -> Iterator["Machine"]:
        """Pre-order traversal, siblings in declaration order."""
        yield self
        for sub in self.submachines:
            yield from sub.walk()

    def child(self, name: str) -> Optional["Machine"]:
        for sub in self.submachines:
            if sub.name == name:
                return sub
        return None


def is_within(path: str, ancestor: str) -> bool:
    return path == ancestor or path.startswith(ancestor + ".")


@dataclass(frozen=True)
class SourceSpan:
    line: int = 1
    column: int = 1
    length: int = 1

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1 or self.length < 1:
            raise ValueError("span line/column/length must be >= 1")


@dataclass(frozen=True)
class Model:
    """The grand machine plus its arcs, thing kinds, events and chronology.

    Collections other than the machine tree are kept sorted so that two models
    with the same content compare equal regardless of declaration order.
    ``spans`` maps declaration keys to source positions and is ignored by
    equality.
    """

    name: str
    root: Machine
    things: tuple[str, ...] = ()
    flows: tuple[Flow, ...] = ()
    triggers: tuple[Trigger, ...] = ()
    events: tuple[Event, ...] = ()
    chronology: Chronology = Chronology()
    spans: Mapping[tuple, SourceSpan] = field(
        default_factory=dict, compare=False, repr=False, hash=False
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "things", tuple(sorted(set(self.things))))
        object.__setattr__(
            self, "flows", tuple(sorted(self.flows, key=lambda f: f.sort_key))
        )
        object.__setattr__(
            self, "triggers", tuple(sorted(self.triggers, key=lambda t: t.sort_key))
        )
        object.__setattr__(
            self, "events", tuple(sorted(self.events, key=lambda e: e.name))
        )

    def __hash__(self) -> int:
        return hash((self.name, self.root, self.things, self.flows, self.triggers))

    # -- lookup -------------------------------------------------------------

    @cached_property
    def _machines(self) -> dict[str, Machine]:
        return {m.path: m for m in self.root.walk()}

    @cached_property
    def _events(self) -> dict[str, Event]:
        return {e.name: e for e in self.events}

    def machines(self) -> list[Machine]:
        return list(self.root.walk())

    def machine(self, path: str) -> Machine:
        try:
            return self._machines[self.qualify(path)]
        except KeyError:
            raise UnresolvedReference(f"no machine at path {path!r}") from None

    def has_machine(self, path: str) -> bool:
        return self.qualify(path) in self._machines

    def event(self, name: str) -> Event:
        return self._events[name]

    def has_event(self, name: str) -> bool:
        return name in self._events

    def qualify(self, path: str) -> str:
        """Absolute form of ``path``; paths not starting at the root are relative."""
        root = self.root.name
        if path == root or path.startswith(root + "."):
            return path
        return f"{root}.{path}"

    def relative(self, path: str) -> str:
        root = self.root.name
        if path == root:
            return root
        return path[len(root) + 1:] if path.startswith(root + ".") else path

    def stages(self) -> list[StageRef]:
        """Every stage in canonical order (pre-order machines, kind order)."""
        return [
            StageRef(m.path, k) for m in self.root.walk() for k in m.stages
        ]

    def has_stage(self, ref: StageRef) -> bool:
        m = self._machines.get(ref.path)
        if m is None:
            return False
        if ref.kind is None:
            return m.opaque
        return ref.kind in m.stages

    def ref(self, text: str) -> StageRef:
        """Parse ``path.kind`` (or a bare opaque path) into a qualified ref."""
        head, _, tail = text.rpartition(".")
        try:
            kind = StageKind(tail)
        except ValueError:
            return StageRef(self.qualify(text), None)
        return StageRef(self.qualify(head), kind)

    def flows_from(self, ref: StageRef) -> list[Flow]:
        return [f for f in self.flows if f.source == ref]

    def flows_into(self, ref: StageRef) -> list[Flow]:
        return [f for f in self.flows if f.target == ref]

    def with_(self, **changes) -> "Model":
        return replace(self, **changes)


def resolve_stage(model: Model, ref: Union[StageRef, str], kind=None) -> StageRef:
    """Return the qualified stage at ``ref`` or raise UnresolvedReference.

    ``ref`` may be a StageRef, a ``"path.kind"`` string, or a path with the
    kind passed separately. Receive never stands in for arrive/accept or the
    other way round.
    """
    if isinstance(ref, str):
        if kind is not None:
            ref = StageRef(model.qualify(ref), StageKind(kind) if isinstance(kind, str) else kind)
        else:
            ref = model.ref(ref)
    else:
        ref = StageRef(model.qualify(ref.path), ref.kind)
    if not model.has_stage(ref):
        raise UnresolvedReference(f"no stage {ref}")
    return ref


# -- tree helpers ---------------------------------------------------------------


def map_machines(root: Machine, fn: Callable[[Machine], Machine]) -> Machine:
    """Rebuild the tree bottom-up, applying ``fn`` to every machine."""
    subs = tuple(map_machines(s, fn) for s in root.submachines)
    return fn(replace(root, submachines=subs))


def _replace_at(root: Machine, path: str, new: Machine) -> Machine:
    if root.path == path:
        return new
    subs = tuple(
        _replace_at(s, path, new) if is_within(path, s.path) else s
        for s in root.submachines
    )
    return replace(root, submachines=subs)


def replace_machine(model: Model, path: str, new: Machine) -> Model:
    return model.with_(root=_replace_at(model.root, model.qualify(path), new))


# -- construction ---------------------------------------------------------------


class ModelBuilder:
    """Incremental, mutable construction of a :class:`Model`.

    Paths and stage references are given relative to the root (or absolute).
    Parents of a machine path are created on demand without stages.
    """

    def __init__(self, name: str):
        self.name = name
        self._stages: dict[str, list[StageKind]] = {name: []}
        self._children: dict[str, list[str]] = {name: []}
        self._opaque: set[str] = set()
        self.things: list[str] = []
        self.flows: list[Flow] = []
        self.triggers: list[Trigger] = []
        self.events: list[Event] = []
        self.edges: list[tuple[str, str]] = []
        self.spans: dict[tuple, SourceSpan] = {}

    def qualify(self, path: str) -> str:
        if path == self.name or path.startswith(self.name + "."):
            return path
        return f"{self.name}.{path}"

    def ref(self, text: Union[str, StageRef]) -> StageRef:
        if isinstance(text, StageRef):
            return StageRef(self.qualify(text.path), text.kind)
        head, _, tail = text.rpartition(".")
        try:
            return StageRef(self.qualify(head), StageKind(tail))
        except ValueError:
            return StageRef(self.qualify(text), None)

    def has_machine(self, path: str) -> bool:
        return self.qualify(path) in self._stages

    def ensure(self, path: str) -> list[str]:
        """Create ``path`` and any missing ancestors; return the created paths."""
        path = self.qualify(path)
        created = []
        parts = path.split(".")
        for i in range(2, len(parts) + 1):
            p = ".".join(parts[:i])
            if p not in self._stages:
                self._stages[p] = []
                self._children[p] = []
                self._children[".".join(parts[: i - 1])].append(p)
                created.append(p)
        return created

    def machine(self, path: str, *kinds: Union[StageKind, str], opaque: bool = False) -> "ModelBuilder":
        path = self.qualify(path)
        self.ensure(path)
        for k in kinds:
            k = StageKind(k) if isinstance(k, str) else k
            if k not in self._stages[path]:
                self._stages[path].append(k)
        if opaque:
            self._opaque.add(path)
        return self

    def thing(self, *names: str) -> "ModelBuilder":
        for n in names:
            if n not in self.things:
                self.things.append(n)
        return self

    def flow(self, thing: str, source, target) -> "ModelBuilder":
        self.flows.append(Flow(thing, self.ref(source), self.ref(target)))
        return self

    def trigger(self, source, target) -> "ModelBuilder":
        self.triggers.append(Trigger(self.ref(source), self.ref(target)))
        return self

    def event(self, name: str, region: Iterable, duration: int = 1) -> "ModelBuilder":
        refs: list[RegionRef] = []
        for item in region:
            if isinstance(item, (StageRef, ArcRef)):
                refs.append(item)
            elif isinstance(item, tuple):
                src, dst, *rest = item
                refs.append(ArcRef(self.ref(src), self.ref(dst), bool(rest and rest[0])))
            else:
                refs.append(self.ref(item))
        self.events.append(Event(name, tuple(refs), duration))
        return self

    def before(self, first: str, second: str) -> "ModelBuilder":
        self.edges.append((first, second))
        return self

    def _build_machine(self, path: str, parent: Optional[str]) -> Machine:
        return Machine(
            name=path.rsplit(".", 1)[-1],
            path=path,
            stages=tuple(self._stages[path]),
            submachines=tuple(self._build_machine(c, path) for c in self._children[path]),
            parent=parent,
            opaque=path in self._opaque,
        )

    def build(self) -> Model:
        return Model(
            name=self.name,
            root=self._build_machine(self.name, None),
            things=tuple(self.things),
            flows=tuple(self.flows),
            triggers=tuple(self.triggers),
            events=tuple(self.events),
            chronology=Chronology(tuple(self.edges)),
            spans=dict(self.spans),
        )


def submodel(model: Model, keep: Iterable[str]) -> Model:
    """Restrict ``model`` to the listed machine subtrees.

    Arcs, events and chronology edges touching dropped machines are removed.
    """
    keep = [model.qualify(p) for p in keep]

    def kept(path: str) -> bool:
        return path == model.root.path or any(
            is_within(path, k) or is_within(k, path) for k in keep
        )

    def inside(path: str) -> bool:
        return any(is_within(path, k) for k in keep)

    def prune(m: Machine) -> Machine:
        subs = tuple(prune(s) for s in m.submachines if kept(s.path))
        stages = m.stages if inside(m.path) else ()
        return replace(m, submachines=subs, stages=stages)

    root = prune(model.root)
    paths = {m.path: m for m in root.walk()}

    def ok(ref: StageRef) -> bool:
        m = paths.get(ref.path)
        return m is not None and (ref.kind is None or ref.kind in m.stages)

    flows = tuple(f for f in model.flows if ok(f.source) and ok(f.target))
    triggers = tuple(t for t in model.triggers if ok(t.source) and ok(t.target))
    events = []
    for ev in model.events:
        if all(ok(s) for s in ev.stages):
            events.append(ev)
    names = {e.name for e in events}
    edges = tuple((a, b) for a, b in model.chronology.edges if a in names and b in names)
    used = {f.thing for f in flows}
    return model.with_(
        root=root,
        things=tuple(t for t in model.things if t in used),
        flows=flows,
        triggers=triggers,
        events=tuple(events),
        chronology=Chronology(edges),
    )


# -- receive normalisation ------------------------------------------------------


def normalize_receive(model: Model, direction: str) -> Model:
    """Fuse arrive+accept into receive (``"fuse"``) or split it (``"unfuse"``)."""
    if direction == "fuse":
        return _fuse(model)
    if direction == "unfuse":
        return _unfuse(model)
    raise ValueError(f"direction must be 'fuse' or 'unfuse', not {direction!r}")


def _fuse(model: Model) -> Model:
    targets = [
        m for m in model.root.walk()
        if m.has(StageKind.ARRIVE) and m.has(StageKind.ACCEPT)
    ]
    if not targets:
        return model
    bad = []
    for m in targets:
        arrive = StageRef(m.path, StageKind.ARRIVE)
        accept = StageRef(m.path, StageKind.ACCEPT)
        out_ok = all(f.target == accept for f in model.flows if f.source == arrive)
        in_ok = all(f.source == arrive for f in model.flows if f.target == accept)
        has_link = any(f.source == arrive and f.target == accept for f in model.flows)
        # an arrive stage nothing flows into may stand unlinked
        has_link = has_link or not any(f.target == arrive for f in model.flows)
        if not (out_ok and in_ok and has_link) or m.has(StageKind.RECEIVE):
            bad.append(m.path)
    if bad:
        raise CannotFuse(bad)
    fused = {m.path for m in targets}

    def remap(ref: StageRef) -> StageRef:
        if ref.path in fused and ref.kind in (StageKind.ARRIVE, StageKind.ACCEPT):
            return StageRef(ref.path, StageKind.RECEIVE)
        return ref

    def fuse_machine(m: Machine) -> Machine:
        if m.path not in fused:
            return m
        kinds = [k for k in m.stages if k not in (StageKind.ARRIVE, StageKind.ACCEPT)]
        return replace(m, stages=tuple(kinds) + (StageKind.RECEIVE,))

    def internal(src: StageRef, dst: StageRef) -> bool:
        return (
            src.path == dst.path and src.path in fused
            and src.kind is StageKind.ARRIVE and dst.kind is StageKind.ACCEPT
        )

    flows = tuple(
        Flow(f.thing, remap(f.source), remap(f.target))
        for f in model.flows if not internal(f.source, f.target)
    )
    triggers = tuple(Trigger(remap(t.source), remap(t.target)) for t in model.triggers)
    events = []
    for ev in model.events:
        region = []
        for r in ev.region:
            if isinstance(r, StageRef):
                region.append(remap(r))
            elif internal(r.source, r.target):
                region.append(remap(r.source))
            else:
                region.append(ArcRef(remap(r.source), remap(r.target), r.trigger))
        events.append(Event(ev.name, tuple(region), ev.duration))
    return model.with_(
        root=map_machines(model.root, fuse_machine),
        flows=flows,
        triggers=triggers,
        events=tuple(events),
    )


def _unfuse(model: Model) -> Model:
    split = {m.path for m in model.root.walk() if m.has(StageKind.RECEIVE)}
    if not split:
        return model

    def as_target(ref: StageRef) -> StageRef:
        if ref.path in split and ref.kind is StageKind.RECEIVE:
            return StageRef(ref.path, StageKind.ARRIVE)
        return ref

    def as_source(ref: StageRef) -> StageRef:
        if ref.path in split and ref.kind is StageKind.RECEIVE:
            return StageRef(ref.path, StageKind.ACCEPT)
        return ref

    def split_machine(m: Machine) -> Machine:
        if m.path not in split:
            return m
        kinds = [k for k in m.stages if k is not StageKind.RECEIVE]
        return replace(m, stages=tuple(kinds) + (StageKind.ARRIVE, StageKind.ACCEPT))

    flows = [Flow(f.thing, as_source(f.source), as_target(f.target)) for f in model.flows]
    for path in sorted(split):
        receive = StageRef(path, StageKind.RECEIVE)
        kinds = sorted({f.thing for f in model.flows if f.target == receive})
        if not kinds:
            kinds = sorted({f.thing for f in model.flows if f.source == receive})
        for thing in kinds:
            flows.append(Flow(thing, StageRef(path, StageKind.ARRIVE), StageRef(path, StageKind.ACCEPT)))
    triggers = [Trigger(as_source(t.source), as_target(t.target)) for t in model.triggers]
    events = []
    for ev in model.events:
        region: list[RegionRef] = []
        for r in ev.region:
            if isinstance(r, StageRef) and r.path in split and r.kind is StageKind.RECEIVE:
                region.append(StageRef(r.path, StageKind.ARRIVE))
                region.append(StageRef(r.path, StageKind.ACCEPT))
            elif isinstance(r, StageRef):
                region.append(r)
            else:
                region.append(ArcRef(as_source(r.source), as_target(r.target), r.trigger))
        events.append(Event(ev.name, tuple(region), ev.duration))
    return model.with_(
        root=map_machines(model.root, split_machine),
        flows=tuple(flows),
        triggers=tuple(triggers),
        events=tuple(events),
    )
