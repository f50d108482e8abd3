"""Fold submachines into opaque nodes and unfold them again.

Folding is a view transformation: the folded model keeps every arc that
crosses the machine's boundary, re-attached to the opaque node, and drops the
machine's interior. :class:`FoldState` remembers the unfolded model, so any
set of folds can be undone exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import CannotFoldRoot, FoldConflict, PathNotFolded, PathNotFound
from .model import (
    ArcRef,
    Event,
    Flow,
    Machine,
    Model,
    StageRef,
    Trigger,
    is_within,
    replace_machine,
)


@dataclass(frozen=True)
class FoldState:
    folded: frozenset[str]
    original: Model

    def __post_init__(self) -> None:
        paths = sorted(self.folded)
        for a in paths:
            for b in paths:
                if a != b and is_within(b, a):
                    raise FoldConflict(f"{b} lies inside folded {a}")


def _fold_one(model: Model, path: str) -> Model:
    path = model.qualify(path)
    if path == model.root.path:
        raise CannotFoldRoot("the root machine cannot be folded")
    if not model.has_machine(path):
        raise PathNotFound(f"no machine at path {path!r}")
    machine = model.machine(path)
    node = StageRef(path, None)

    def inside(ref: StageRef) -> bool:
        return is_within(ref.path, path)

    def move(ref: StageRef) -> StageRef:
        return node if inside(ref) else ref

    flows = tuple(
        Flow(f.thing, move(f.source), move(f.target))
        for f in model.flows if not (inside(f.source) and inside(f.target))
    )
    triggers = tuple(
        Trigger(move(t.source), move(t.target))
        for t in model.triggers if not (inside(t.source) and inside(t.target))
    )
    events = []
    for ev in model.events:
        region = []
        for r in ev.region:
            if isinstance(r, StageRef):
                region.append(move(r))
            elif inside(r.source) and inside(r.target):
                region.append(node)
            else:
                region.append(ArcRef(move(r.source), move(r.target), r.trigger))
        events.append(Event(ev.name, tuple(region), ev.duration))
    opaque = Machine(machine.name, machine.path, (), (), machine.parent, opaque=True)
    folded = replace_machine(model, path, opaque)
    return folded.with_(flows=flows, triggers=triggers, events=tuple(events))


def apply_folds(original: Model, paths: Iterable[str]) -> Model:
    """Fold every path of ``paths`` (in sorted order) into ``original``."""
    model = original
    for p in sorted(original.qualify(p) for p in paths):
        model = _fold_one(model, p)
    return model


def fold(model: Model, path: str, state: Optional[FoldState] = None) -> tuple[Model, FoldState]:
    """Fold the machine at ``path``; pass ``state`` to fold an already folded view."""
    original = model if state is None else state.original
    folded = frozenset() if state is None else state.folded
    path = original.qualify(path)
    if path == original.root.path:
        raise CannotFoldRoot("the root machine cannot be folded")
    if not original.has_machine(path):
        raise PathNotFound(f"no machine at path {path!r}")
    if path in folded:
        raise FoldConflict(f"{path} is already folded")
    for other in folded:
        if is_within(path, other) or is_within(other, path):
            raise FoldConflict(f"{path} and folded {other} are nested")
    if state is not None and model != apply_folds(original, folded):
        raise ValueError("model does not match the fold state")
    return _fold_one(model, path), FoldState(folded | {path}, original)


def unfold(model: Model, state: FoldState, path: str) -> Model:
    """Restore the machine at ``path`` (and its arcs) from ``state``."""
    path = state.original.qualify(path)
    if path not in state.folded:
        raise PathNotFolded(f"{path} is not folded")
    if model != apply_folds(state.original, state.folded):
        raise ValueError("model does not match the fold state")
    return apply_folds(state.original, state.folded - {path})


def unfold_state(state: FoldState, path: str) -> FoldState:
    path = state.original.qualify(path)
    if path not in state.folded:
        raise PathNotFolded(f"{path} is not folded")
    return FoldState(state.folded - {path}, state.original)


def boundary_arcs(model: Model, path: str) -> list[tuple]:
    """Arcs with exactly one endpoint inside ``path``, as opaque-node arcs."""
    path = model.qualify(path)
    node = StageRef(path, None)

    def inside(ref: StageRef) -> bool:
        return is_within(ref.path, path)

    out = []
    for f in model.flows:
        if inside(f.source) != inside(f.target):
            out.append(("flow", f.thing,
                        node if inside(f.source) else f.source,
                        node if inside(f.target) else f.target))
    for t in model.triggers:
        if inside(t.source) != inside(t.target):
            out.append(("trigger", None,
                        node if inside(t.source) else t.source,
                        node if inside(t.target) else t.target))
    return sorted(out, key=repr)


def node_arcs(model: Model, path: str) -> list[tuple]:
    """Arcs touching the opaque node at ``path`` in a folded model."""
    node = StageRef(model.qualify(path), None)
    out = [("flow", f.thing, f.source, f.target) for f in model.flows
           if node in (f.source, f.target)]
    out += [("trigger", None, t.source, t.target) for t in model.triggers
            if node in (t.source, t.target)]
    return sorted(out, key=repr)


def foldable_paths(model: Model) -> list[str]:
    return [m.path for m in model.root.walk() if m.parent is not None and not m.opaque]
