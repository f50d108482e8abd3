"""Integer encoding of a model's flow structure for the execution kernels.

Stages, thing kinds and flow candidates are numbered so the simulator and the
interleaving search can work on flat integer arrays. A thing's *mode* records
how it reached its current stage: 0 from inside the machine (or by creation),
1 through a cross-machine flow. At a transfer stage, mode 0 things may only
leave across the boundary and mode 1 things may only move inward.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import Model, StageKind, StageRef
from .validate import created_kind

OUTBOUND = 0
INBOUND = 1


@dataclass(frozen=True)
class Net:
    stages: tuple[str, ...]
    refs: tuple[StageRef, ...]
    kinds: tuple[str, ...]
    # candidate table, indexed by (stage * n_kinds + kind) * 2 + mode
    cand_start: tuple[int, ...]
    cand_end: tuple[int, ...]
    cand_target: tuple[int, ...]
    cand_cross: tuple[int, ...]
    # triggers per source stage
    trig_start: tuple[int, ...]
    trig_end: tuple[int, ...]
    trig_target: tuple[int, ...]
    trig_create: tuple[int, ...]
    created: tuple[int, ...]
    gated: tuple[int, ...]
    reject: tuple[int, ...]
    duration: tuple[int, ...]

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    @property
    def n_kinds(self) -> int:
        return len(self.kinds)

    def slot(self, stage: int, kind: int, mode: int) -> int:
        return (stage * len(self.kinds) + kind) * 2 + mode

    def candidates(self, stage: int, kind: int, mode: int) -> range:
        s = self.slot(stage, kind, mode)
        return range(self.cand_start[s], self.cand_end[s])

    def index(self, ref: StageRef) -> int:
        return self.refs.index(ref)


def compile_net(
    model: Model,
    durations: Mapping[StageKind, int] | None = None,
    rejecting: Sequence[str] = (),
) -> Net:
    """Encode ``model``; ``rejecting`` lists machine paths whose accept says never."""
    durations = durations or {}
    refs = model.stages()
    idx = {r: i for i, r in enumerate(refs)}
    kinds = sorted(
        set(model.things)
        | {f.thing for f in model.flows}
        | {created_kind(model, r) for r in refs if r.kind is StageKind.CREATE}
    )
    kidx = {k: i for i, k in enumerate(kinds)}
    S, K = len(refs), len(kinds)

    table: list[list[tuple[int, int]]] = [[] for _ in range(S * K * 2)]
    for f in model.flows:
        s, t = idx[f.source], idx[f.target]
        cross = int(f.source.path != f.target.path)
        k = kidx[f.thing]
        if f.source.kind is StageKind.TRANSFER:
            modes = (OUTBOUND,) if cross else (INBOUND,)
        else:
            modes = (OUTBOUND, INBOUND)
        for mode in modes:
            table[(s * K + k) * 2 + mode].append((t, cross))
    cand_start, cand_end, cand_target, cand_cross = [], [], [], []
    for entries in table:
        # tie-break: target path, then canonical kind order
        entries.sort(key=lambda e: refs[e[0]].sort_key)
        cand_start.append(len(cand_target))
        for t, c in entries:
            cand_target.append(t)
            cand_cross.append(c)
        cand_end.append(len(cand_target))

    trig_start, trig_end, trig_target, trig_create = [], [], [], []
    by_source: dict[int, list] = {}
    for tr in model.triggers:
        by_source.setdefault(idx[tr.source], []).append(tr)
    for s in range(S):
        trig_start.append(len(trig_target))
        for tr in by_source.get(s, ()):
            trig_target.append(idx[tr.target])
            trig_create.append(int(tr.target.kind is StageKind.CREATE))
        trig_end.append(len(trig_target))

    gated_targets = {
        idx[tr.target] for tr in model.triggers if tr.target.kind is StageKind.TRANSFER
    }
    rejecting = {model.qualify(p) for p in rejecting}
    return Net(
        stages=tuple(str(r) for r in refs),
        refs=tuple(refs),
        kinds=tuple(kinds),
        cand_start=tuple(cand_start),
        cand_end=tuple(cand_end),
        cand_target=tuple(cand_target),
        cand_cross=tuple(cand_cross),
        trig_start=tuple(trig_start),
        trig_end=tuple(trig_end),
        trig_target=tuple(trig_target),
        trig_create=tuple(trig_create),
        created=tuple(
            kidx[created_kind(model, r)] if r.kind is StageKind.CREATE else -1 for r in refs
        ),
        gated=tuple(int(i in gated_targets) for i in range(S)),
        reject=tuple(
            int(r.kind is StageKind.ACCEPT and r.path in rejecting) for r in refs
        ),
        duration=tuple(int(durations.get(r.kind, 1)) for r in refs),
    )
