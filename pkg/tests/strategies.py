"""Hypothesis strategies producing structurally valid models."""

from __future__ import annotations

from hypothesis import strategies as st

from tmkit.model import Model, ModelBuilder, StageKind as K
from tmkit.validate import WITHIN, successors

# Stage sets that satisfy the per-machine pairing rules.
STAGE_SETS = [
    (K.CREATE,),
    (K.CREATE, K.PROCESS),
    (K.CREATE, K.PROCESS, K.RELEASE, K.TRANSFER),
    (K.RECEIVE,),
    (K.RECEIVE, K.PROCESS),
    (K.RECEIVE, K.PROCESS, K.RELEASE, K.TRANSFER),
    (K.ARRIVE, K.ACCEPT, K.PROCESS),
    (K.CREATE, K.RECEIVE, K.PROCESS, K.RELEASE, K.TRANSFER),
    (K.TRANSFER,),
    (),
]


@st.composite
def models(draw, max_machines: int = 10) -> Model:
    n = draw(st.integers(1, max_machines))
    b = ModelBuilder("root")
    paths = ["root"]
    stages: dict[str, tuple] = {}
    for i in range(n):
        parent = draw(st.sampled_from(paths))
        path = f"{parent}.m{i}"
        kinds = draw(st.sampled_from(STAGE_SETS))
        b.machine(path, *kinds)
        paths.append(path)
        stages[path] = kinds
    if draw(st.booleans()):
        stages["root"] = (K.CREATE, K.PROCESS)
        b.machine("root", *stages["root"])
    b.thing(*[f"t_{p.replace('.', '_')}" for p in stages])

    # within-machine flows, one thing kind per machine
    arcs = []
    for path, kinds in stages.items():
        thing = f"t_{path.replace('.', '_')}"
        for s in kinds:
            for t in successors(s):
                if t in kinds and draw(st.booleans()):
                    b.flow(thing, f"{path}.{s.value}", f"{path}.{t.value}")
                    arcs.append((f"{path}.{s.value}", f"{path}.{t.value}"))

    transfers = [p for p, ks in stages.items() if K.TRANSFER in ks]
    seen = set()
    for _ in range(draw(st.integers(0, 3))):
        if len(transfers) < 2:
            break
        a, c = draw(st.lists(st.sampled_from(transfers), min_size=2, max_size=2, unique=True))
        if (a, c) in seen:
            continue
        seen.add((a, c))
        b.flow(f"t_{a.replace('.', '_')}", f"{a}.transfer", f"{c}.transfer")
        arcs.append((f"{a}.transfer", f"{c}.transfer"))

    all_stages = [f"{p}.{k.value}" for p, ks in stages.items() for k in ks]
    creates = [s for s in all_stages if s.endswith(".create")]
    trig = set()
    for _ in range(draw(st.integers(0, 3))):
        if not all_stages:
            break
        src = draw(st.sampled_from(all_stages))
        targets = [c for c in creates if c != src] + [
            f"{p}.transfer" for p in transfers if not src.startswith(p + ".transfer")
            and src.rsplit(".", 1)[0] != p
        ]
        if not targets:
            continue
        dst = draw(st.sampled_from(targets))
        if (src, dst) not in trig:
            trig.add((src, dst))
            b.trigger(src, dst)

    names = []
    for i in range(draw(st.integers(0, 3))):
        if arcs and draw(st.booleans()):
            s, t = draw(st.sampled_from(arcs))
            region = [s, t, (s, t)] if draw(st.booleans()) else [s, t]
        elif all_stages:
            region = [draw(st.sampled_from(all_stages))]
        else:
            break
        name = f"e{i}"
        b.event(name, region, draw(st.integers(1, 3)))
        names.append(name)
    for i, a in enumerate(names):
        for c in names[i + 1:]:
            if draw(st.booleans()):
                b.before(a, c)
    return b.build()


def _companions(kinds):
    """Add the stages a machine needs to satisfy the pairing rules."""
    out = set(kinds)
    if K.RELEASE in out:
        out.add(K.TRANSFER)
    if K.ARRIVE in out or K.ACCEPT in out:
        out |= {K.ARRIVE, K.ACCEPT}
    return sorted(out)


def adjacency_case(rule):
    """Minimal model exercising ``rule`` and its reversed-arc mutant."""
    if rule.scope == WITHIN:
        kinds = _companions({rule.source, rule.target})
        good = ModelBuilder("m").thing("x").machine("a", *kinds)
        bad = ModelBuilder("m").thing("x").machine("a", *kinds)
        good.flow("x", f"a.{rule.source.value}", f"a.{rule.target.value}")
        bad.flow("x", f"a.{rule.target.value}", f"a.{rule.source.value}")
        return good.build(), bad.build()
    # The cross rule is symmetric, so its mutant keeps the direction and
    # swaps the boundary stages for non-transfer ones.
    good = (ModelBuilder("m").thing("x")
            .machine("a", "transfer").machine("b", "transfer")
            .flow("x", "a.transfer", "b.transfer"))
    bad = (ModelBuilder("m").thing("x")
           .machine("a", "release", "transfer").machine("b", "receive")
           .flow("x", "a.release", "b.receive"))
    return good.build(), bad.build()
