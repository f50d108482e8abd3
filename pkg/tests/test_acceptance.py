"""Acceptance gate: nine criteria, each with its tolerance and time budget.

Run with ``pytest tests/test_acceptance.py -v`` (a PASS/FAIL line per
criterion is printed in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import sys
import tempfile
import time
from collections import Counter
from pathlib import Path

import pytest
from hypothesis import Phase, given, settings

sys.path.insert(0, str(Path(__file__).resolve().parent))

from tmkit import diagnostics as dg  # noqa: E402
from tmkit.dsl import parse, print_model  # noqa: E402
from tmkit.events import first_starts, occurrences  # noqa: E402
from tmkit.grip import boundary_arcs, fold, foldable_paths, node_arcs, unfold  # noqa: E402
from tmkit.render import to_dot  # noqa: E402
from tmkit.sim import (  # noqa: E402
    SimConfig,
    Spawn,
    check_chronology,
    enumerate_interleavings,
    simulate,
    truncated_sequence,
)
from tmkit.trace import conservation  # noqa: E402
from tmkit.validate import ADJACENCY_RULES, validate  # noqa: E402

from conftest import CORPUS, CORPUS_NAMES, corpus_config, corpus_model  # noqa: E402
from dotcheck import read_dot  # noqa: E402
from strategies import adjacency_case, models  # noqa: E402

RESULTS: list[str] = []

PIPELINE = """model p
thing job
machine a { create, process, release, transfer }
flow job : a.create -> a.process
flow job : a.process -> a.release
flow job : a.release -> a.transfer
"""


def _loaded():
    return {n: (corpus_model(n), corpus_config(n)) for n in CORPUS_NAMES}


def criterion_1():
    """Corpus validity; person has four submachines."""
    problems = []
    for name in CORPUS_NAMES:
        model = parse((CORPUS / f"{name}.tm").read_text())
        errs = dg.errors(validate(model))
        if errs:
            problems.append(f"{name}: {[d.code for d in errs]}")
    person = parse((CORPUS / "person.tm").read_text())
    subs = len(person.root.submachines)
    if subs != 4:
        problems.append(f"person has {subs} submachines")
    return not problems, "; ".join(problems) or "3 models, 0 errors, person submachines = 4"


def criterion_2():
    """Round trip on the corpus plus at least 200 distinct generated models."""
    for name in CORPUS_NAMES:
        m = parse((CORPUS / f"{name}.tm").read_text())
        text = print_model(m)
        if parse(text) != m or print_model(parse(text)) != text:
            return False, f"{name} does not round-trip"
    seen = []

    @settings(max_examples=320, derandomize=True, database=None, deadline=None,
              phases=[Phase.generate])
    @given(models(max_machines=10))
    def check(m):
        assert len(list(m.root.walk())) <= 11
        assert not dg.errors(validate(m))
        text = print_model(m)
        assert parse(text) == m
        assert print_model(parse(text)) == text
        seen.append(m)

    try:
        check()
    except AssertionError as exc:
        return False, f"generated model failed: {exc}"
    distinct = len({print_model(m) for m in seen})
    return distinct >= 200, f"corpus 3/3, {distinct} distinct generated models"


def criterion_3():
    """Every adjacency rule: positive model valid, mutant has exactly one violation."""
    bad = []
    for rule in ADJACENCY_RULES:
        good, mutant = adjacency_case(rule)
        if dg.errors(validate(good)):
            bad.append(f"{rule}: positive invalid")
        errs = dg.errors(validate(mutant))
        hits = [d for d in errs if d.code in ("illegal-adjacency", "boundary-violation")]
        if len(hits) != 1 or len(errs) != 1:
            bad.append(f"{rule}: mutant gave {[d.code for d in errs]}")
    return not bad, "; ".join(bad) or f"{len(ADJACENCY_RULES)} rules sound"


def criterion_4():
    """Person chronology: appears starts strictly before work, eat and name."""
    m, cfg = corpus_model("person"), corpus_config("person")
    trace = simulate(m, cfg)
    starts = first_starts(m, trace)
    later = ("goes_to_work", "eats", "named")
    ok = all(n in starts for n in ("appears",) + later)
    ok = ok and all(starts["appears"] < starts[n] for n in later)
    errs = dg.errors(check_chronology(m, trace))
    return ok and not errs, f"starts {starts}, chronology errors {len(errs)}"


def criterion_5():
    """Hammer: grasp contains the movement start and ends at the ungrasp firing."""
    m, cfg = corpus_model("hammer"), corpus_config("hammer")
    trace = simulate(m, cfg)
    occ = {o.name: o for o in occurrences(m, trace)}
    grasp, movement = occ["grasp"], occ["movement"]
    ungrasp_tick = min(r.tick for r in trace.firings
                       if r.stage.startswith("hammering.hand.ungrasp."))
    ok = grasp.contains(movement.start) and grasp.end == ungrasp_tick
    return ok, (f"grasp [{grasp.start}, {grasp.end}], movement start {movement.start}, "
                f"first ungrasp firing {ungrasp_tick}")


def criterion_6():
    """Simulator sequence is in the enumerated set; the pipeline has one interleaving."""
    details = []
    ok = True
    for name, (m, cfg) in _loaded().items():
        trace = simulate(m, cfg)
        seqs = enumerate_interleavings(m, cfg, budget=12, truncate=True)
        member = truncated_sequence(trace, 12) in seqs
        ok = ok and member
        details.append(f"{name} {'in' if member else 'NOT in'} {len(seqs)}")
    pipeline = parse(PIPELINE)
    n = len(enumerate_interleavings(pipeline, SimConfig(spawns=(Spawn("a.create"),))))
    details.append(f"pipeline {n}")
    return ok and n == 1, ", ".join(details)


def criterion_7():
    """100 simulations per corpus model give byte-identical trace files."""
    with tempfile.TemporaryDirectory() as tmp:
        for name, (m, cfg) in _loaded().items():
            digests = set()
            for i in range(100):
                path = Path(tmp) / f"{name}-{i}.jsonl"
                path.write_text(simulate(m, cfg).to_jsonl(), encoding="utf-8")
                digests.add(path.read_bytes())
            if len(digests) != 1:
                return False, f"{name}: {len(digests)} distinct traces"
    return True, "3 models x 100 runs identical"


def criterion_8():
    """Fold/unfold identity, folded node counts and boundary degree on every path."""
    count = 0
    for name, (m, _) in _loaded().items():
        canonical = print_model(m)
        for path in foldable_paths(m):
            folded, state = fold(m, path)
            if print_model(unfold(folded, state, path)) != canonical:
                return False, f"{name} {path}: unfold differs"
            inside = [r for r in m.stages()
                      if r.path == path or r.path.startswith(path + ".")]
            _, nodes, _ = read_dot(to_dot(folded))
            if len(nodes) != len(m.stages()) - len(inside) + 1:
                return False, f"{name} {path}: {len(nodes)} nodes"
            if Counter(node_arcs(folded, path)) != Counter(boundary_arcs(m, path)):
                return False, f"{name} {path}: boundary degree changed"
            count += 1
    return True, f"{count} foldable paths"


def criterion_9():
    """Spawned + trigger-created = retired + still positioned, per trace."""
    parts = []
    for name, (m, cfg) in _loaded().items():
        c = conservation(simulate(m, cfg))
        if c["spawned"] + c["created"] != c["retired"] + c["live"]:
            return False, f"{name}: {c}"
        parts.append(f"{name} {c['spawned']}+{c['created']}={c['retired']}+{c['live']}")
    return True, ", ".join(parts)


CRITERIA = [
    (1, "corpus validity", criterion_1, 1.0),
    (2, "round trip", criterion_2, 10.0),
    (3, "adjacency soundness", criterion_3, 1.0),
    (4, "chronology reproduction", criterion_4, 1.0),
    (5, "hammer concurrency", criterion_5, 1.0),
    (6, "oracle equivalence", criterion_6, 30.0),
    (7, "determinism", criterion_7, 10.0),
    (8, "fold/unfold identity", criterion_8, 5.0),
    (9, "conservation", criterion_9, 1.0),
]


def run_criterion(number, title, fn, budget):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    in_time = elapsed < budget
    status = "PASS" if ok and in_time else "FAIL"
    line = (f"{status} criterion {number} ({title}): {detail} "
            f"[{elapsed:.3f}s, limit {budget:g}s]")
    return ok, in_time, line


@pytest.mark.parametrize("number, title, fn, budget", CRITERIA,
                         ids=[f"criterion-{c[0]}" for c in CRITERIA])
def test_criterion(number, title, fn, budget):
    ok, in_time, line = run_criterion(number, title, fn, budget)
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert in_time, line


if __name__ == "__main__":
    failed = 0
    for criterion in CRITERIA:
        ok, in_time, line = run_criterion(*criterion)
        print(line)
        failed += not (ok and in_time)
    sys.exit(1 if failed else 0)
