import pytest
from hypothesis import given, settings

from tmkit.dsl import parse, print_model
from tmkit.errors import CannotFuse, UnresolvedReference
from tmkit.model import (
    ModelBuilder,
    StageKind as K,
    StageRef,
    normalize_receive,
    resolve_stage,
    submodel,
)
from tmkit.validate import validate

from strategies import models


def test_seven_stage_kinds_in_canonical_order():
    assert [k.value for k in K] == [
        "create", "receive", "arrive", "accept", "process", "release", "transfer"]
    assert sorted([K.TRANSFER, K.CREATE, K.PROCESS]) == [K.CREATE, K.PROCESS, K.TRANSFER]


def test_resolve_work_process(person):
    ref = resolve_stage(person, "person.work", K.PROCESS)
    assert ref == StageRef("person.work", K.PROCESS)
    assert resolve_stage(person, "work.process") == ref


def test_resolve_absent_root_stage(person):
    with pytest.raises(UnresolvedReference):
        resolve_stage(person, "person", K.PROCESS)


def test_resolve_hammer_grasp_create(hammer):
    ref = resolve_stage(hammer, "hand.grasp", K.CREATE)
    assert ref == StageRef("hammering.hand.grasp", K.CREATE)


def test_receive_never_resolves_on_unfused_machine():
    m = ModelBuilder("m").machine("a", "arrive", "accept").build()
    with pytest.raises(UnresolvedReference):
        resolve_stage(m, "a", K.RECEIVE)
    n = ModelBuilder("m").machine("a", "receive").build()
    with pytest.raises(UnresolvedReference):
        resolve_stage(n, "a", K.ARRIVE)


def test_every_corpus_arc_resolves(corpus):
    _, m, _ = corpus
    for f in m.flows:
        resolve_stage(m, f.source)
        resolve_stage(m, f.target)
    for t in m.triggers:
        resolve_stage(m, t.source)
        resolve_stage(m, t.target)


def test_paths_are_unique(corpus):
    _, m, _ = corpus
    paths = [x.path for x in m.root.walk()]
    assert len(paths) == len(set(paths))
    for x in m.root.walk():
        if x.parent is not None:
            assert x.path == f"{x.parent}.{x.name}"


def test_fuse_definitional():
    m = (ModelBuilder("m").thing("x").machine("a", "arrive", "accept", "process")
         .flow("x", "a.arrive", "a.accept").flow("x", "a.accept", "a.process").build())
    fused = normalize_receive(m, "fuse")
    assert fused.machine("a").stages == (K.RECEIVE, K.PROCESS)
    assert [str(f) for f in fused.flows] == ["x : m.a.receive -> m.a.process"]


def test_unfuse_definitional():
    m = (ModelBuilder("m").thing("x").machine("a", "receive", "process")
         .flow("x", "a.receive", "a.process").build())
    split = normalize_receive(m, "unfuse")
    assert split.machine("a").stages == (K.ARRIVE, K.ACCEPT, K.PROCESS)
    assert [str(f) for f in split.flows] == [
        "x : m.a.arrive -> m.a.accept", "x : m.a.accept -> m.a.process"]
    assert normalize_receive(split, "fuse") == m


def test_person_unfuse_fuse_identity(person):
    split = normalize_receive(person, "unfuse")
    assert not [d for d in validate(split) if d.is_error]
    assert print_model(normalize_receive(split, "fuse")) == print_model(person)


def test_fuse_refuses_bypass():
    m = (ModelBuilder("m").thing("x").machine("a", "arrive", "accept", "process")
         .flow("x", "a.arrive", "a.accept").flow("x", "a.arrive", "a.process").build())
    with pytest.raises(CannotFuse) as exc:
        normalize_receive(m, "fuse")
    assert list(exc.value.machines) == ["m.a"]


def test_bad_direction():
    with pytest.raises(ValueError):
        normalize_receive(ModelBuilder("m").build(), "sideways")


def test_submodel_keeps_named_subtrees(person):
    sub = submodel(person, ["self", "name"])
    assert [m.path for m in sub.root.submachines] == ["person.self", "person.name"]
    assert all(t.target.path == "person.name" for t in sub.triggers)
    assert {e.name for e in sub.events} == {"appears", "named"}


@settings(max_examples=60, deadline=None)
@given(models())
def test_normalize_involution(m):
    try:
        m = normalize_receive(m, "fuse")
    except CannotFuse:
        return
    split = normalize_receive(m, "unfuse")
    assert normalize_receive(split, "fuse") == m
    assert normalize_receive(normalize_receive(split, "fuse"), "unfuse") == split
    paths = [x.path for x in split.root.walk()]
    assert len(paths) == len(set(paths))


@settings(max_examples=60, deadline=None)
@given(models())
def test_models_are_value_objects(m):
    assert parse(print_model(m)) == m
    assert hash(m.root) == hash(parse(print_model(m)).root)
