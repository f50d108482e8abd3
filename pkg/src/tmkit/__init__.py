"""Executable thinging-machine models."""

from .dsl import ParseError, parse, parse_source, print_model
from .model import (
    ArcRef,
    Chronology,
    Event,
    Flow,
    Machine,
    Model,
    ModelBuilder,
    StageKind,
    StageRef,
    Trigger,
    normalize_receive,
    resolve_stage,
)
from .events import elementary_events, occurrences, state_at
from .grip import FoldState, fold, unfold
from .render import to_dot, to_event_timeline
from .sim import SimConfig, Spawn, check_chronology, enumerate_interleavings, simulate
from .trace import Trace
from .validate import explain, validate

__all__ = [
    "ArcRef", "Chronology", "Event", "Flow", "FoldState", "Machine", "Model",
    "ModelBuilder", "ParseError", "SimConfig", "Spawn", "StageKind", "StageRef",
    "Trace", "Trigger", "check_chronology", "elementary_events",
    "enumerate_interleavings", "explain", "fold", "normalize_receive", "occurrences",
    "parse", "parse_source", "print_model", "resolve_stage", "simulate", "state_at",
    "to_dot", "to_event_timeline", "unfold", "validate",
]
