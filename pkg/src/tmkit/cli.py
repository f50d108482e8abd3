"""Command-line interface: ``tm validate|render|simulate|fold|events``.

Diagnostics go to stderr, one JSON object per line (``--human`` for prose).
Exit status: 0 success, 1 model/config/chronology errors, 2 I/O or usage
errors, 3 simulation stopped at ``max_ticks`` before quiescence.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import diagnostics as dg
from .diagnostics import Diagnostic
from .dsl import parse_source, print_model
from .errors import (
    ConfigError,
    InvalidModel,
    NondeterministicChoice,
    TickOutOfRange,
    TMError,
    UnknownEvent,
)
from .events import elementary_events, state_at
from .grip import fold
from .model import Model
from .render import to_dot, to_event_timeline
from .sim import check_chronology, load_config, simulate
from .validate import validate

EXIT_OK = 0
EXIT_ERRORS = 1
EXIT_IO = 2
EXIT_HORIZON = 3


class _Fail(Exception):
    def __init__(self, code: int):
        self.code = code


class _Reporter:
    def __init__(self, human: bool, filename: str):
        self.human = human
        self.filename = filename

    def report(self, diags: Sequence[Diagnostic]) -> None:
        for d in diags:
            line = d.human(self.filename) if self.human else d.to_json()
            print(line, file=sys.stderr)

    def fail(self, code: str, message: str, status: int = EXIT_ERRORS) -> "_Fail":
        self.report([dg.error(code, message)])
        return _Fail(status)


def _read(path: str, rep: _Reporter) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise rep.fail("io-error", f"cannot read {path}: {exc.strerror}", EXIT_IO) from None


def _write(path: Optional[str], text: str, rep: _Reporter) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise rep.fail("io-error", f"cannot write {path}: {exc.strerror}", EXIT_IO) from None


def _load(path: str, rep: _Reporter) -> tuple[Model, list[Diagnostic]]:
    """Parse and validate; report everything, fail on any error."""
    result = parse_source(_read(path, rep))
    diags = list(result.diagnostics)
    if result.ok:
        diags = dg.ordered(set(diags) | set(validate(result.model)))
    if dg.errors(diags) or result.model is None:
        rep.report(diags)
        raise _Fail(EXIT_ERRORS)
    return result.model, diags


def cmd_validate(args, rep: _Reporter) -> int:
    _, diags = _load(args.file, rep)
    rep.report(diags)
    return EXIT_OK


def cmd_render(args, rep: _Reporter) -> int:
    model, diags = _load(args.file, rep)
    rep.report(diags)
    state = None
    try:
        for path in args.fold:
            model, state = fold(model, path, state)
        text = to_dot(model, args.highlight)
    except UnknownEvent as exc:
        raise rep.fail("unknown-event", str(exc)) from None
    except TMError as exc:
        raise rep.fail("fold-error", str(exc)) from None
    _write(args.out, text, rep)
    return EXIT_OK


def _config(path: str, rep: _Reporter):
    _read(path, rep)
    try:
        return load_config(path)
    except ConfigError as exc:
        raise rep.fail("config-error", str(exc)) from None


def _run(model: Model, config, rep: _Reporter):
    try:
        return simulate(model, config)
    except ConfigError as exc:
        raise rep.fail("config-error", str(exc)) from None
    except NondeterministicChoice as exc:
        raise rep.fail("nondeterministic-choice", str(exc)) from None
    except InvalidModel as exc:
        rep.report(exc.diagnostics)
        raise _Fail(EXIT_ERRORS) from None


def cmd_simulate(args, rep: _Reporter) -> int:
    model, diags = _load(args.file, rep)
    config = _config(args.config, rep)
    trace = _run(model, config, rep)
    _write(args.trace, trace.to_jsonl(), rep)
    if args.timeline:
        _write(args.timeline, to_event_timeline(trace, model), rep)
    chrono = check_chronology(model, trace)
    rep.report(dg.ordered(list(diags) + chrono))
    if dg.errors(chrono):
        return EXIT_ERRORS
    if not trace.quiescent:
        rep.report([dg.warning(
            "horizon-exhausted", f"stopped at max_ticks={config.max_ticks} before quiescence")])
        return EXIT_HORIZON
    return EXIT_OK


def cmd_fold(args, rep: _Reporter) -> int:
    model, _ = _load(args.file, rep)
    state = None
    try:
        for path in args.paths:
            model, state = fold(model, path, state)
    except TMError as exc:
        raise rep.fail("fold-error", str(exc)) from None
    _write(args.out, print_model(model), rep)
    return EXIT_OK


def cmd_events(args, rep: _Reporter) -> int:
    model, _ = _load(args.file, rep)
    if args.at is not None:
        if not args.config:
            raise rep.fail("usage", "--at needs --config", EXIT_IO)
        trace = _run(model, _config(args.config, rep), rep)
        try:
            state = state_at(model, trace, args.at)
        except TickOutOfRange as exc:
            raise rep.fail("tick-out-of-range", str(exc)) from None
        _write(None, state.to_json() + "\n", rep)
        return EXIT_OK
    events = elementary_events(model) if args.elementary else model.events
    lines = []
    for ev in events:
        region = ", ".join(str(r) for r in ev.region)
        lines.append(f"{ev.name}\t{ev.duration}\t{region}")
    _write(None, "".join(line + "\n" for line in lines), rep)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tm", description="Thinging-machine model toolkit.")
    p.add_argument("--human", action="store_true", help="prose diagnostics instead of JSON")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a model and report diagnostics")
    v.add_argument("file")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("render", help="write Graphviz DOT")
    r.add_argument("file")
    r.add_argument("--fold", action="append", default=[], metavar="PATH",
                   help="fold this machine first (repeatable)")
    r.add_argument("--highlight", metavar="EVENT", help="draw this event's region in red")
    r.add_argument("-o", "--out", help="output file (default stdout)")
    r.set_defaults(func=cmd_render)

    s = sub.add_parser("simulate", help="run the simulator and write a JSONL trace")
    s.add_argument("file")
    s.add_argument("--config", required=True)
    s.add_argument("--trace", help="trace file (default stdout)")
    s.add_argument("--timeline", help="write the event timeline as TSV")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fold", help="print the model with machines folded")
    f.add_argument("file")
    f.add_argument("paths", nargs="+", metavar="PATH")
    f.add_argument("-o", "--out", help="output file (default stdout)")
    f.set_defaults(func=cmd_fold)

    e = sub.add_parser("events", help="list events, or the system state at a tick")
    e.add_argument("file")
    e.add_argument("--elementary", action="store_true", help="list one event per stage")
    e.add_argument("--config", help="simulation config (needed with --at)")
    e.add_argument("--at", type=int, metavar="T", help="print the system state at tick T")
    e.set_defaults(func=cmd_events)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    # --human is accepted before or after the subcommand
    argv = list(sys.argv[1:] if argv is None else argv)
    human = "--human" in argv
    argv = [a for a in argv if a != "--human"]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_IO if exc.code else EXIT_OK
    rep = _Reporter(human, getattr(args, "file", "<input>"))
    try:
        return args.func(args, rep)
    except _Fail as exc:
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
