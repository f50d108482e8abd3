"""Textual syntax for thinging-machine models (``.tm`` files).

Grammar (one declaration per line, ``#`` starts a comment)::

    model NAME
    machine PATH { KIND (, KIND)* }      # PATH's parents are created on demand
    machine PATH folded                  # opaque node of a folded view
    thing NAME
    flow THING : REF -> REF
    trigger REF -> REF
    event NAME { region: ITEM (, ITEM)* ; duration: INT }
    chronology { NAME -> NAME ; ... }

``REF`` is ``PATH.KIND`` (or a bare ``PATH`` for an opaque node) and a region
``ITEM`` is a ``REF``, a flow arc ``REF -> REF`` or a trigger arc ``REF ~> REF``.
Paths are relative to the root unless they start with the model name; the
root itself is addressed by the model name. Newlines inside braces are
insignificant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

from . import diagnostics as dg
from .diagnostics import Diagnostic
from .errors import TMError
from .model import (
    ArcRef,
    Model,
    ModelBuilder,
    SourceSpan,
    StageKind,
    StageRef,
)

KEYWORDS = frozenset(
    {"model", "machine", "thing", "flow", "trigger", "event", "chronology",
     "region", "duration", "folded"}
    | {k.value for k in StageKind}
)

_PUNCT = {
    "{": "LBRACE", "}": "RBRACE", ",": "COMMA", ":": "COLON", ";": "SEMI",
    ".": "DOT",
}


@dataclass(frozen=True)
class Token:
    type: str
    value: str
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, max(1, len(self.value)))


class ParseError(TMError):
    """Raised by :func:`parse` when the source has error diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        first = diagnostics[0] if diagnostics else None
        msg = first.human() if first else "parse failed"
        super().__init__(msg)


@dataclass(frozen=True)
class ParseResult:
    model: Optional[Model]
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.model is not None and not dg.errors(self.diagnostics)


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    text = text.replace("\r\n", "\n")
    for lineno, line in enumerate(text.split("\n"), start=1):
        i = 0
        n = len(line)
        while i < n:
            ch = line[i]
            col = i + 1
            if ch in " \t":
                i += 1
            elif ch == "#":
                break
            elif ch.isascii() and (ch.isalpha() or ch == "_"):
                j = i + 1
                while j < n and line[j].isascii() and (line[j].isalnum() or line[j] == "_"):
                    j += 1
                word = line[i:j]
                tokens.append(Token("KW" if word in KEYWORDS else "IDENT", word, lineno, col))
                i = j
            elif ch.isascii() and ch.isdigit():
                j = i + 1
                while j < n and line[j].isascii() and line[j].isdigit():
                    j += 1
                tokens.append(Token("INT", line[i:j], lineno, col))
                i = j
            elif line.startswith("->", i):
                tokens.append(Token("ARROW", "->", lineno, col))
                i += 2
            elif line.startswith("~>", i):
                tokens.append(Token("TARROW", "~>", lineno, col))
                i += 2
            elif ch in _PUNCT:
                tokens.append(Token(_PUNCT[ch], ch, lineno, col))
                i += 1
            else:
                diags.append(dg.error(
                    "lexical-error", f"unexpected character {ch!r}",
                    SourceSpan(lineno, col, 1),
                ))
                i += 1
        tokens.append(Token("NEWLINE", "", lineno, n + 1))
    tokens.append(Token("EOF", "", tokens[-1].line if tokens else 1, 1))
    return tokens, diags


class _Syntax(Exception):
    def __init__(self, token: Token, message: str):
        self.token = token
        self.message = message


# Parsed but unresolved reference: (path text, kind or None, token)
_Ref = tuple[str, Optional[StageKind], Token]


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    # -- token helpers ------------------------------------------------------

    def peek(self) -> Token:
        tok = self.tokens[self.pos]
        while self.depth > 0 and tok.type == "NEWLINE":
            self.pos += 1
            tok = self.tokens[self.pos]
        return tok

    def next(self) -> Token:
        tok = self.peek()
        if tok.type != "EOF":
            self.pos += 1
        if tok.type == "LBRACE":
            self.depth += 1
        elif tok.type == "RBRACE":
            self.depth = max(0, self.depth - 1)
        return tok

    def expect(self, type_: str, value: Optional[str] = None, what: str = "") -> Token:
        tok = self.peek()
        if tok.type != type_ or (value is not None and tok.value != value):
            want = what or (value or type_.lower())
            got = tok.value or tok.type.lower()
            raise _Syntax(tok, f"expected {want}, found {got!r}")
        return self.next()

    def at_kw(self, value: str) -> bool:
        tok = self.peek()
        return tok.type == "KW" and tok.value == value

    def ident(self, what: str) -> Token:
        tok = self.peek()
        if tok.type == "KW":
            raise _Syntax(tok, f"{tok.value!r} is a reserved keyword, expected {what}")
        return self.expect("IDENT", what=what)

    def end_statement(self) -> None:
        tok = self.peek()
        if tok.type not in ("NEWLINE", "EOF"):
            raise _Syntax(tok, f"unexpected {tok.value!r} after declaration")
        self.next()

    def recover(self) -> None:
        self.depth = 0
        while True:
            tok = self.tokens[self.pos]
            if tok.type == "EOF":
                return
            self.pos += 1
            if tok.type == "NEWLINE":
                return

    # -- grammar pieces -----------------------------------------------------

    def path(self) -> tuple[str, Token]:
        first = self.ident("machine name")
        parts = [first.value]
        while self.peek().type == "DOT" and self.tokens[self.pos + 1].type == "IDENT":
            self.next()
            parts.append(self.next().value)
        return ".".join(parts), first

    def ref(self) -> _Ref:
        path, first = self.path()
        if self.peek().type == "DOT":
            self.next()
            tok = self.peek()
            if tok.type == "KW" and tok.value in {k.value for k in StageKind}:
                self.next()
                return path, StageKind(tok.value), first
            raise _Syntax(tok, f"expected stage kind, found {tok.value!r}")
        return path, None, first


def _statement_span(tok: Token, end: Token) -> SourceSpan:
    length = end.column + len(end.value) - tok.column if end.line == tok.line else len(tok.value)
    return SourceSpan(tok.line, tok.column, max(1, length))


def parse_source(text: str) -> ParseResult:
    """Parse ``text`` and return the model (if any) with all diagnostics."""
    tokens, diags = tokenize(text)
    p = _Parser(tokens)
    builder: Optional[ModelBuilder] = None
    declared_machines: dict[str, SourceSpan] = {}
    auto_parents: dict[str, SourceSpan] = {}
    seen_things: set[str] = set()
    seen_flows: set = set()
    seen_triggers: set = set()
    seen_events: set[str] = set()
    seen_edges: set = set()
    # deferred reference checks: (ref, token)
    stage_refs: list[_Ref] = []
    event_refs: list[tuple[str, Token]] = []

    def dup(tok: Token, what: str) -> None:
        diags.append(dg.error("duplicate-declaration", f"duplicate {what}", tok.span))

    while True:
        tok = p.peek()
        if tok.type == "EOF":
            break
        if tok.type == "NEWLINE":
            p.next()
            continue
        try:
            if tok.type != "KW":
                raise _Syntax(tok, f"expected a declaration keyword, found {tok.value!r}")
            if builder is None and tok.value != "model":
                raise _Syntax(tok, "the first declaration must be 'model NAME'")
            kw = p.next()
            if kw.value == "model":
                if builder is not None:
                    raise _Syntax(kw, "only one 'model' declaration is allowed")
                name = p.ident("model name")
                p.end_statement()
                builder = ModelBuilder(name.value)
                builder.spans[("model",)] = name.span
            elif kw.value == "machine":
                path, first = p.path()
                opaque = False
                kinds: list[StageKind] = []
                if p.at_kw("folded"):
                    p.next()
                    opaque = True
                else:
                    p.expect("LBRACE", what="'{'")
                    if p.peek().type != "RBRACE":
                        while True:
                            ktok = p.peek()
                            if ktok.type != "KW" or ktok.value not in {k.value for k in StageKind}:
                                raise _Syntax(ktok, f"expected stage kind, found {ktok.value!r}")
                            p.next()
                            kind = StageKind(ktok.value)
                            if kind in kinds:
                                dup(ktok, f"stage {kind.value!r} in machine {path}")
                            kinds.append(kind)
                            if p.peek().type != "COMMA":
                                break
                            p.next()
                    p.expect("RBRACE", what="'}' or ','")
                end = p.tokens[p.pos - 1]
                p.end_statement()
                full = builder.qualify(path)
                span = _statement_span(kw, end)
                if full == f"{builder.name}.{builder.name}":
                    diags.append(dg.error(
                        "root-shadowed",
                        f"a top-level machine may not share the model name {builder.name!r}",
                        first.span,
                    ))
                    continue
                if full in declared_machines:
                    dup(first, f"machine {path}")
                    continue
                for created in builder.ensure(full):
                    if created != full:
                        auto_parents[created] = first.span
                auto_parents.pop(full, None)
                declared_machines[full] = span
                builder.machine(full, *kinds, opaque=opaque)
                builder.spans[("machine", full)] = span
            elif kw.value == "thing":
                name = p.ident("thing name")
                p.end_statement()
                if name.value in seen_things:
                    dup(name, f"thing {name.value}")
                    continue
                seen_things.add(name.value)
                builder.thing(name.value)
                builder.spans[("thing", name.value)] = name.span
            elif kw.value == "flow":
                thing = p.ident("thing name")
                p.expect("COLON", what="':'")
                src = p.ref()
                p.expect("ARROW", what="'->'")
                dst = p.ref()
                end = p.tokens[p.pos - 1]
                p.end_statement()
                s, t = _qref(builder, src), _qref(builder, dst)
                key = (thing.value, s, t)
                if key in seen_flows:
                    dup(thing, f"flow {thing.value} : {src[0]} -> {dst[0]}")
                    continue
                seen_flows.add(key)
                stage_refs.extend([src, dst])
                builder.flow(thing.value, s, t)
                builder.spans[("flow", thing.value, s, t)] = _statement_span(kw, end)
                builder.spans[("thing-use", thing.value, s, t)] = thing.span
            elif kw.value == "trigger":
                src = p.ref()
                p.expect("ARROW", what="'->'")
                dst = p.ref()
                end = p.tokens[p.pos - 1]
                p.end_statement()
                s, t = _qref(builder, src), _qref(builder, dst)
                if (s, t) in seen_triggers:
                    dup(src[2], "trigger")
                    continue
                seen_triggers.add((s, t))
                stage_refs.extend([src, dst])
                builder.trigger(s, t)
                builder.spans[("trigger", s, t)] = _statement_span(kw, end)
            elif kw.value == "event":
                name = p.ident("event name")
                p.expect("LBRACE", what="'{'")
                p.expect("KW", "region", what="'region'")
                p.expect("COLON", what="':'")
                region: list = []
                while True:
                    a = p.ref()
                    stage_refs.append(a)
                    if p.peek().type in ("ARROW", "TARROW"):
                        trig = p.next().type == "TARROW"
                        b = p.ref()
                        stage_refs.append(b)
                        region.append(ArcRef(_qref(builder, a), _qref(builder, b), trig))
                    else:
                        region.append(_qref(builder, a))
                    if p.peek().type != "COMMA":
                        break
                    p.next()
                duration = 1
                if p.peek().type == "SEMI":
                    p.next()
                    p.expect("KW", "duration", what="'duration'")
                    p.expect("COLON", what="':'")
                    dtok = p.expect("INT", what="duration in ticks")
                    duration = int(dtok.value)
                    if duration < 1:
                        raise _Syntax(dtok, "duration must be >= 1")
                end = p.expect("RBRACE", what="'}'")
                p.end_statement()
                if name.value in seen_events:
                    dup(name, f"event {name.value}")
                    continue
                seen_events.add(name.value)
                builder.event(name.value, region, duration)
                builder.spans[("event", name.value)] = _statement_span(kw, end)
            elif kw.value == "chronology":
                p.expect("LBRACE", what="'{'")
                while p.peek().type != "RBRACE":
                    a = p.ident("event name")
                    p.expect("ARROW", what="'->'")
                    b = p.ident("event name")
                    key = (a.value, b.value)
                    if key in seen_edges:
                        dup(a, f"chronology edge {a.value} -> {b.value}")
                    else:
                        seen_edges.add(key)
                        builder.before(a.value, b.value)
                        builder.spans[("edge", a.value, b.value)] = a.span
                        event_refs.extend([(a.value, a), (b.value, b)])
                    if p.peek().type == "SEMI":
                        p.next()
                    elif p.peek().type != "RBRACE":
                        raise _Syntax(p.peek(), f"expected ';' or '}}', found {p.peek().value!r}")
                p.expect("RBRACE", what="'}'")
                p.end_statement()
            else:
                raise _Syntax(kw, f"{kw.value!r} cannot start a declaration")
        except _Syntax as exc:
            tok = exc.token
            code = "syntax-error"
            diags.append(dg.error(code, exc.message, tok.span if tok.type != "EOF" else SourceSpan(tok.line, 1, 1)))
            p.recover()

    if builder is None:
        if not dg.errors(diags):
            diags.append(dg.error("syntax-error", "missing 'model NAME' declaration", SourceSpan(1, 1, 1)))
        return ParseResult(None, dg.ordered(diags))

    for path, span in auto_parents.items():
        diags.append(dg.warning(
            "implicit-parent",
            f"machine {path[len(builder.name) + 1:]} was created implicitly without stages",
            span,
        ))

    # reference resolution
    for path, kind, tok in stage_refs:
        full = builder.qualify(path)
        if not builder.has_machine(full):
            diags.append(dg.error(
                "dangling-reference", f"machine {path} is not declared", tok.span))
        elif kind is None:
            if full not in builder._opaque:
                diags.append(dg.error(
                    "dangling-reference", f"{path} is not a folded machine; a stage kind is required",
                    tok.span))
        elif kind not in builder._stages[full]:
            diags.append(dg.error(
                "dangling-reference", f"machine {path} has no {kind.value} stage", tok.span))
    for name, tok in event_refs:
        if name not in seen_events:
            diags.append(dg.error(
                "dangling-reference", f"event {name} is not declared", tok.span))

    model = builder.build()
    return ParseResult(model, dg.ordered(_dedupe(diags)))


def _dedupe(diags: list[Diagnostic]) -> list[Diagnostic]:
    seen = set()
    out = []
    for d in diags:
        if d not in seen:
            seen.add(d)
            out.append(d)
    return out


def _qref(builder: ModelBuilder, ref: _Ref) -> StageRef:
    path, kind, _ = ref
    return StageRef(builder.qualify(path), kind)


def parse(text: str) -> Model:
    """Parse ``text``; raise :class:`ParseError` carrying diagnostics on error."""
    result = parse_source(text)
    if not result.ok:
        raise ParseError(dg.errors(result.diagnostics) or result.diagnostics)
    return result.model


# -- printing -----------------------------------------------------------------


def _ref_text(model: Model, ref: StageRef) -> str:
    path = model.relative(ref.path)
    return path if ref.kind is None else f"{path}.{ref.kind.value}"


def _region_text(model: Model, item: Union[StageRef, ArcRef]) -> str:
    if isinstance(item, StageRef):
        return _ref_text(model, item)
    arrow = "~>" if item.trigger else "->"
    return f"{_ref_text(model, item.source)} {arrow} {_ref_text(model, item.target)}"


def _lines(model: Model) -> Iterator[str]:
    yield f"model {model.name}"
    if model.things:
        yield ""
        for t in model.things:
            yield f"thing {t}"
    machines = [
        m for m in model.root.walk()
        if m.parent is not None or m.stages
    ]
    if machines:
        yield ""
        for m in machines:
            path = model.relative(m.path)
            if m.opaque:
                yield f"machine {path} folded"
            elif m.stages:
                yield f"machine {path} {{ {', '.join(k.value for k in m.stages)} }}"
            else:
                yield f"machine {path} {{}}"
    if model.flows:
        yield ""
        for f in model.flows:
            yield f"flow {f.thing} : {_ref_text(model, f.source)} -> {_ref_text(model, f.target)}"
    if model.triggers:
        yield ""
        for t in model.triggers:
            yield f"trigger {_ref_text(model, t.source)} -> {_ref_text(model, t.target)}"
    if model.events:
        yield ""
        for e in model.events:
            items = ", ".join(_region_text(model, r) for r in e.region)
            yield f"event {e.name} {{ region: {items} ; duration: {e.duration} }}"
    if model.chronology.edges:
        yield ""
        edges = " ; ".join(f"{a} -> {b}" for a, b in model.chronology.edges)
        yield f"chronology {{ {edges} }}"


def print_model(model: Model) -> str:
    """Canonical text of ``model``; ``parse(print_model(m)) == m``."""
    return "\n".join(_lines(model)) + "\n"


def load(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
