from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .model import SourceSpan

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    message: str
    span: SourceSpan = SourceSpan()

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR

    @property
    def sort_key(self) -> tuple:
        return (self.span.line, self.span.column, self.code, self.message)

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "line": self.span.line,
            "column": self.span.column,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    def human(self, filename: str = "<input>") -> str:
        return (
            f"{filename}:{self.span.line}:{self.span.column}: "
            f"{self.severity}[{self.code}]: {self.message}"
        )


def error(code: str, message: str, span: SourceSpan = SourceSpan()) -> Diagnostic:
    return Diagnostic(ERROR, code, message, span)


def warning(code: str, message: str, span: SourceSpan = SourceSpan()) -> Diagnostic:
    return Diagnostic(WARNING, code, message, span)


def ordered(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=lambda d: d.sort_key)


def errors(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.is_error]


def from_json(line: str) -> Diagnostic:
    d = json.loads(line)
    return Diagnostic(
        d["severity"], d["code"], d["message"], SourceSpan(d["line"], d["column"], 1)
    )
