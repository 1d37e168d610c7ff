"""Exception types shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.column}: error: {self.message}"


class CoplError(Exception):
    """Base class for everything the interpreter reports to users."""


class SourceError(CoplError):
    """One or more static diagnostics (lexing, parsing, checking)."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(f"{d.line}:{d.column}: {d.message}" for d in self.diagnostics))

    def format(self, filename: str = "<input>") -> str:
        return "\n".join(d.format(filename) for d in self.diagnostics)


class LexError(SourceError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__([Diagnostic(line, column, message)])


class ParseError(SourceError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__([Diagnostic(line, column, message)])


class CheckError(SourceError):
    pass


class CoplRuntimeError(CoplError):
    """An error raised while executing a checked program.

    ``line``/``column`` point at the statement or expression that failed, when
    known.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.where: str | None = None  # innermost Type.method being executed

    def format(self, filename: str = "<input>") -> str:
        prefix = filename if self.line is None else f"{filename}:{self.line}:{self.column}"
        kind = "runtime error" if self.where is None else f"runtime error in {self.where}"
        return f"{prefix}: {kind}: {self.message}"


class UnresolvedSegment(CoplRuntimeError):
    """A Storage or Map lookup missed while resolving a reference segment."""

    def __init__(self, container: str, key: object):
        self.container = container
        self.key = key
        self.segment: str | None = None
        super().__init__(f"unresolved reference segment: {container} key {key}")

    def attach_segment(self, concept: str) -> None:
        if self.segment is None:
            self.segment = concept
            self.message = f"{self.message} (segment {concept})"
            self.args = (self.message,)


class StepLimitExceeded(CoplRuntimeError):
    pass
