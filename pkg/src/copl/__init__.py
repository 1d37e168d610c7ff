"""COP-lite: a small concept-oriented language with programmable references."""

from copl.errors import CheckError, CoplError, CoplRuntimeError, LexError, ParseError, SourceError
from copl.lexer import Token, tokenize
from copl.parser import parse, parse_source
from copl.printer import pretty
from copl.runtime import Interpreter, RunResult, run
from copl.semantics import CheckedProgram, build_hierarchy, check, compute_reference_schema


def load(source: str) -> CheckedProgram:
    """Tokenize, parse and check ``source``."""
    return check(parse(tokenize(source)))


def run_source(source: str, **kwargs) -> RunResult:
    return run(load(source), **kwargs)


__all__ = [
    "CheckError", "CheckedProgram", "CoplError", "CoplRuntimeError", "Interpreter",
    "LexError", "ParseError", "RunResult", "SourceError", "Token", "build_hierarchy",
    "check", "compute_reference_schema", "load", "parse", "parse_source", "pretty",
    "run", "run_source", "tokenize",
]
