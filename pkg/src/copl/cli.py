"""``copl`` command line: parse, check and run COP-lite programs.

Exit codes: 0 success, 1 runtime error, 2 usage or I/O error, 3 parse/check error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from copl.errors import CoplRuntimeError, SourceError
from copl.lexer import tokenize
from copl.parser import parse
from copl.printer import pretty
from copl.runtime import DEFAULT_MAX_STEPS, Interpreter
from copl.semantics import check

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_SOURCE = 3


@dataclass(frozen=True)
class RunConfig:
    source_path: str
    mode: str = "run"  # run | check | tokens | ast
    trace_enabled: bool = False
    max_steps: int = DEFAULT_MAX_STEPS


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="copl", description="Run COP-lite programs.")
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_ArgumentParser)
    run_p = sub.add_parser("run", help="check and execute a program")
    run_p.add_argument("file")
    run_p.add_argument("--trace", action="store_true", help="write resolution events to stderr")
    run_p.add_argument("--max-steps", type=_positive, default=DEFAULT_MAX_STEPS)
    for mode, text in (("check", "report diagnostics only"),
                       ("ast", "pretty-print the parsed program"),
                       ("tokens", "list the tokens of a program")):
        sub.add_parser(mode, help=text).add_argument("file")
    return parser


def parse_args(argv: list[str]) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(ns.file, ns.mode, getattr(ns, "trace", False),
                     getattr(ns, "max_steps", DEFAULT_MAX_STEPS))


def execute(config: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        with open(config.source_path, encoding="utf-8") as fh:
            source = fh.read()
    except (OSError, UnicodeDecodeError) as err:
        print(f"copl: error: cannot read {config.source_path}: {err}", file=stderr)
        return EXIT_USAGE

    try:
        tokens = tokenize(source)
        if config.mode == "tokens":
            for tok in tokens:
                stdout.write(f"{tok.line}:{tok.column}\t{tok.kind}\t{tok.lexeme!r}\n")
            return EXIT_OK
        program = parse(tokens)
        if config.mode == "ast":
            stdout.write(pretty(program))
            return EXIT_OK
        checked = check(program)
    except SourceError as err:
        print(err.format(config.source_path), file=stderr)
        return EXIT_SOURCE
    if config.mode == "check":
        return EXIT_OK

    sink = (lambda line: print(line, file=stderr)) if config.trace_enabled else None
    interp = Interpreter(checked, max_steps=config.max_steps, trace=sink, stdout=stdout)
    try:
        interp.run_main()
    except CoplRuntimeError as err:
        stdout.flush()
        print(err.format(config.source_path), file=stderr)
        return EXIT_RUNTIME
    finally:
        stdout.flush()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    return execute(config)


if __name__ == "__main__":
    sys.exit(main())
