"""Command-line driver: compile, run, interpret and an interactive REPL.

Exit codes: 0 success, 1 language or semantic diagnostics, 2 I/O failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, TextIO

from .ast import Assign, dump
from .codegen import CodegenContext, compile_program
from .crn import RateConfig
from .diagnostics import CcxError, Diagnostic
from .emitter import emit_cain_xml, emit_crn_text, reaction_text
from .frontend import LineParser, parse, tokenize
from .interpreter import interpret
from .semantics import SymbolTable, analyze, check_supported, unsupported_constructs
from .simulator import SimConfig, run_ensemble, simulate, write_trace_csv

EXIT_OK, EXIT_DIAGNOSTIC, EXIT_IO = 0, 1, 2
PROMPT = "ccx> "
_EXTENSIONS = {"xml": ".xml", "crn": ".crn"}


class IoFailure(Exception):
    pass


def _read_source(args) -> tuple[str, Optional[Path]]:
    if args.code is not None:
        return args.code, None
    if args.source is None:
        raise IoFailure("no source file given (use a path or -c)")
    path = Path(args.source)
    try:
        return path.read_text(encoding="utf-8"), path
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from None


def _write(text: str, dest: Optional[str], stdout: TextIO) -> None:
    if dest is None or dest == "-":
        stdout.write(text)
        return
    try:
        Path(dest).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {dest}: {exc}") from None


def _rates(args) -> RateConfig:
    base = RateConfig()
    try:
        return RateConfig(
            args.fast if args.fast is not None else base.fast,
            args.slow if args.slow is not None else base.slow,
            args.veryslow if args.veryslow is not None else base.veryslow,
        )
    except ValueError as exc:
        raise CcxError(Diagnostic(f"bad rate constants: {exc}")) from None


def _compile(source: str):
    program = parse(tokenize(source))
    table = analyze(program)
    check_supported(program)
    return compile_program(program, table)


def cmd_compile(args, stdout: TextIO) -> int:
    source, path = _read_source(args)
    if args.emit == "tokens":
        text = "".join(f"{tok}\n" for tok in tokenize(source))
    elif args.emit == "ast":
        text = dump(parse(tokenize(source))) + "\n"
    else:
        crn = _compile(source)
        text = emit_cain_xml(crn, _rates(args)) if args.emit == "xml" else emit_crn_text(crn)
    dest = args.output
    if dest is None and path is not None and args.emit in _EXTENSIONS:
        dest = str(path.with_suffix(_EXTENSIONS[args.emit]))
    _write(text, dest, stdout)
    return EXIT_OK


def cmd_run(args, stdout: TextIO) -> int:
    source, _ = _read_source(args)
    crn = _compile(source)
    observe = tuple(args.observe) if args.observe else None
    config = SimConfig(seed=args.seed, horizon=args.horizon, rates=_rates(args), observe=observe)
    summary = run_ensemble(crn, config, args.runs)
    stdout.write("".join(line + "\n" for line in summary.lines()))
    if args.trace:
        _write(write_trace_csv(simulate(crn, config)), args.trace, stdout)
    return EXIT_OK


def cmd_interpret(args, stdout: TextIO) -> int:
    source, _ = _read_source(args)
    program = parse(tokenize(source))
    analyze(program)
    env = interpret(program)
    stdout.write("".join(f"{k} = {v}\n" for k, v in env.items()))
    return EXIT_OK


class Repl:
    """Line-wise session: each complete statement is interpreted and, when
    the backend supports it, lowered onto one growing reaction network."""

    def __init__(self, stdout: TextIO, stderr: TextIO):
        self.out, self.err = stdout, stderr
        self.lines = LineParser()
        self.table = SymbolTable()
        self.env: dict[str, int] = {}
        self.ctx = CodegenContext(self.table)

    def feed(self, text: str) -> None:
        try:
            stmts = self.lines.feed(text)
        except CcxError as exc:
            self.report(exc)
            return
        for stmt in stmts:
            try:
                self.execute(stmt)
            except CcxError as exc:
                self.report(exc)

    def execute(self, stmt) -> None:
        analyze([stmt], self.table)
        before = dict(self.env)
        interpret([stmt], self.env)
        if isinstance(stmt, Assign):
            self.out.write(f"{stmt.target} = {self.env[stmt.target]}\n")
        else:
            for name, value in self.env.items():
                if before.get(name) != value:
                    self.out.write(f"{name} = {value}\n")
        unsupported = unsupported_constructs([stmt])
        if unsupported:
            self.out.write(f"note: {unsupported[0].message}; interpreted only, no reactions emitted\n")
            return
        crn = self.ctx.crn
        first = len(crn.reactions)
        self.ctx.declare_variables()
        self.ctx.compile_stmt(stmt)
        for j in range(first, len(crn.reactions)):
            self.out.write(reaction_text(crn, crn.reactions[j], crn.reactions[j].label) + "\n")

    def report(self, exc: CcxError) -> None:
        for diag in exc.diagnostics:
            self.err.write(f"{diag}\n")

    def loop(self, stdin: TextIO, interactive: bool) -> int:
        while True:
            if interactive:
                self.out.write(PROMPT)
                self.out.flush()
            line = stdin.readline()
            if not line:
                break
            line = line.rstrip("\n")
            if line.strip() == "exit" and not self.lines.open:
                break
            self.feed(line)
        if self.lines.open:
            self.feed("")
        return EXIT_OK


def cmd_repl(args, stdout: TextIO, stdin: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    stdin = stdin or sys.stdin
    return Repl(stdout, stderr or sys.stderr).loop(stdin, stdin.isatty())


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccx", description="Compile integer programs to chemical reaction networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def source_args(p):
        p.add_argument("source", nargs="?", help="source file (.ccx)")
        p.add_argument("-c", dest="code", metavar="TEXT", help="program text instead of a file")

    def rate_args(p):
        for tier in ("fast", "slow", "veryslow"):
            p.add_argument(f"--{tier}", type=_positive_float, metavar="K", help=f"rate constant of the {tier} tier")

    p = sub.add_parser("compile", help="compile to CAIN XML or another intermediate form")
    source_args(p)
    p.add_argument("-o", dest="output", metavar="PATH",
                   help="output path; '-' for stdout (default: source with .xml/.crn extension)")
    p.add_argument("--emit", choices=("tokens", "ast", "crn", "xml"), default="xml")
    rate_args(p)

    p = sub.add_parser("run", help="compile and simulate an ensemble")
    source_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=_positive_int, default=100)
    p.add_argument("--horizon", type=_positive_float, default=SimConfig().horizon)
    p.add_argument("--observe", nargs="+", metavar="NAME")
    p.add_argument("--trace", metavar="CSV", help="write the trace of the first run ('-' for stdout)")
    rate_args(p)

    p = sub.add_parser("interpret", help="evaluate with the reference interpreter")
    source_args(p)

    sub.add_parser("repl", help="interactive session")
    return parser


_COMMANDS = {"compile": cmd_compile, "run": cmd_run, "interpret": cmd_interpret, "repl": cmd_repl}


def main(argv: Optional[list[str]] = None, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors keep argparse's own status (2)
        return int(exc.code or 0)
    try:
        if args.command == "repl":
            return cmd_repl(args, stdout, stderr=stderr)
        return _COMMANDS[args.command](args, stdout)
    except CcxError as exc:
        for diag in exc.diagnostics:
            stderr.write(f"{diag}\n")
        return EXIT_DIAGNOSTIC
    except IoFailure as exc:
        stderr.write(f"{exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
