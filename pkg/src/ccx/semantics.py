"""Symbol table construction and backend-support checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .ast import COMPARE_OPS, Assign, BinOp, Expr, If, Program, Stmt, Var, While, iter_exprs
from .diagnostics import CcxError, Diagnostic


@dataclass
class SymbolInfo:
    first_line: int
    species_ref: Optional[int] = None


class SymbolTable(dict):
    """Variable name -> SymbolInfo, in first-assignment order.

    Every variable is global; a name is declared by its first assignment.
    """

    def declare(self, name: str, line: int) -> SymbolInfo:
        if name not in self:
            self[name] = SymbolInfo(line)
        return self[name]


def _check_uses(expr: Expr, table: SymbolTable, errors: list[Diagnostic]) -> None:
    for node in iter_exprs(expr):
        if isinstance(node, Var) and node.name not in table:
            errors.append(Diagnostic(f"undeclared variable '{node.name}' at line {node.line}", node.line))


def _walk(stmts: Iterable[Stmt], table: SymbolTable, errors: list[Diagnostic]) -> None:
    for stmt in stmts:
        if isinstance(stmt, Assign):
            _check_uses(stmt.value, table, errors)
            table.declare(stmt.target, stmt.line)
        else:
            _check_uses(stmt.cond, table, errors)
            _walk(stmt.body, table, errors)


def analyze(program: Program | Iterable[Stmt], table: Optional[SymbolTable] = None) -> SymbolTable:
    """Build the symbol table, raising CcxError listing every use-before-assignment.

    Passing an existing ``table`` extends it in place (the REPL keeps one
    table for the whole session); on error the table is left untouched.
    """
    stmts = program.body if isinstance(program, Program) else tuple(program)
    work = SymbolTable({k: SymbolInfo(v.first_line, v.species_ref) for k, v in (table or {}).items()})
    errors: list[Diagnostic] = []
    _walk(stmts, work, errors)
    if errors:
        raise CcxError(errors)
    if table is None:
        return work
    for name, info in work.items():
        table.setdefault(name, info)
    return table


def _unsupported(what: str, line: int) -> Diagnostic:
    return Diagnostic(f"unsupported construct '{what}' at line {line}", line)


def unsupported_constructs(program: Program | Iterable[Stmt]) -> list[Diagnostic]:
    stmts = program.body if isinstance(program, Program) else tuple(program)
    found: list[Diagnostic] = []
    for stmt in stmts:
        if isinstance(stmt, If):
            found.append(_unsupported("if", stmt.line))
        elif isinstance(stmt, While):
            found.append(_unsupported("while", stmt.line))
        else:
            for node in iter_exprs(stmt.value):
                if isinstance(node, BinOp) and (node.op == "/" or node.op in COMPARE_OPS):
                    found.append(_unsupported(node.op, node.line))
    return found


def check_supported(program: Program | Iterable[Stmt]) -> None:
    """Raise CcxError unless the program only uses assignment and ``+ - *``."""
    found = unsupported_constructs(program)
    if found:
        raise CcxError(found)
