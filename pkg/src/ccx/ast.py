"""AST node types for the mini-language.

Nodes compare structurally; the ``line`` field is excluded from equality so
trees built from differently laid-out sources can be compared directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

ARITH_OPS = ("+", "-", "*", "/")
COMPARE_OPS = ("<", ">", "<=", ">=", "==", "!=")

# binding strength, higher binds tighter
PRECEDENCE = {
    "*": 3, "/": 3,
    "+": 2, "-": 2,
    "<": 1, ">": 1, "<=": 1, ">=": 1, "==": 1, "!=": 1,
}


@dataclass(frozen=True)
class IntLit:
    value: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    line: int = field(default=0, compare=False)


Expr = Union[IntLit, Var, BinOp]


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    body: tuple["Stmt", ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]
    line: int = field(default=0, compare=False)


Stmt = Union[Assign, If, While]


@dataclass(frozen=True)
class Program:
    body: tuple[Stmt, ...]
    line: int = field(default=1, compare=False)


def iter_exprs(expr: Expr):
    """Yield ``expr`` and all of its sub-expressions, pre-order."""
    yield expr
    if isinstance(expr, BinOp):
        yield from iter_exprs(expr.lhs)
        yield from iter_exprs(expr.rhs)


def dump(node) -> str:
    """Render a tree one node per line, parenthesized, two-space indent."""
    lines: list[str] = []

    def visit(n, depth: int) -> None:
        pad = "  " * depth
        if isinstance(n, IntLit):
            lines.append(f"{pad}(int {n.value})")
            return
        if isinstance(n, Var):
            lines.append(f"{pad}(var {n.name})")
            return
        if isinstance(n, BinOp):
            lines.append(f"{pad}(binop {n.op}")
            kids = [n.lhs, n.rhs]
        elif isinstance(n, Assign):
            lines.append(f"{pad}(assign {n.target}")
            kids = [n.value]
        elif isinstance(n, (If, While)):
            lines.append(f"{pad}({'if' if isinstance(n, If) else 'while'}")
            kids = [n.cond, *n.body]
        elif isinstance(n, Program):
            lines.append(f"{pad}(program")
            kids = list(n.body)
        else:
            raise TypeError(f"not an AST node: {n!r}")
        for kid in kids:
            visit(kid, depth + 1)
        lines[-1] += ")"

    visit(node, 0)
    return "\n".join(lines)


def expr_source(expr: Expr, parent_prec: int = 0, right: bool = False) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    prec = PRECEDENCE[expr.op]
    text = f"{expr_source(expr.lhs, prec)} {expr.op} {expr_source(expr.rhs, prec, True)}"
    # left-associative: a right operand at equal precedence needs parentheses
    if prec < parent_prec or (right and prec == parent_prec):
        return f"({text})"
    return text


def to_source(node, indent: int = 0) -> str:
    """Pretty-print back to source text that re-parses to an equal tree."""
    pad = "    " * indent
    if isinstance(node, Program):
        return "".join(to_source(s, indent) for s in node.body)
    if isinstance(node, Assign):
        return f"{pad}{node.target} = {expr_source(node.value)};\n"
    if isinstance(node, (If, While)):
        kw = "if" if isinstance(node, If) else "while"
        body = "".join(to_source(s, indent + 1) for s in node.body)
        return f"{pad}{kw} ({expr_source(node.cond)})\n{pad}{{\n{body}{pad}}}\n"
    return expr_source(node)
