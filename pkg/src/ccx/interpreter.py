"""Reference evaluator over non-negative integers.

Subtraction is monus (``5 - 7`` is 0), matching what annihilation does to
molecule counts. Division floors. Comparisons produce 1 or 0 and a
condition holds when it is non-zero.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .ast import Assign, BinOp, Expr, If, IntLit, Program, Stmt, Var, While
from .diagnostics import CcxError, Diagnostic

STEP_LIMIT = 10_000_000

Env = dict[str, int]


def _arith(op: str, a: int, b: int, line: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return max(a - b, 0)
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise CcxError(Diagnostic(f"division by zero at line {line}", line))
        return a // b
    return int({
        "<": a < b, ">": a > b, "<=": a <= b, ">=": a >= b, "==": a == b, "!=": a != b,
    }[op])


class Interpreter:
    def __init__(self, env: Optional[Env] = None, step_limit: int = STEP_LIMIT):
        self.env: Env = env if env is not None else {}
        self.steps = 0
        self.step_limit = step_limit

    def tick(self, line: int) -> None:
        self.steps += 1
        if self.steps > self.step_limit:
            raise CcxError(Diagnostic(f"step limit of {self.step_limit} exceeded at line {line}", line))

    def eval(self, expr: Expr) -> int:
        if isinstance(expr, IntLit):
            return expr.value
        if isinstance(expr, Var):
            if expr.name not in self.env:
                raise CcxError(Diagnostic(f"undeclared variable '{expr.name}' at line {expr.line}", expr.line))
            return self.env[expr.name]
        assert isinstance(expr, BinOp)
        return _arith(expr.op, self.eval(expr.lhs), self.eval(expr.rhs), expr.line)

    def run(self, stmts: Iterable[Stmt]) -> Env:
        for stmt in stmts:
            self.tick(stmt.line)
            if isinstance(stmt, Assign):
                self.env[stmt.target] = self.eval(stmt.value)
            elif isinstance(stmt, If):
                if self.eval(stmt.cond) != 0:
                    self.run(stmt.body)
            elif isinstance(stmt, While):
                while self.eval(stmt.cond) != 0:
                    self.run(stmt.body)
                    self.tick(stmt.line)
        return self.env


def interpret(program: Program | Iterable[Stmt], env: Optional[Env] = None,
              step_limit: int = STEP_LIMIT) -> Env:
    """Run ``program`` and return the environment in first-assignment order.

    ``env`` is updated in place when given. Every executed statement and
    every loop iteration counts as one step.
    """
    stmts = program.body if isinstance(program, Program) else program
    return Interpreter(env, step_limit).run(stmts)
