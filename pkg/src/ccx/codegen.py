"""Lower checked ASTs to a chain of reaction modules."""

from __future__ import annotations

from typing import Iterable, Optional

from . import templates as T
from .ast import Assign, BinOp, Expr, IntLit, Program, Stmt, Var
from .crn import Crn, Kind, check
from .diagnostics import CcxError, Diagnostic
from .semantics import SymbolTable

REGISTERS = ("_localx", "_localy", "_localz")


class CodegenContext:
    """One compilation: the network under construction plus allocation state.

    Statements are lowered in order and every module is chained after the
    previous one; the first module's start signal is the program trigger.
    Expression results land in ``_localz``; compound operands use
    ``_localx``/``_localy`` and then ``_tmp{n}``.
    """

    def __init__(self, symtab: SymbolTable):
        self.crn = Crn()
        self.symtab = symtab
        self.modules: list[T.ModuleInstance] = []
        self.last: Optional[T.ModuleInstance] = None
        self.consts: dict[int, int] = {}
        self.registers: dict[str, int] = {}
        self._free_slots: list[str] = []
        self._busy_slots: set[str] = set()
        self._tmp_count = 0
        self.declare_variables()

    def declare_variables(self) -> None:
        for name, info in self.symtab.items():
            if info.species_ref is None or self.crn.get(name) is None:
                info.species_ref = self.crn.add_species(name, 0, Kind.USER)
                self.crn.observables.append(info.species_ref)

    def var_species(self, name: str) -> int:
        info = self.symtab.get(name)
        if info is None or info.species_ref is None:
            raise CcxError(Diagnostic(f"undeclared variable '{name}'"))
        return info.species_ref

    def const_species(self, value: int) -> int:
        if value < 0:
            raise ValueError("constants are non-negative")
        if value not in self.consts:
            name = f"c{value}"
            if name in self.symtab:
                name = f"_c{value}"
            self.consts[value] = self.crn.add_species(name, value, Kind.CONSTANT)
        return self.consts[value]

    def register(self, name: str) -> int:
        if name not in self.registers:
            self.registers[name] = self.crn.add_species(name, 0, Kind.REGISTER)
        return self.registers[name]

    def _fresh_temp(self) -> int:
        sid = self.crn.add_species(f"_tmp{self._tmp_count}", 0, Kind.REGISTER)
        self._tmp_count += 1
        return sid

    def _take_slot(self) -> int:
        for name in REGISTERS[:2]:
            if name not in self._busy_slots:
                self._busy_slots.add(name)
                return self.register(name)
        if self._free_slots:
            name = self._free_slots.pop()
        else:
            sid = self._fresh_temp()
            name = self.crn.name(sid)
            self.registers[name] = sid
        self._busy_slots.add(name)
        return self.registers[name]

    def _release_slot(self, sid: int) -> None:
        name = self.crn.name(sid)
        self._busy_slots.discard(name)
        if name not in REGISTERS:
            self._free_slots.append(name)

    def emit(self, inst: T.ModuleInstance) -> T.ModuleInstance:
        self.modules.append(inst)
        if inst.start is None:
            return inst
        if self.last is None:
            self.crn.species[inst.start].initial_count = 1
        else:
            T.chain(self.crn, self.last, inst)
        self.last = inst
        return inst

    def compile_stmt(self, stmt: Stmt) -> None:
        if not isinstance(stmt, Assign):
            kind = type(stmt).__name__.lower()
            raise CcxError(Diagnostic(f"unsupported construct '{kind}' at line {stmt.line}", stmt.line))
        self.compile_assign(stmt)

    def compile_assign(self, stmt: Assign) -> None:
        target = self.var_species(stmt.target)
        # evaluate before clearing: the right-hand side may read the target
        value = self.compile_expr(stmt.value, self.register("_localz") if isinstance(stmt.value, BinOp) else None)
        if value == target:
            return
        self.emit(T.instantiate_clear(self.crn, target))
        if isinstance(stmt.value, IntLit) and stmt.value.value == 0:
            return
        self.emit(T.instantiate_copy(self.crn, value, target))

    def _operand(self, expr: Expr) -> tuple[int, bool]:
        if isinstance(expr, BinOp):
            slot = self._take_slot()
            self.compile_expr(expr, slot)
            return slot, True
        return self.compile_expr(expr), False

    def compile_expr(self, expr: Expr, dst: Optional[int] = None) -> int:
        """Return the species holding the value of ``expr``.

        Literals and variables are used in place; operators write ``dst``.
        """
        if isinstance(expr, IntLit):
            return self.const_species(expr.value)
        if isinstance(expr, Var):
            return self.var_species(expr.name)
        if dst is None:
            raise ValueError("compound expressions need a destination")
        lhs, lslot = self._operand(expr.lhs)
        rhs, rslot = self._operand(expr.rhs)
        crn = self.crn
        if expr.op == "+":
            self.emit(T.instantiate_clear(crn, dst))
            self.emit(T.instantiate_copy(crn, lhs, dst))
            self.emit(T.instantiate_copy(crn, rhs, dst))
        elif expr.op == "-":
            temp = self._fresh_temp()
            self.emit(T.instantiate_clear(crn, dst))
            self.emit(T.instantiate_clear(crn, temp))
            self.emit(T.instantiate_subtract(crn, dst, temp))
            self.emit(T.instantiate_copy(crn, rhs, temp))
            self.emit(T.instantiate_copy(crn, lhs, dst))
            # drop whatever the subtrahend had left over
            self.emit(T.instantiate_clear(crn, temp))
        elif expr.op == "*":
            self.emit(T.instantiate_clear(crn, dst))
            self.emit(T.instantiate_multiply(crn, lhs, rhs, dst, zero=self.const_species(0)))
        else:
            raise CcxError(Diagnostic(f"unsupported construct '{expr.op}' at line {expr.line}", expr.line))
        for sid, slot in ((lhs, lslot), (rhs, rslot)):
            if slot:
                self._release_slot(sid)
        return dst


def compile_program(program: Program | Iterable[Stmt], symtab: SymbolTable) -> Crn:
    """Lower a program that passed ``analyze`` and ``check_supported``."""
    ctx = CodegenContext(symtab)
    stmts = program.body if isinstance(program, Program) else program
    for stmt in stmts:
        ctx.compile_stmt(stmt)
    check(ctx.crn)
    return ctx.crn


def compile_source(source: str) -> Crn:
    from .frontend import parse_source
    from .semantics import analyze, check_supported

    program = parse_source(source)
    table = analyze(program)
    check_supported(program)
    return compile_program(program, table)
