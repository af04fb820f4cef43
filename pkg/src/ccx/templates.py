"""Rate-independent reaction modules.

Each ``instantiate_*`` function appends one module to a network: its private
start/done signals, helper species suffixed with the module index, and its
reactions labeled ``{kind}.{index}.{ref}`` where ``ref`` is the reaction's
number inside the template (``copy.3.4`` is the restore-and-output step of
copy module 3).

Absence indicators: for a species ``X`` the indicator ``X_ab`` is kept near
one while ``X`` is absent and near zero while it is present, by

    0 ->slow X_ab        X + X_ab ->fast X        2 X_ab ->fast X_ab

Modules are sequenced with linking reactions ``done -> start`` at the
``veryslow`` tier. A link is additionally catalysed by the absence
indicators of the module's pending species (``var'`` for clear, copy and
inc/dec) so a hand-off cannot happen while cleanup is still under way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .crn import Crn, IndicatorBinding, Kind, Tier
from .diagnostics import CrnStructureError

SLOW, FAST, VERYSLOW = Tier.SLOW, Tier.FAST, Tier.VERYSLOW


@dataclass
class ModuleInstance:
    kind: str
    index: int
    start: Optional[int]
    done: Optional[int]
    locals: dict[str, int] = field(default_factory=dict)
    reactions: list[int] = field(default_factory=list)
    # species that must be absent before the done signal may be handed on
    pending: tuple[int, ...] = ()
    children: list["ModuleInstance"] = field(default_factory=list)

    @property
    def label_prefix(self) -> str:
        return f"{self.kind}.{self.index}."


def ensure_indicator(crn: Crn, species: int) -> IndicatorBinding:
    """Create (once) the absence indicator of ``species`` and its upkeep reactions."""
    if species in crn.indicators:
        return crn.indicators[species]
    sp = crn.species[species]
    name = f"{sp.name}_ab"
    ab = crn.add_species(name, 1 if sp.initial_count == 0 else 0, Kind.INDICATOR)
    rxns = (
        crn.add_reaction([], [ab], SLOW, True, f"ab.{sp.name}.gen"),
        crn.add_reaction([species, ab], [species], FAST, True, f"ab.{sp.name}.consume"),
        crn.add_reaction([(ab, 2)], [ab], FAST, True, f"ab.{sp.name}.cap"),
    )
    binding = IndicatorBinding(species, ab, rxns)
    crn.indicators[species] = binding
    return binding


def _ab(crn: Crn, species: int) -> int:
    return ensure_indicator(crn, species).indicator


def _index(crn: Crn, idx: Optional[int]) -> int:
    return crn.new_index() if idx is None else crn.claim_index(idx)


class _Builder:
    def __init__(self, crn: Crn, kind: str, idx: int):
        self.crn = crn
        self.inst = ModuleInstance(kind, idx, None, None)

    def species(self, role: str, name: str, kind: Kind, init: int = 0) -> int:
        sid = self.crn.add_species(f"{name}_{self.inst.index}", init, kind)
        self.inst.locals[role] = sid
        return sid

    def rxn(self, ref: str, reactants, products, tier: Tier) -> int:
        rid = self.crn.add_reaction(reactants, products, tier, False, f"{self.inst.label_prefix}{ref}")
        self.inst.reactions.append(rid)
        return rid


def _signals(b: _Builder) -> tuple[int, int]:
    start = b.species("start", "start", Kind.START)
    done = b.species("done", "done", Kind.DONE)
    b.inst.start, b.inst.done = start, done
    return start, done


def _transfer_module(crn: Crn, kind: str, var: int, output: Optional[int], idx: Optional[int]) -> ModuleInstance:
    b = _Builder(crn, kind, _index(crn, idx))
    start, done = _signals(b)
    b.inst.locals["var"] = var
    varp = b.species("var_prime", f"{crn.name(var)}p", Kind.PRIME)
    done_ab, var_ab = _ab(crn, done), _ab(crn, var)
    _ab(crn, varp)
    b.rxn("1", [start, var, done_ab], [varp, start], SLOW)
    b.rxn("2", [start, var_ab], [done], SLOW)
    b.rxn("3", [(done, 2)], [done], FAST)
    restore = [done] if output is None else [done, var, output]
    b.rxn("4", [done, varp], restore, SLOW)
    b.rxn("5", [start, done], [done], SLOW)
    b.inst.pending = (varp,)
    return b.inst


def instantiate_clear(crn: Crn, target: int, idx: Optional[int] = None) -> ModuleInstance:
    """Drive ``target`` to zero."""
    return _transfer_module(crn, "clear", target, None, idx)


def instantiate_copy(crn: Crn, source: int, dest: int, idx: Optional[int] = None) -> ModuleInstance:
    """Add the count of ``source`` to ``dest``; ``source`` is restored afterwards."""
    if source == dest:
        raise CrnStructureError("copy source and destination must differ")
    inst = _transfer_module(crn, "copy", source, dest, idx)
    inst.locals["output"] = dest
    return inst


def instantiate_incdec(crn: Crn, target: int, direction: str, idx: Optional[int] = None) -> ModuleInstance:
    """Increment or decrement ``target`` by one (decrement floors at zero).

    The back-transfer step ``done + 2 var' -> done + var + var' + var_rx`` runs
    at the fast tier: at slow it races the final step, which is only held
    off by ``var_rx``, and loses often enough to corrupt the result.
    """
    if direction not in ("inc", "dec"):
        raise ValueError(f"direction must be 'inc' or 'dec', got {direction!r}")
    b = _Builder(crn, direction, _index(crn, idx))
    start, done = _signals(b)
    b.inst.locals["var"] = target
    name = crn.name(target)
    varp = b.species("var_prime", f"{name}p", Kind.PRIME)
    varrx = b.species("var_rx", f"{name}rx", Kind.PRIME)
    done_ab, var_ab, rx_ab = _ab(crn, done), _ab(crn, target), _ab(crn, varrx)
    _ab(crn, varp)
    b.rxn("1", [target, start, done_ab], [varp, start], SLOW)
    b.rxn("2", [start, var_ab], [done], SLOW)
    b.rxn("3", [done, (varp, 2)], [done, target, varp, varrx], FAST)
    b.rxn("4", [varrx], [], SLOW)
    if direction == "dec":
        b.rxn("5.1", [done, rx_ab, varp], [done], SLOW)
    else:
        b.rxn("5.2", [done, rx_ab, varp], [done, (target, 2)], SLOW)
    b.rxn("6", [(done, 2)], [done], FAST)
    b.rxn("7", [start, done], [done], SLOW)
    b.inst.pending = (varp,)
    return b.inst


def instantiate_compare(crn: Crn, a: int, b: int, idx: Optional[int] = None, fuel: int = 1) -> ModuleInstance:
    """Three-way comparison of two destructible copies.

    Exactly one outcome token is released per unit of fuel: ``t1`` when
    a == b, ``t2`` when a > b, ``t3`` when a < b.
    """
    if a == b:
        raise CrnStructureError("compare operands must be distinct species")
    bld = _Builder(crn, "compare", _index(crn, idx))
    f = bld.species("fuel", "fuel", Kind.FUEL, fuel)
    t1 = bld.species("t1", "t1", Kind.DETECT)
    t2 = bld.species("t2", "t2", Kind.DETECT)
    t3 = bld.species("t3", "t3", Kind.DETECT)
    a_ab, b_ab = _ab(crn, a), _ab(crn, b)
    bld.inst.start = f
    bld.rxn("1", [a, b], [], SLOW)
    bld.rxn("2.1", [f, a_ab, b_ab], [a_ab, b_ab, t1], SLOW)
    bld.rxn("2.2", [f, a, b_ab], [a, b_ab, t2], SLOW)
    bld.rxn("2.3", [f, a_ab, b], [a_ab, b, t3], SLOW)
    # scavengers: in each terminal context destroy the two wrong outcomes
    for ref, ctx, wrong in (
        ("3.1", [a_ab, b_ab], (t2, t3)),
        ("3.2", [a, b_ab], (t1, t3)),
        ("3.3", [a_ab, b], (t1, t2)),
    ):
        for k, t in enumerate(wrong, 1):
            bld.rxn(f"{ref}.{k}", ctx + [t], ctx, SLOW)
    return bld.inst


def instantiate_subtract(crn: Crn, target: int, temp: int, idx: Optional[int] = None) -> ModuleInstance:
    """Always-on annihilation ``target + temp -> 0``; leaves max(target - temp, 0)."""
    if target == temp:
        raise CrnStructureError("subtract operands must be distinct species")
    b = _Builder(crn, "subtract", _index(crn, idx))
    b.inst.locals.update(target=target, temp=temp)
    b.rxn("1", [target, temp], [], FAST)
    return b.inst


def _gates(crn: Crn, inst: ModuleInstance) -> list[int]:
    return [_ab(crn, s) for s in inst.pending]


def link(crn: Crn, prev: ModuleInstance, target: int, label: str) -> int:
    """Hand ``prev``'s done signal over to ``target`` once its cleanup is over."""
    if prev.done is None:
        raise CrnStructureError(f"module {prev.label_prefix.rstrip('.')} has no done signal")
    gates = _gates(crn, prev)
    return crn.add_reaction([prev.done, *gates], [target, *gates], VERYSLOW, False, label)


def chain(crn: Crn, prev: ModuleInstance, nxt: ModuleInstance, label: Optional[str] = None) -> int:
    if prev is nxt or (prev.kind, prev.index) == (nxt.kind, nxt.index):
        raise CrnStructureError("cannot chain a module to itself")
    if nxt.start is None:
        raise CrnStructureError(f"module {nxt.label_prefix.rstrip('.')} has no start signal")
    return link(crn, prev, nxt.start, label or f"link.{prev.index}.{nxt.index}")


def instantiate_multiply(
    crn: Crn,
    a: int,
    b: int,
    dest: int,
    idx: Optional[int] = None,
    zero: Optional[int] = None,
) -> ModuleInstance:
    """Add a * b to ``dest`` (which the caller clears beforehand).

    Runs ``counter = a; while (counter > 0) { dest += b; counter -= 1; }``:
    a copy into a private counter, a comparison of the counter against a
    zero species, and a body of copy-then-decrement. The comparison's
    fuel is refilled after the entry copy and after every body pass.
    """
    if dest in (a, b):
        raise CrnStructureError("multiply destination must differ from its operands")
    i = _index(crn, idx)
    counter = crn.add_species(f"cnt_{i}", 0, Kind.REGISTER)
    if zero is None:
        zero = crn.add_species(f"zero_{i}", 0, Kind.CONSTANT)
    done = crn.add_species(f"done_{i}", 0, Kind.DONE)

    enter = instantiate_copy(crn, a, counter)
    test = instantiate_compare(crn, counter, zero, fuel=0)
    body = instantiate_copy(crn, b, dest)
    step = instantiate_incdec(crn, counter, "dec")
    fuel, t1, t2 = test.locals["fuel"], test.locals["t1"], test.locals["t2"]

    inst = ModuleInstance(
        "multiply", i, enter.start, done,
        locals=dict(counter=counter, zero=zero, fuel=fuel, t1=t1, t2=t2, t3=test.locals["t3"]),
        children=[enter, test, body, step],
    )
    prefix = inst.label_prefix + "link."
    inst.reactions += [
        link(crn, enter, fuel, prefix + "enter"),
        crn.add_reaction([t2], [body.start], FAST, False, prefix + "t2"),
        chain(crn, body, step, prefix + "body"),
        link(crn, step, fuel, prefix + "loop"),
        crn.add_reaction([t1], [done], FAST, False, prefix + "t1"),
    ]
    return inst


TEMPLATE_SIZES = {"clear": 5, "copy": 5, "inc": 7, "dec": 7, "compare": 10, "subtract": 1}


def own_reactions(crn: Crn, inst: ModuleInstance) -> Sequence[int]:
    return [r for r in inst.reactions if crn.reactions[r].label.startswith(inst.label_prefix)]
