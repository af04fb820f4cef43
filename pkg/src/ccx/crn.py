"""Species, reactions, rate tiers and stochastic mass-action propensities."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .diagnostics import CrnStructureError, Diagnostic


class Tier(str, enum.Enum):
    FAST = "fast"
    SLOW = "slow"
    VERYSLOW = "veryslow"


class Kind(str, enum.Enum):
    USER = "user-variable"
    REGISTER = "register"
    CONSTANT = "constant"
    START = "signal-start"
    DONE = "signal-done"
    PRIME = "temp-prime"
    INDICATOR = "absence-indicator"
    DETECT = "detection-t"
    FUEL = "fuel"


@dataclass(frozen=True)
class RateConfig:
    fast: float = 1000.0
    slow: float = 1.0
    veryslow: float = 0.01

    def __post_init__(self):
        if not (self.fast > self.slow > self.veryslow > 0):
            raise ValueError(f"rates must satisfy fast > slow > veryslow > 0, got {self}")

    def rate(self, tier: Tier) -> float:
        return getattr(self, Tier(tier).value)

    def scaled(self, factor: float) -> "RateConfig":
        return RateConfig(self.fast * factor, self.slow * factor, self.veryslow * factor)


@dataclass
class Species:
    id: int
    name: str
    initial_count: int
    kind: Kind = Kind.USER


Side = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Reaction:
    reactants: Side
    products: Side
    tier: Tier
    is_maintenance: bool = False
    label: str = ""

    def net_change(self) -> dict[int, int]:
        delta: Counter = Counter()
        for s, n in self.reactants:
            delta[s] -= n
        for s, n in self.products:
            delta[s] += n
        return {s: d for s, d in delta.items() if d}

    def catalysts(self) -> set[int]:
        """Species appearing with equal stoichiometry on both sides."""
        produced = dict(self.products)
        return {s for s, n in self.reactants if produced.get(s) == n}


@dataclass(frozen=True)
class IndicatorBinding:
    indicated: int
    indicator: int
    reactions: tuple[int, int, int]


SideSpec = Union[Mapping[int, int], Iterable[Union[int, tuple[int, int]]]]


def _normalize(side: SideSpec) -> Side:
    counts: Counter = Counter()
    items = side.items() if isinstance(side, Mapping) else side
    for item in items:
        if isinstance(item, tuple):
            sid, n = item
        else:
            sid, n = item, 1
        if not isinstance(n, int) or n < 1:
            raise CrnStructureError(f"stoichiometry must be a positive integer, got {n!r}")
        counts[sid] += n
    return tuple(sorted(counts.items()))


class Crn:
    """A reaction network under construction (and, once built, read-only)."""

    def __init__(self) -> None:
        self.species: list[Species] = []
        self.reactions: list[Reaction] = []
        self.observables: list[int] = []
        self.indicators: dict[int, IndicatorBinding] = {}
        self._by_name: dict[str, int] = {}
        self._indices: set[int] = set()

    def __len__(self) -> int:
        return len(self.species)

    def add_species(self, name: str, init: int = 0, kind: Kind = Kind.USER) -> int:
        if name in self._by_name:
            raise CrnStructureError(f"duplicate species name '{name}'")
        if not isinstance(init, int) or init < 0:
            raise CrnStructureError(f"initial count of '{name}' must be a non-negative integer")
        sid = len(self.species)
        self.species.append(Species(sid, name, init, Kind(kind)))
        self._by_name[name] = sid
        return sid

    def add_reaction(
        self,
        reactants: SideSpec,
        products: SideSpec,
        tier: Tier,
        is_maintenance: bool = False,
        label: str = "",
    ) -> int:
        rxn = Reaction(_normalize(reactants), _normalize(products), Tier(tier), is_maintenance, label)
        for sid, _ in rxn.reactants + rxn.products:
            if not 0 <= sid < len(self.species):
                raise CrnStructureError(f"reaction '{label}' references unknown species id {sid}")
        self.reactions.append(rxn)
        return len(self.reactions) - 1

    def id(self, name: str) -> int:
        return self._by_name[name]

    def get(self, name: str) -> Optional[int]:
        return self._by_name.get(name)

    def name(self, sid: int) -> str:
        return self.species[sid].name

    def initial_state(self) -> list[int]:
        return [s.initial_count for s in self.species]

    def new_index(self) -> int:
        idx = max(self._indices, default=0) + 1
        self._indices.add(idx)
        return idx

    def claim_index(self, idx: int) -> int:
        if idx < 1 or idx in self._indices:
            raise CrnStructureError(f"module index {idx} is not a fresh positive integer")
        self._indices.add(idx)
        return idx

    def reactions_labeled(self, prefix: str) -> list[int]:
        return [i for i, r in enumerate(self.reactions) if r.label.startswith(prefix)]


def propensity(reaction: Reaction, state: Sequence[int], rates: RateConfig) -> float:
    """Rate constant times the number of distinct reactant combinations."""
    combos = 1
    for sid, n in reaction.reactants:
        x = state[sid]
        if x < n:
            return 0.0
        combos *= math.comb(x, n)
    return rates.rate(reaction.tier) * combos


def apply(reaction: Reaction, state: list[int]) -> None:
    for sid, n in reaction.reactants:
        state[sid] -= n
    for sid, n in reaction.products:
        state[sid] += n


def validate(crn: Crn, require_observables: bool = False) -> list[Diagnostic]:
    """Structural checks; returns one diagnostic per violation (empty when ok)."""
    problems: list[Diagnostic] = []
    n = len(crn.species)
    seen: set[str] = set()
    for i, sp in enumerate(crn.species):
        if sp.id != i:
            problems.append(Diagnostic(f"species '{sp.name}' has id {sp.id}, expected {i}"))
        if sp.name in seen:
            problems.append(Diagnostic(f"duplicate species name '{sp.name}'"))
        seen.add(sp.name)
        if sp.initial_count < 0:
            problems.append(Diagnostic(f"species '{sp.name}' has negative initial count"))
    for j, rxn in enumerate(crn.reactions):
        label = rxn.label or f"r{j}"
        for sid, k in rxn.reactants + rxn.products:
            if not 0 <= sid < n:
                problems.append(Diagnostic(f"reaction '{label}' references unknown species id {sid}"))
            if k < 1:
                problems.append(Diagnostic(f"reaction '{label}' has stoichiometry {k}"))
    for sid in crn.observables:
        if not 0 <= sid < n:
            problems.append(Diagnostic(f"observable id {sid} does not exist"))
    if require_observables and not crn.observables:
        problems.append(Diagnostic("compiled network has no observables"))
    return problems


def check(crn: Crn, require_observables: bool = False) -> None:
    problems = validate(crn, require_observables)
    if problems:
        raise CrnStructureError("; ".join(p.message for p in problems))
