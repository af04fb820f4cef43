"""CAIN-style XML and plain-text serialization of reaction networks."""

from __future__ import annotations

import re
from xml.parsers import expat

from .crn import Crn, Kind, RateConfig, Reaction, Tier, check
from .diagnostics import CcxError, Diagnostic

MODEL_ID = "ccx"


def _refs(side, indent: str) -> list[str]:
    return [f'{indent}<speciesReference species="s{sid}" stoichiometry="{n}"/>' for sid, n in side]


def _side_xml(tag: str, side, indent: str) -> list[str]:
    if not side:
        return [f"{indent}<{tag}/>"]
    return [f"{indent}<{tag}>", *_refs(side, indent + "  "), f"{indent}</{tag}>"]


def emit_cain_xml(crn: Crn, rates: RateConfig = RateConfig()) -> str:
    check(crn)
    out = ['<?xml version="1.0" encoding="UTF-8"?>', "<cain>", "  <listOfModels>", f'    <model id="{MODEL_ID}">']
    out.append("      <listOfParameters>")
    for tier in Tier:
        out.append(f'        <parameter id="{tier.value}" expression="{rates.rate(tier)!r}"/>')
    out.append("      </listOfParameters>")
    out.append("      <listOfSpecies>")
    for sp in crn.species:
        out.append(f'        <species id="s{sp.id}" name="{sp.name}" initialAmount="{sp.initial_count}"/>')
    out.append("      </listOfSpecies>")
    out.append("      <listOfReactions>")
    for j, rxn in enumerate(crn.reactions):
        out.append(f'        <reaction id="r{j}" massAction="true" propensity="{rxn.tier.value}">')
        out += _side_xml("listOfReactants", rxn.reactants, "          ")
        out += _side_xml("listOfProducts", rxn.products, "          ")
        out.append("        </reaction>")
    out.append("      </listOfReactions>")
    out += ["    </model>", "  </listOfModels>", "</cain>"]
    return "\n".join(out) + "\n"


_KIND_PATTERNS = [
    (re.compile(r".+_ab$"), Kind.INDICATOR),
    (re.compile(r"start_\d+$"), Kind.START),
    (re.compile(r"done_\d+$"), Kind.DONE),
    (re.compile(r"fuel_\d+$"), Kind.FUEL),
    (re.compile(r"t[123]_\d+$"), Kind.DETECT),
    (re.compile(r".+(p|rx)_\d+$"), Kind.PRIME),
    (re.compile(r"_?c\d+$|zero_\d+$"), Kind.CONSTANT),
    (re.compile(r"_.*|cnt_\d+$"), Kind.REGISTER),
]


def _kind_from_name(name: str) -> Kind:
    for pattern, kind in _KIND_PATTERNS:
        if pattern.match(name):
            return kind
    return Kind.USER


class _CainReader:
    def __init__(self, data: bytes):
        self.data = data
        self.parser = expat.ParserCreate("UTF-8")
        self.parser.StartElementHandler = self.start
        self.parser.EndElementHandler = self.end
        self.params: dict[str, str] = {}
        self.species: list[tuple[str, str, str, int]] = []
        self.reactions: list[dict] = []
        self.side: list | None = None

    def error(self, message: str) -> CcxError:
        return CcxError(Diagnostic(f"{message} at byte {self.parser.CurrentByteIndex}",
                                   offset=self.parser.CurrentByteIndex))

    def attr(self, attrs: dict, key: str) -> str:
        if key not in attrs:
            raise self.error(f"missing attribute '{key}'")
        return attrs[key]

    def start(self, tag: str, attrs: dict) -> None:
        if tag == "parameter":
            self.params[self.attr(attrs, "id")] = self.attr(attrs, "expression")
        elif tag == "species":
            amount = self.attr(attrs, "initialAmount")
            if not amount.isdigit():
                raise self.error(f"initialAmount '{amount}' is not a non-negative integer")
            self.species.append((self.attr(attrs, "id"), attrs.get("name", attrs["id"]), amount,
                                 self.parser.CurrentByteIndex))
        elif tag == "reaction":
            self.reactions.append(dict(id=self.attr(attrs, "id"), tier=self.attr(attrs, "propensity"),
                                       at=self.parser.CurrentByteIndex, reactants=[], products=[]))
        elif tag in ("listOfReactants", "listOfProducts") and self.reactions:
            self.side = self.reactions[-1]["reactants" if tag == "listOfReactants" else "products"]
        elif tag == "speciesReference":
            if self.side is None:
                raise self.error("speciesReference outside a reactant or product list")
            sto = self.attr(attrs, "stoichiometry")
            if not sto.isdigit() or int(sto) < 1:
                raise self.error(f"bad stoichiometry '{sto}'")
            self.side.append((self.attr(attrs, "species"), int(sto), self.parser.CurrentByteIndex))

    def end(self, tag: str) -> None:
        if tag in ("listOfReactants", "listOfProducts"):
            self.side = None

    def read(self) -> None:
        try:
            self.parser.Parse(self.data, True)
        except expat.ExpatError as exc:
            offset = self.parser.ErrorByteIndex
            raise CcxError(Diagnostic(f"malformed XML: {expat.errors.messages[exc.code]} at byte {offset}",
                                      exc.lineno, offset)) from None


def parse_cain_xml(text: str | bytes) -> tuple[Crn, RateConfig]:
    """Rebuild a network (and its rate parameters) from ``emit_cain_xml`` output.

    Species kinds, observables and absence-indicator bindings are recovered
    from naming conventions; reaction labels become ``r{N}``.
    """
    data = text.encode("utf-8") if isinstance(text, str) else text
    reader = _CainReader(data)
    reader.read()
    try:
        rates = RateConfig(**{t.value: float(reader.params[t.value]) for t in Tier if t.value in reader.params})
    except ValueError as exc:
        raise CcxError(Diagnostic(f"bad rate parameters: {exc}")) from None
    crn = Crn()
    ids: dict[str, int] = {}
    for sid, name, amount, at in reader.species:
        if sid in ids or crn.get(name) is not None:
            raise CcxError(Diagnostic(f"duplicate species '{name}' at byte {at}", offset=at))
        ids[sid] = crn.add_species(name, int(amount), _kind_from_name(name))
    for rx in reader.reactions:
        if rx["tier"] not in {t.value for t in Tier}:
            raise CcxError(Diagnostic(f"unknown propensity reference '{rx['tier']}' at byte {rx['at']}",
                                      offset=rx["at"]))
        sides = []
        for key in ("reactants", "products"):
            side = []
            for ref, n, at in rx[key]:
                if ref not in ids:
                    raise CcxError(Diagnostic(f"undefined species '{ref}' at byte {at}", offset=at))
                side.append((ids[ref], n))
            sides.append(side)
        crn.add_reaction(sides[0], sides[1], Tier(rx["tier"]), False, rx["id"])
    _recover_metadata(crn)
    return crn, rates


def _recover_metadata(crn: Crn) -> None:
    from .crn import IndicatorBinding

    crn.observables = [sp.id for sp in crn.species if sp.kind is Kind.USER]
    upkeep: dict[int, dict[str, int]] = {}
    for j, r in enumerate(crn.reactions):
        shape = _upkeep_shape(crn, r)
        if shape is not None:
            ab, role = shape
            upkeep.setdefault(ab, {})[role] = j
    for ab, roles in upkeep.items():
        indicated = crn.get(crn.name(ab)[: -len("_ab")])
        if indicated is None or set(roles) != {"gen", "consume", "cap"}:
            continue
        for j in roles.values():
            r = crn.reactions[j]
            crn.reactions[j] = Reaction(r.reactants, r.products, r.tier, True, r.label)
        crn.indicators[indicated] = IndicatorBinding(indicated, ab, (roles["gen"], roles["consume"], roles["cap"]))


def _upkeep_shape(crn: Crn, r: Reaction):
    """Classify ``r`` as an indicator upkeep reaction: (indicator id, role) or None."""
    if not r.products:
        return None
    if not r.reactants and len(r.products) == 1 and r.products[0][1] == 1 and r.tier is Tier.SLOW:
        ab = r.products[0][0]
        return (ab, "gen") if crn.species[ab].kind is Kind.INDICATOR else None
    if r.tier is not Tier.FAST:
        return None
    if len(r.reactants) == 1 and r.reactants[0][1] == 2 and r.products == ((r.reactants[0][0], 1),):
        ab = r.reactants[0][0]
        return (ab, "cap") if crn.species[ab].kind is Kind.INDICATOR else None
    if len(r.reactants) == 2 and len(r.products) == 1 and all(n == 1 for _, n in r.reactants):
        (x, _), = r.products
        others = [s for s, _ in r.reactants if s != x]
        if len(others) == 1 and crn.name(others[0]) == crn.name(x) + "_ab":
            return others[0], "consume"
    return None


def _side_text(crn: Crn, side) -> str:
    if not side:
        return "0"
    return " + ".join(crn.name(s) if n == 1 else f"{n} {crn.name(s)}" for s, n in side)


def reaction_text(crn: Crn, rxn: Reaction, label: str) -> str:
    return f"{label}: {_side_text(crn, rxn.reactants)} ->{rxn.tier.value} {_side_text(crn, rxn.products)}"


def emit_crn_text(crn: Crn, reactions=None) -> str:
    """Species header lines followed by one reaction per line, in id order."""
    check(crn)
    lines = [f"# species: {sp.name}={sp.initial_count}" for sp in crn.species]
    chosen = range(len(crn.reactions)) if reactions is None else reactions
    lines += [reaction_text(crn, crn.reactions[j], crn.reactions[j].label or f"r{j}") for j in chosen]
    return "\n".join(lines) + "\n" if lines else ""
