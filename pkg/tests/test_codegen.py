import pytest
from hypothesis import given, settings, strategies as st

from ccx.codegen import CodegenContext, compile_program, compile_source
from ccx.crn import Kind, Tier, validate
from ccx.diagnostics import CcxError
from ccx.emitter import emit_crn_text
from ccx.frontend import parse_source
from ccx.semantics import analyze

from conftest import ensemble


def modules(src):
    prog = parse_source(src)
    ctx = CodegenContext(analyze(prog))
    for stmt in prog.body:
        ctx.compile_stmt(stmt)
    return ctx


def reads(ctx):
    return [ctx.crn.name(m.locals["var"]) if "var" in m.locals else m.kind for m in ctx.modules]


def writes(ctx):
    return [ctx.crn.name(m.locals["output"]) if "output" in m.locals else None for m in ctx.modules]


def starts(crn):
    return {sp.name: sp.initial_count for sp in crn.species if sp.kind is Kind.START}


def test_literal_assignment_is_clear_then_copy():
    ctx = modules("x = 10;")
    assert [m.kind for m in ctx.modules] == ["clear", "copy"]
    crn = ctx.crn
    assert crn.species[crn.id("c10")].initial_count == 10
    assert starts(crn) == {"start_1": 1, "start_2": 0}
    assert [crn.name(i) for i in crn.observables] == ["x"]
    assert len(crn.reactions_labeled("link.")) == 1


def test_two_assignments_have_three_links():
    ctx = modules("x = 2; y = x;")
    assert [m.kind for m in ctx.modules] == ["clear", "copy", "clear", "copy"]
    assert reads(ctx) == ["x", "c2", "y", "x"]
    assert writes(ctx) == [None, "x", None, "y"]
    assert len(ctx.crn.reactions_labeled("link.")) == 3
    assert [ctx.crn.reactions[j].label for j in ctx.crn.reactions_labeled("link.")] == [
        "link.1.2", "link.2.3", "link.3.4",
    ]


def test_copy_from_variable_preserves_it():
    ctx = modules("x = 3; y = x;")
    copy = ctx.modules[-1]
    r4 = ctx.crn.reactions[copy.reactions[3]]
    assert r4.net_change() == {copy.locals["var_prime"]: -1, ctx.crn.id("x"): 1, ctx.crn.id("y"): 1}


def test_zero_assignment_is_clear_only():
    ctx = modules("x = 0;")
    assert [m.kind for m in ctx.modules] == ["clear"]


def test_self_reference_evaluates_before_clearing():
    ctx = modules("x = 1; x = x + 1;")
    kinds = [m.kind for m in ctx.modules]
    # x = 1 | _localz = x + 1 | x = _localz
    assert kinds == ["clear", "copy", "clear", "copy", "copy", "clear", "copy"]
    assert reads(ctx) == ["x", "c1", "_localz", "x", "c1", "x", "_localz"]
    assert writes(ctx)[3:] == ["_localz", "_localz", None, "x"]


def test_addition_uses_two_copies():
    ctx = modules("z = 2 + 3;")
    assert [m.kind for m in ctx.modules] == ["clear", "copy", "copy", "clear", "copy"]
    assert reads(ctx) == ["_localz", "c2", "c3", "z", "_localz"]


def test_subtraction_lowering():
    ctx = modules("z = 5 - 7;")
    assert [m.kind for m in ctx.modules] == [
        "clear", "clear", "subtract", "copy", "copy", "clear", "clear", "copy",
    ]
    assert reads(ctx) == ["_localz", "_tmp0", "subtract", "c7", "c5", "_tmp0", "z", "_localz"]
    assert writes(ctx)[3:5] == ["_tmp0", "_localz"]
    sub = ctx.modules[2]
    assert sub.start is None
    # the subtract reaction is not part of the chain
    assert len(ctx.crn.reactions_labeled("link.")) == 6


def test_multiplication_uses_the_macro():
    ctx = modules("z = 2 * 3;")
    assert [m.kind for m in ctx.modules] == ["clear", "multiply", "clear", "copy"]
    assert ctx.crn.get("c0") is not None


def test_nested_operands_use_registers_then_temps():
    ctx = modules("a = 1; z = (a + 2) * (a + 3) + (a * 4 - (a + 5));")
    names = [sp.name for sp in ctx.crn.species if sp.kind is Kind.REGISTER and not sp.name.startswith("cnt")]
    assert names[:3] == ["_localz", "_localx", "_localy"]
    assert any(n.startswith("_tmp") for n in names)


def test_constants_are_cached():
    ctx = modules("x = 7; y = 7; z = x + 7;")
    assert [sp.name for sp in ctx.crn.species if sp.kind is Kind.CONSTANT] == ["c7"]
    assert ctx.const_species(0) == ctx.const_species(0)
    assert ctx.crn.species[ctx.const_species(0)].initial_count == 0


def test_constant_name_avoids_user_variables():
    crn = compile_source("c3 = 3; y = c3 + 3;")
    assert crn.get("_c3") is not None and crn.species[crn.id("_c3")].initial_count == 3
    assert crn.species[crn.id("c3")].kind is Kind.USER


def test_empty_program():
    crn = compile_program(parse_source(""), analyze(parse_source("")))
    assert crn.reactions == [] and crn.observables == []
    assert validate(crn, require_observables=True)


def test_only_user_variables_are_observed():
    crn = compile_source("b = 2; a = b * 3 - 1;")
    assert [crn.name(i) for i in crn.observables] == ["b", "a"]


def test_exactly_one_program_trigger():
    crn = compile_source("x = 3; y = x * 2; z = y - x + 1;")
    counts = starts(crn)
    assert sum(counts.values()) == 1 and counts["start_1"] == 1


def test_link_count_is_modules_minus_one():
    ctx = modules("x = 4; y = x + 1; z = x - y;")
    chained = [m for m in ctx.modules if m.start is not None]
    assert len(ctx.crn.reactions_labeled("link.")) == len(chained) - 1


def test_recompiling_is_deterministic():
    src = "x = 4; y = x * 2; z = y - x + 3;"
    assert emit_crn_text(compile_source(src)) == emit_crn_text(compile_source(src))


def test_unsupported_statement_is_rejected():
    with pytest.raises(CcxError, match="unsupported construct 'while' at line 1"):
        compile_source("x = 1; while (x > 0) { x = x - 1; }")


def test_every_link_and_macro_wire_is_gated_or_fast():
    crn = compile_source("x = 2; y = x * 3;")
    for j in crn.reactions_labeled("link."):
        assert crn.reactions[j].tier is Tier.VERYSLOW
    wires = {crn.reactions[j].label.rsplit(".", 1)[1]: crn.reactions[j].tier
             for j in crn.reactions_labeled("multiply.")}
    assert wires == {"enter": Tier.VERYSLOW, "t2": Tier.FAST, "body": Tier.VERYSLOW,
                     "loop": Tier.VERYSLOW, "t1": Tier.FAST}


@pytest.mark.parametrize("src, expected", [
    ("z = 2 + 3;", {"z": 5}),
    ("z = 5 - 7;", {"z": 0}),
    ("x = 20; z = x - 15;", {"x": 20, "z": 5}),
    ("x = 2; x = x + 1;", {"x": 3}),
])
def test_compiled_programs_compute(src, expected):
    s = ensemble(compile_source(src), list(expected), runs=30)
    assert s.mode == expected
    assert s.fraction >= 0.85


def test_constants_survive_the_run():
    crn = compile_source("x = 3; y = x * 2 - 4;")
    consts = [sp.name for sp in crn.species if sp.kind is Kind.CONSTANT]
    s = ensemble(crn, consts, runs=20)
    assert s.mode == {name: crn.species[crn.id(name)].initial_count for name in consts}


ops = st.sampled_from("+-*")
lits = st.integers(0, 9).map(str)


@settings(max_examples=40)
@given(st.lists(st.tuples(st.sampled_from("abc"), lits, ops, st.sampled_from("abc0123")), min_size=1, max_size=4))
def test_supported_subset_always_compiles(rows):
    seen = []
    lines = []
    for target, lit, op, other in rows:
        rhs = other if other.isdigit() or other in seen else lit
        lines.append(f"{target} = {lit} {op} {rhs};")
        seen.append(target)
    crn = compile_source("\n".join(lines))
    assert validate(crn, require_observables=True) == []
