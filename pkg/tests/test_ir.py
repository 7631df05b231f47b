import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resilpred.corpus import generate_kernel
from resilpred.ir import (TAG_ORDER, GroupTag, IRSyntaxError, Opcode, OperandKind, bit_width,
                          loop_bodies, opcode_group, parse_program, serialize_program,
                          validate_program)

from _util import SAMPLES

MINIMAL = ".input %x i32\n.output %x i32\nentry:\n  output %x\n  halt\n"


def test_opcode_universe_is_the_33_names():
    assert len(Opcode) == 33
    assert {o.value for o in Opcode} >= {"br", "getelementptr", "fptrunc", "ashr", "halt"}


def test_every_opcode_has_exactly_one_tag():
    for op in Opcode:
        tag = opcode_group(op)
        assert tag in TAG_ORDER
        assert opcode_group(op) is tag


@pytest.mark.parametrize("op,tag", [
    ("fadd", GroupTag.FPI), ("fdiv", GroupTag.FPI), ("lshr", GroupTag.SHIFT),
    ("shl", GroupTag.SHIFT), ("getelementptr", GroupTag.MI), ("load", GroupTag.MI),
    ("icmp", GroupTag.CONDITION), ("xor", GroupTag.CONDITION), ("trunc", GroupTag.TRUNCATION),
    ("bitcast", GroupTag.TRUNCATION), ("add", GroupTag.II), ("srem", GroupTag.II),
    ("br", GroupTag.CFI), ("halt", GroupTag.CFI),
])
def test_opcode_group_table(op, tag):
    assert opcode_group(op) == tag


def test_pattern_and_group_tags_partition_opcodes():
    by_tag = {t: {o for o in Opcode if opcode_group(o) == t} for t in TAG_ORDER}
    assert sum(len(s) for s in by_tag.values()) == len(Opcode)
    assert all(by_tag.values())


def test_bit_widths():
    assert bit_width(OperandKind.I32) == 32
    assert bit_width(OperandKind.F64) == 64
    assert bit_width(OperandKind.PTR) == 32
    assert bit_width(OperandKind.LABEL) == 0


def test_minimal_program():
    p = parse_program(MINIMAL)
    assert len(p.blocks) == 1 and p.n_instructions() == 2
    assert validate_program(p).ok


def test_undefined_label_is_a_syntax_error():
    with pytest.raises(IRSyntaxError, match="undefined label"):
        parse_program("entry:\n  br $nowhere\n")


def test_duplicate_label():
    with pytest.raises(IRSyntaxError, match="duplicate block label"):
        parse_program("a:\n  halt\na:\n  halt\n")


def test_syntax_error_carries_position():
    with pytest.raises(IRSyntaxError) as ei:
        parse_program("entry:\n  %a = frobnicate 1, 2\n  halt\n")
    assert ei.value.line == 2 and ei.value.column > 1


def test_use_before_def():
    p = parse_program(".output %x i32\nentry:\n  %x = add %y, 1\n  output %x\n  halt\n")
    assert "use before def: %y" in validate_program(p).violations


def test_output_unwritten_on_one_path_names_the_path():
    src = """.input %c i32
.output %r i32
entry:
  br_cond %c, $left, $right
left:
  %r = add 1, 2
  br $done
right:
  br $done
done:
  output %r
  halt
"""
    v = validate_program(parse_program(src)).violations
    hits = [m for m in v if "unwritten" in m or "use before def: %r" in m]
    assert hits
    assert any("entry" in m and "right" in m for m in v)


def test_euclid_sample_shape():
    p = parse_program((SAMPLES / "euclid.ir").read_text())
    assert len(p.blocks) == 3
    assert p.loops == ("loop",)
    assert validate_program(p).ok
    assert set(loop_bodies(p)) == {"loop"}


@pytest.mark.parametrize("name", ["euclid", "array_sum", "loop3"])
def test_round_trip_samples(name):
    p = parse_program((SAMPLES / f"{name}.ir").read_text())
    assert parse_program(serialize_program(p)) == p


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(0, 500))
def test_round_trip_generated(seed, index):
    p = parse_program(generate_kernel(seed, index).source)
    text = serialize_program(p)
    assert parse_program(text) == p
    assert serialize_program(parse_program(text)) == text
