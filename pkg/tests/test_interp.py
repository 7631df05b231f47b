import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from resilpred import sem
from resilpred.interp import Machine, Status, UsageError, execute
from resilpred.ir import Opcode, parse_program

from _util import sample

ECHO = ".input %x i32\n.output %x i32\nentry:\n  output %x\n  halt\n"


def test_echo_program():
    out = execute(parse_program(ECHO), {"%x": 7}, 100)
    assert out.status == Status.COMPLETED
    assert out.outputs == (7,) and out.steps == 2


def test_division_by_zero_traps():
    p = parse_program(".output %a i32\nentry:\n  %a = sdiv 5, 0\n  output %a\n  halt\n")
    out = execute(p, {}, 100)
    assert out.status == Status.TRAPPED and out.reason == "div-by-zero"
    assert out.outputs == ()


def test_self_loop_hangs_at_budget():
    out = execute(parse_program("entry:\n  br $entry\n"), {}, 1000)
    assert out.status == Status.HUNG and out.steps == 1000


def test_unbound_input_is_a_usage_error():
    with pytest.raises(UsageError):
        execute(parse_program(ECHO), {}, 100)


def test_out_of_range_load_traps():
    p = parse_program(".output %v f64\nentry:\n  %v = load.f64 -8\n  output %v\n  halt\n")
    assert execute(p, {}, 10).status == Status.TRAPPED


@pytest.mark.parametrize("name,expected", [("euclid", 4.25), ("array_sum", 16.875), ("loop3", 72)])
def test_samples_compute_their_results(name, expected):
    p, inputs = sample(name)
    out = execute(p, inputs, 100_000)
    assert out.status == Status.COMPLETED and out.outputs == (expected,)


def test_execution_is_deterministic():
    p, inputs = sample("euclid")
    assert execute(p, inputs, 1000) == execute(p, inputs, 1000)


def test_flip_past_the_end_is_reported():
    p, inputs = sample("loop3")
    with pytest.raises(UsageError, match="ended before"):
        Machine(p).execute_with_flip(inputs, 10_000, 0, 0, 1000)


@given(st.integers(-2**31, 2**31 - 1), st.integers(0, 31))
def test_int_flip_is_an_involution(v, bit):
    u = v & 0xFFFFFFFF
    assert sem.flip_bit(sem.flip_bit(u, "i32", bit), "i32", bit) == u
    assert sem.flip_bit(u, "i32", bit) != u


@given(st.floats(allow_nan=False), st.integers(0, 63))
def test_float_flip_changes_exactly_one_bit(x, bit):
    y = sem.flip_bit(x, "f64", bit)
    assert bin(sem.f2b(x) ^ sem.f2b(y)).count("1") == 1


@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_icmp_predicates_are_consistent(a, b):
    def ev(pred):
        return sem.icmp(pred, a, b)

    assert ev("eq") != ev("ne")
    assert ev("slt") == ev("sgt") or a == b or ev("slt") != ev("sgt")
    assert ev("ult") == (1 if a < b else 0)
    assert ev("sle") == (1 if sem.to_signed(a) <= sem.to_signed(b) else 0)


def test_fcmp_unordered_with_nan():
    assert sem.fcmp("uno", math.nan, 1.0) == 1
    assert sem.fcmp("oeq", math.nan, math.nan) == 0


def test_evaluate_shift_masks_amount():
    assert sem.evaluate(Opcode.LSHR, [0xF0, 4], {}) == 0x0F
    assert sem.evaluate(Opcode.SHL, [1, 31], {}) == 0x80000000
