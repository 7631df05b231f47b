"""Value semantics of the mini-IR, shared by the interpreter and the feature code.

Integers and pointers are unsigned 32-bit Python ints; f64 values are Python
floats. Memory is a dict keyed by word address holding the last stored value;
a load reinterprets the cell's raw bit pattern when its kind differs.
"""

from __future__ import annotations

import math
import struct

from .ir import FCMP_PREDICATES, ICMP_PREDICATES, Opcode

M32 = 0xFFFFFFFF
M64 = 0xFFFFFFFFFFFFFFFF
MEM_WORDS = 1 << 16

_D = struct.Struct("<d")
_Q = struct.Struct("<Q")
_F = struct.Struct("<f")
_I = struct.Struct("<I")


class Trap(Exception):
    """Execution fault: division by zero, bad address, overflow."""

    def __init__(self, reason: str, index: int = 0):
        super().__init__(reason)
        self.reason = reason
        self.index = index


def f2b(x: float) -> int:
    return _Q.unpack(_D.pack(x))[0]


def b2f(bits: int) -> float:
    return _D.unpack(_Q.pack(bits & M64))[0]


def to_signed(x: int) -> int:
    return x - 0x100000000 if x & 0x80000000 else x


def flip_bit(value, kind: str, bit: int):
    """Flip one bit of a value of the given operand kind."""
    if kind == "f64":
        return b2f(f2b(value) ^ (1 << bit))
    return value ^ (1 << bit)


def value_bits(value, kind: str) -> int:
    return f2b(value) if kind == "f64" else value & M32


def bits_value(bits: int, kind: str):
    return b2f(bits) if kind == "f64" else bits & M32


# --------------------------------------------------------------------------- arithmetic

def sdiv(a: int, b: int, idx: int = 0) -> int:
    if b == 0:
        raise Trap("div-by-zero", idx)
    sa, sb = to_signed(a), to_signed(b)
    if sa == -0x80000000 and sb == -1:
        raise Trap("overflow", idx)
    q = abs(sa) // abs(sb)
    return (-q if (sa < 0) != (sb < 0) else q) & M32


def srem(a: int, b: int, idx: int = 0) -> int:
    if b == 0:
        raise Trap("div-by-zero", idx)
    sa, sb = to_signed(a), to_signed(b)
    if sa == -0x80000000 and sb == -1:
        raise Trap("overflow", idx)
    r = abs(sa) % abs(sb)
    return (-r if sa < 0 else r) & M32


def fdiv(a: float, b: float) -> float:
    try:
        return a / b
    except ZeroDivisionError:
        if math.isnan(a) or a == 0.0:
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def shift_amount(b: int) -> int:
    """Effective shift; amounts past the width saturate at 32."""
    return b if b < 32 else 32


def shl(a: int, b: int) -> int:
    return (a << b) & M32 if b < 32 else 0


def lshr(a: int, b: int) -> int:
    return a >> b if b < 32 else 0


def ashr(a: int, b: int) -> int:
    return (to_signed(a) >> shift_amount(b)) & M32


def trunc(a: int, w: int) -> int:
    return a & ((1 << w) - 1)


zext = trunc


def sext(a: int, w: int) -> int:
    a &= (1 << w) - 1
    return (a - (1 << w)) & M32 if a >> (w - 1) else a


def fptrunc(x: float) -> int:
    """f64 to the bit pattern of the nearest binary32."""
    try:
        return _I.unpack(_F.pack(x))[0]
    except OverflowError:
        return 0xFF800000 if x < 0 else 0x7F800000


def fpext(bits: int) -> float:
    return _F.unpack(_I.pack(bits & M32))[0]


def icmp(pred: str, a: int, b: int) -> int:
    if pred == "eq":
        return int(a == b)
    if pred == "ne":
        return int(a != b)
    if pred[0] == "s":
        a, b = to_signed(a), to_signed(b)
    rel = pred[1:]
    if rel == "lt":
        return int(a < b)
    if rel == "le":
        return int(a <= b)
    if rel == "gt":
        return int(a > b)
    return int(a >= b)


def fcmp(pred: str, a: float, b: float) -> int:
    unordered = math.isnan(a) or math.isnan(b)
    if pred == "uno":
        return int(unordered)
    if unordered:
        return 0
    return int({
        "ord": True, "oeq": a == b, "one": a != b, "olt": a < b,
        "ole": a <= b, "ogt": a > b, "oge": a >= b,
    }[pred])


def check_addr(addr: int, idx: int = 0) -> int:
    if addr >= MEM_WORDS:
        raise Trap("out-of-range address", idx)
    return addr


def load(mem: dict, addr: int, kind: str, idx: int = 0):
    if addr >= MEM_WORDS:
        raise Trap("out-of-range address", idx)
    v = mem.get(addr, 0)
    if kind == "f64":
        return v if v.__class__ is float else b2f(v)
    return f2b(v) & M32 if v.__class__ is float else v & M32


def store(mem: dict, addr: int, value, idx: int = 0) -> None:
    if addr >= MEM_WORDS:
        raise Trap("out-of-range address", idx)
    mem[addr] = value


def flip_cell(mem: dict, addr: int, bit: int) -> None:
    """Flip one bit of a memory cell's raw pattern, keeping its stored type."""
    v = mem.get(addr, 0)
    if v.__class__ is float:
        mem[addr] = b2f(f2b(v) ^ (1 << bit))
    else:
        mem[addr] = v ^ (1 << bit)


# --------------------------------------------------------------------------- single-instruction evaluation

def evaluate(op: Opcode, ins: list, aux: dict[str, int]):
    """Result of one value-producing (or branching) instruction from its input values.

    ``aux`` supplies ``pred`` (predicate index), ``dstw``/``srcw`` for the
    extension family. ``br_cond`` yields the taken-branch truth value.
    Raises :class:`Trap` where execution would trap.
    """
    if op == Opcode.ADD:
        return (ins[0] + ins[1]) & M32
    if op == Opcode.SUB:
        return (ins[0] - ins[1]) & M32
    if op == Opcode.MUL:
        return (ins[0] * ins[1]) & M32
    if op == Opcode.SDIV:
        return sdiv(ins[0], ins[1])
    if op == Opcode.SREM:
        return srem(ins[0], ins[1])
    if op == Opcode.FADD:
        return ins[0] + ins[1]
    if op == Opcode.FSUB:
        return ins[0] - ins[1]
    if op == Opcode.FMUL:
        return ins[0] * ins[1]
    if op == Opcode.FDIV:
        return fdiv(ins[0], ins[1])
    if op == Opcode.AND:
        return ins[0] & ins[1]
    if op == Opcode.OR:
        return ins[0] | ins[1]
    if op == Opcode.XOR:
        return ins[0] ^ ins[1]
    if op == Opcode.SHL:
        return shl(ins[0], ins[1])
    if op == Opcode.LSHR:
        return lshr(ins[0], ins[1])
    if op == Opcode.ASHR:
        return ashr(ins[0], ins[1])
    if op == Opcode.ICMP:
        return icmp(ICMP_PREDICATES[aux["pred"]], ins[0], ins[1])
    if op == Opcode.FCMP:
        return fcmp(FCMP_PREDICATES[aux["pred"]], ins[0], ins[1])
    if op == Opcode.GETELEMENTPTR:
        return (ins[0] + ins[1]) & M32
    if op in (Opcode.TRUNC, Opcode.ZEXT):
        return trunc(ins[0], min(aux["srcw"], aux["dstw"]))
    if op == Opcode.SEXT:
        return sext(ins[0], aux["srcw"])
    if op == Opcode.FPTRUNC:
        return fptrunc(ins[0])
    if op == Opcode.FPEXT:
        return fpext(ins[0])
    if op in (Opcode.BITCAST, Opcode.CALL, Opcode.PHI):
        return ins[0]
    if op == Opcode.SELECT:
        return ins[1] if ins[0] else ins[2]
    if op == Opcode.BR_COND:
        return int(ins[0] != 0)
    if op == Opcode.LOAD:
        check_addr(ins[0])
        return ins[1]
    if op == Opcode.STORE:
        check_addr(ins[1])
        return ins[0]
    raise ValueError(f"{op.value} produces no value")
