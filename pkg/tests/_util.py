"""Builders for synthetic trace records and paths to the shipped samples."""

from __future__ import annotations

import json
from pathlib import Path

from resilpred.ir import Opcode, parse_program
from resilpred.trace import Chunk, InstructionRecord, OperandRecord, Trace

SAMPLES = Path(__file__).resolve().parents[1] / "src" / "resilpred" / "samples"
WIDTH = {"i32": 32, "f64": 64, "ptr": 32}


def opnd(name: str, kind: str = "i32", value: int = 0, role: str = "in",
         width: int | None = None) -> OperandRecord:
    return OperandRecord(name, kind, WIDTH[kind] if width is None else width, value, role)


def rec(seq: int, opcode, ins=(), out=None, kind: str = "i32", aux=()) -> InstructionRecord:
    """``ins`` are location names (or ``_`` for immediates); ``out`` the destination."""
    ops = [i if isinstance(i, OperandRecord) else opnd(i, kind) for i in ins]
    if out is not None:
        ops.append(out if isinstance(out, OperandRecord) else opnd(out, kind, role="out"))
    return InstructionRecord(seq, Opcode(opcode), tuple(ops), tuple(aux))


def trace_of(chunks: list[list[InstructionRecord]], outputs=()) -> Trace:
    return Trace(tuple(Chunk(i, tuple(c)) for i, c in enumerate(chunks)), tuple(outputs))


def renumber(chunks: list[list[InstructionRecord]]) -> list[list[InstructionRecord]]:
    seq = 0
    out = []
    for c in chunks:
        cc = []
        for r in c:
            cc.append(InstructionRecord(seq, r.opcode, r.operands, r.aux))
            seq += 1
        out.append(cc)
    return out


def sample(name: str):
    """(program, inputs) of a shipped sample."""
    p = parse_program((SAMPLES / f"{name}.ir").read_text())
    return p, json.loads((SAMPLES / f"{name}.json").read_text())


def random_chunks(rng, n_chunks: int, max_records: int, names: list[str],
                  p_imm: float = 0.15, p_add: float = 0.5) -> list[list[InstructionRecord]]:
    """Random binary-op records over a small location pool."""
    chunks = []
    sizes = rng.integers(1, max(2, max_records // n_chunks) + 1, size=n_chunks)
    for size in sizes:
        c = []
        for _ in range(int(size)):
            op = "add" if rng.random() < p_add else str(rng.choice(["mul", "sub", "xor", "load"]))
            ins = ["_" if rng.random() < p_imm else str(rng.choice(names)) for _ in range(2)]
            c.append(rec(0, op, ins, str(rng.choice(names))))
        chunks.append(c)
    return renumber(chunks)
