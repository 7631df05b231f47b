"""Dynamic instruction traces: records, chunks, the text format, and its parser.

Format (UTF-8, one item per line)::

    #OUTPUTS %acc 0x00000010
    #CHUNK 0
    0\tadd\tin:_:i32:32:00000000\tin:_:i32:32:00000000\tout:%i:i32:32:00000000
    ...

Operand fields are ``role:name:kind:width:hexvalue``; immediates are named
``_``; memory cells are named by their address as ``0x%08x``. ``aux=key=value``
fields carry the shift amount (``shamt``), extension widths (``srcw``,
``dstw``) and comparison predicates (``pred``).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, TextIO

from .ir import Opcode, OperandKind

IMMEDIATE = "_"
AUX_KEYS = ("shamt", "srcw", "dstw", "pred")
_KIND_WIDTH = {"i32": 32, "f64": 64, "ptr": 32}

# operand count per record (inputs + output)
RECORD_ARITY = {op: 3 for op in Opcode}
RECORD_ARITY.update({
    Opcode.TRUNC: 2, Opcode.ZEXT: 2, Opcode.SEXT: 2, Opcode.FPTRUNC: 2, Opcode.FPEXT: 2,
    Opcode.BITCAST: 2, Opcode.PHI: 2, Opcode.CALL: 2, Opcode.SELECT: 4,
    Opcode.BR: 0, Opcode.BR_COND: 1, Opcode.OUTPUT: 1, Opcode.HALT: 0,
})


class TraceFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True, slots=True)
class OperandRecord:
    name: str
    kind: str
    width: int
    value: int  # raw bit pattern
    role: str  # "in" | "out"

    @property
    def is_location(self) -> bool:
        return self.name != IMMEDIATE


@dataclass(frozen=True, slots=True)
class InstructionRecord:
    seq: int
    opcode: Opcode
    operands: tuple[OperandRecord, ...]
    aux: tuple[tuple[str, int], ...] = ()

    @property
    def inputs(self) -> tuple[OperandRecord, ...]:
        return tuple(o for o in self.operands if o.role == "in")

    @property
    def output(self) -> OperandRecord | None:
        last = self.operands[-1] if self.operands else None
        return last if last is not None and last.role == "out" else None

    def aux_dict(self) -> dict[str, int]:
        return dict(self.aux)

    def total_bits(self) -> int:
        return sum(o.width for o in self.operands)


@dataclass(frozen=True, slots=True)
class Chunk:
    id: int
    records: tuple[InstructionRecord, ...]

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class Trace:
    chunks: tuple[Chunk, ...]
    outputs: tuple[str, ...] = ()

    @property
    def records(self) -> list[InstructionRecord]:
        return [r for c in self.chunks for r in c.records]

    def __len__(self) -> int:
        return sum(len(c) for c in self.chunks)


def split_chunks(records: Sequence[InstructionRecord], delimiters: Iterable[int]) -> list[Chunk]:
    """Cut ``records`` before each delimiter index; empty pieces are dropped."""
    cuts = [0, *delimiters, len(records)]
    pieces = (tuple(records[a:b]) for a, b in zip(cuts, cuts[1:]))
    return [Chunk(i, recs) for i, recs in enumerate(p for p in pieces if p)]


# --------------------------------------------------------------------------- text format

def format_record(rec: InstructionRecord) -> str:
    fields = [str(rec.seq), rec.opcode.value]
    for o in rec.operands:
        fields.append(f"{o.role}:{o.name}:{o.kind}:{o.width}:{o.value:0{o.width // 4}x}")
    fields.extend(f"aux={k}={v}" for k, v in rec.aux)
    return "\t".join(fields)


def write_trace(trace: Trace, out: TextIO) -> None:
    out.write("#OUTPUTS" + "".join(" " + n for n in trace.outputs) + "\n")
    for c in trace.chunks:
        out.write(f"#CHUNK {c.id}\n")
        for r in c.records:
            out.write(format_record(r))
            out.write("\n")


def emit_trace(trace: Trace) -> str:
    buf = io.StringIO()
    write_trace(trace, buf)
    return buf.getvalue()


def parse_record(line: str, lineno: int | None = None) -> InstructionRecord:
    fields = line.rstrip("\n").split("\t")
    if len(fields) < 2:
        raise TraceFormatError("malformed record", lineno)
    try:
        seq = int(fields[0])
    except ValueError:
        raise TraceFormatError(f"bad seq {fields[0]!r}", lineno) from None
    try:
        op = Opcode(fields[1])
    except ValueError:
        raise TraceFormatError(f"bad opcode name {fields[1]!r}", lineno) from None
    operands = []
    aux = []
    seen_out = False
    for f in fields[2:]:
        if f.startswith("aux="):
            key, _, val = f[4:].partition("=")
            if key not in AUX_KEYS:
                raise TraceFormatError(f"unknown aux key {key!r}", lineno)
            try:
                aux.append((key, int(val)))
            except ValueError:
                raise TraceFormatError(f"bad aux value {val!r}", lineno) from None
            continue
        if aux:
            raise TraceFormatError("operand after aux field", lineno)
        parts = f.split(":")
        if len(parts) != 5:
            raise TraceFormatError(f"malformed operand {f!r}", lineno)
        role, name, kind, width, hexval = parts
        if role not in ("in", "out") or seen_out:
            raise TraceFormatError(f"bad operand role in {f!r}", lineno)
        seen_out = role == "out"
        if kind not in _KIND_WIDTH:
            raise TraceFormatError(f"bad kind {kind!r}", lineno)
        if not width.isdigit() or int(width) != _KIND_WIDTH[kind]:
            raise TraceFormatError(f"width/kind mismatch in {f!r}", lineno)
        w = int(width)
        if len(hexval) != w // 4:
            raise TraceFormatError(f"value width mismatch in {f!r}", lineno)
        try:
            value = int(hexval, 16)
        except ValueError:
            raise TraceFormatError(f"bad hex value {hexval!r}", lineno) from None
        operands.append(OperandRecord(name, kind, w, value, role))
    if len(operands) != RECORD_ARITY[op]:
        raise TraceFormatError(
            f"{op.value} record has {len(operands)} operands, expected {RECORD_ARITY[op]}", lineno)
    return InstructionRecord(seq, op, tuple(operands), tuple(aux))


def iter_chunks(lines: Iterable[str]) -> Iterator[Chunk | tuple[str, ...]]:
    """Stream a trace: yields the outputs tuple first, then one Chunk at a time.

    Only the chunk being assembled is held in memory.
    """
    header_seen = False
    current: list[InstructionRecord] | None = None
    cid = -1
    last_seq = -1
    any_line = False
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        any_line = True
        if line.startswith("#OUTPUTS"):
            if header_seen or current is not None:
                raise TraceFormatError("misplaced #OUTPUTS header", lineno)
            header_seen = True
            rest = line[len("#OUTPUTS"):]
            if rest and not rest.startswith(" "):
                raise TraceFormatError("malformed #OUTPUTS header", lineno)
            yield tuple(rest.split())
            continue
        if line.startswith("#CHUNK"):
            if not header_seen:
                header_seen = True
                yield ()
            parts = line.split()
            if len(parts) != 2 or not parts[1].isdigit():
                raise TraceFormatError("malformed chunk marker", lineno)
            if int(parts[1]) != cid + 1:
                raise TraceFormatError(f"chunk id {parts[1]} out of order", lineno)
            if current is not None:
                if not current:
                    raise TraceFormatError(f"empty chunk {cid}", lineno)
                yield Chunk(cid, tuple(current))
            cid += 1
            current = []
            continue
        if line.startswith("#"):
            raise TraceFormatError(f"unknown directive {line.split()[0]!r}", lineno)
        if current is None:
            raise TraceFormatError("record outside chunk", lineno)
        rec = parse_record(line, lineno)
        if rec.seq <= last_seq:
            raise TraceFormatError(f"non-monotone seq {rec.seq}", lineno)
        last_seq = rec.seq
        current.append(rec)
    if not any_line or current is None:
        raise TraceFormatError("empty trace")
    if not current:
        raise TraceFormatError(f"empty chunk {cid}")
    yield Chunk(cid, tuple(current))


def parse_trace(stream: str | TextIO | Iterable[str]) -> Trace:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    it = iter_chunks(stream)
    outputs = next(it, None)
    if outputs is None:
        raise TraceFormatError("empty trace")
    return Trace(tuple(it), outputs)  # type: ignore[arg-type]


def read_trace(path) -> Trace:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh)


def operand_kind_width(kind: str) -> int:
    return OperandKind(kind).bit_width
