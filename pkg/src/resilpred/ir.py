"""Mini-IR: opcodes, the opcode taxonomy, programs, and the program text format.

A program is a list of labeled basic blocks over mutable, statically typed
registers (``%name``) plus a word-addressed memory (``@addr``). The text
format is line oriented::

    .input %n i32
    .input @16 f64          ; memory input, bound to a list of values
    .output %acc f64
    .loop body
    entry:
      %i = add 0, 0
      br $body
    body:
      ...

Opcodes may carry a qualifier after a dot: ``icmp.slt``, ``fcmp.olt`` and
``load.f64``. Extension widths of ``trunc``/``zext``/``sext`` are integer
immediates (``%b = trunc %a, 8``).
"""

from __future__ import annotations

import enum
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable


class OperandKind(str, enum.Enum):
    I32 = "i32"
    F64 = "f64"
    PTR = "ptr"
    LABEL = "label"

    @property
    def bit_width(self) -> int:
        return _WIDTHS[self]


_WIDTHS = {OperandKind.I32: 32, OperandKind.F64: 64, OperandKind.PTR: 32, OperandKind.LABEL: 0}


def bit_width(kind: OperandKind | str) -> int:
    return OperandKind(kind).bit_width


class GroupTag(str, enum.Enum):
    CFI = "CFI"
    FPI = "FPI"
    II = "II"
    MI = "MI"
    CONDITION = "Condition"
    SHIFT = "Shift"
    TRUNCATION = "Truncation"


# Fixed feature order of the seven tag dimensions.
TAG_ORDER = (
    GroupTag.CFI,
    GroupTag.FPI,
    GroupTag.II,
    GroupTag.MI,
    GroupTag.CONDITION,
    GroupTag.SHIFT,
    GroupTag.TRUNCATION,
)


class Opcode(str, enum.Enum):
    BR = "br"
    BR_COND = "br_cond"
    SELECT = "select"
    PHI = "phi"
    CALL = "call"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    SDIV = "sdiv"
    SREM = "srem"
    FADD = "fadd"
    FSUB = "fsub"
    FMUL = "fmul"
    FDIV = "fdiv"
    LOAD = "load"
    STORE = "store"
    GETELEMENTPTR = "getelementptr"
    TRUNC = "trunc"
    ZEXT = "zext"
    SEXT = "sext"
    FPTRUNC = "fptrunc"
    FPEXT = "fpext"
    BITCAST = "bitcast"
    SHL = "shl"
    LSHR = "lshr"
    ASHR = "ashr"
    ICMP = "icmp"
    FCMP = "fcmp"
    AND = "and"
    OR = "or"
    XOR = "xor"
    OUTPUT = "output"
    HALT = "halt"


_GROUPS: dict[Opcode, GroupTag] = {}
for _tag, _ops in (
    (GroupTag.CFI, "br br_cond select phi call output halt"),
    (GroupTag.FPI, "fadd fsub fmul fdiv"),
    (GroupTag.II, "add sub mul sdiv srem"),
    (GroupTag.MI, "load store getelementptr"),
    (GroupTag.CONDITION, "icmp fcmp and or xor"),
    (GroupTag.SHIFT, "shl lshr ashr"),
    (GroupTag.TRUNCATION, "trunc zext sext fptrunc fpext bitcast"),
):
    for _name in _ops.split():
        _GROUPS[Opcode(_name)] = _tag


def opcode_group(op: Opcode | str) -> GroupTag:
    """Group or pattern tag of an opcode; pattern rows take precedence over groups."""
    return _GROUPS[Opcode(op)]


ICMP_PREDICATES = ("eq", "ne", "slt", "sle", "sgt", "sge", "ult", "ule", "ugt", "uge")
FCMP_PREDICATES = ("oeq", "one", "olt", "ole", "ogt", "oge", "ord", "uno")

TERMINATORS = frozenset({Opcode.BR, Opcode.BR_COND, Opcode.HALT})
BINARY_INT = frozenset({Opcode.ADD, Opcode.SUB, Opcode.MUL, Opcode.SDIV, Opcode.SREM,
                        Opcode.AND, Opcode.OR, Opcode.XOR, Opcode.SHL, Opcode.LSHR, Opcode.ASHR})
BINARY_FLOAT = frozenset({Opcode.FADD, Opcode.FSUB, Opcode.FMUL, Opcode.FDIV})
EXTENSIONS = frozenset({Opcode.TRUNC, Opcode.ZEXT, Opcode.SEXT})


class IRSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Operand:
    """One instruction argument.

    ``tag`` is one of ``reg`` (value ``%name``), ``mem`` (integer address
    literal written ``@addr``), ``int``, ``float`` or ``label``.
    """

    tag: str
    value: str | int | float

    @staticmethod
    def reg(name: str) -> "Operand":
        return Operand("reg", name if name.startswith("%") else "%" + name)

    @staticmethod
    def label(name: str) -> "Operand":
        return Operand("label", name)

    @property
    def is_reg(self) -> bool:
        return self.tag == "reg"

    def __str__(self) -> str:
        if self.tag == "reg":
            return str(self.value)
        if self.tag == "mem":
            return f"@{self.value}"
        if self.tag == "label":
            return f"${self.value}"
        if self.tag == "float":
            return format_float(float(self.value))
        return str(self.value)


@dataclass(frozen=True)
class Instr:
    op: Opcode
    args: tuple[Operand, ...] = ()
    dest: str | None = None
    qual: str | None = None

    @property
    def opname(self) -> str:
        return self.op.value if self.qual is None else f"{self.op.value}.{self.qual}"

    def reg_uses(self) -> list[str]:
        return [a.value for a in self.args if a.tag == "reg"]

    def labels(self) -> list[str]:
        return [a.value for a in self.args if a.tag == "label"]

    def __str__(self) -> str:
        body = self.opname
        if self.args:
            body += " " + ", ".join(str(a) for a in self.args)
        return f"{self.dest} = {body}" if self.dest else body


@dataclass(frozen=True)
class Block:
    label: str
    instrs: tuple[Instr, ...]


@dataclass(frozen=True)
class Program:
    blocks: tuple[Block, ...]
    inputs: tuple[tuple[str, OperandKind], ...] = ()
    outputs: tuple[tuple[str, OperandKind], ...] = ()
    loops: tuple[str, ...] = ()
    entry: str = field(default="")

    def __post_init__(self):
        if not self.entry and self.blocks:
            object.__setattr__(self, "entry", self.blocks[0].label)

    def block(self, label: str) -> Block:
        for b in self.blocks:
            if b.label == label:
                return b
        raise KeyError(label)

    @property
    def labels(self) -> list[str]:
        return [b.label for b in self.blocks]

    def n_instructions(self) -> int:
        return sum(len(b.instrs) for b in self.blocks)


# --------------------------------------------------------------------------- text format

_IDENT = r"[A-Za-z_][A-Za-z0-9_.]*"
_LABEL_RE = re.compile(rf"^({_IDENT})\s*:")
_REG_RE = re.compile(rf"^%{_IDENT}$")
_MEM_RE = re.compile(r"^@(\d+)$")
_INT_RE = re.compile(r"^-?\d+$")
_FLOAT_RE = re.compile(r"^-?(\d+\.\d*|\.\d+)([eE][-+]?\d+)?$")
_DEST_RE = re.compile(rf"^(%{_IDENT})\s*=\s*")


def format_float(x: float) -> str:
    """Float literal text that always carries a decimal point."""
    s = repr(float(x))
    if s in ("inf", "-inf", "nan"):
        raise ValueError(f"non-finite float literal {s}")
    mant, e, exp = s.partition("e")
    if "." not in mant:
        mant += ".0"
    return mant + (e + exp if e else "")


def _parse_operand(tok: str, line: int, col: int) -> Operand:
    if _REG_RE.match(tok):
        return Operand("reg", tok)
    if tok.startswith("$"):
        name = tok[1:]
        if not re.match(rf"^{_IDENT}$", name):
            raise IRSyntaxError(f"bad label reference {tok!r}", line, col)
        return Operand("label", name)
    m = _MEM_RE.match(tok)
    if m:
        return Operand("mem", int(m.group(1)))
    if _INT_RE.match(tok):
        return Operand("int", int(tok))
    if _FLOAT_RE.match(tok):
        return Operand("float", float(tok))
    raise IRSyntaxError(f"bad operand {tok!r}", line, col)


def _split_args(text: str, line: int, col0: int) -> list[Operand]:
    if not text.strip():
        return []
    out = []
    pos = 0
    for piece in text.split(","):
        stripped = piece.strip()
        col = col0 + pos + (len(piece) - len(piece.lstrip()))
        if not stripped:
            raise IRSyntaxError("empty operand", line, col)
        out.append(_parse_operand(stripped, line, col))
        pos += len(piece) + 1
    return out


_BRANCH_LABEL_SLOTS = {Opcode.BR: (0,), Opcode.BR_COND: (1, 2)}


def _parse_instr(text: str, line: int, col0: int) -> Instr:
    dest = None
    m = _DEST_RE.match(text)
    rest, rest_col = text, col0
    if m:
        dest = m.group(1)
        rest = text[m.end():]
        rest_col = col0 + m.end()
    head, _, argtext = rest.partition(" ")
    opname, _, qual = head.partition(".")
    try:
        op = Opcode(opname)
    except ValueError:
        raise IRSyntaxError(f"unknown opcode {head!r}", line, rest_col) from None
    args_col = rest_col + len(head) + 1
    # branch targets may be written bare
    if op in _BRANCH_LABEL_SLOTS:
        pieces = [p.strip() for p in argtext.split(",")] if argtext.strip() else []
        for slot in _BRANCH_LABEL_SLOTS[op]:
            if slot < len(pieces) and pieces[slot] and not pieces[slot].startswith("$") \
                    and re.match(rf"^{_IDENT}$", pieces[slot]):
                pieces[slot] = "$" + pieces[slot]
        argtext = ", ".join(pieces)
    args = tuple(_split_args(argtext, line, args_col))
    has_dest = op not in (Opcode.STORE, Opcode.BR, Opcode.BR_COND, Opcode.OUTPUT, Opcode.HALT)
    if has_dest and dest is None:
        raise IRSyntaxError(f"{op.value} needs a destination register", line, col0)
    if not has_dest and dest is not None:
        raise IRSyntaxError(f"{op.value} takes no destination", line, col0)
    if qual:
        allowed = {Opcode.ICMP: ICMP_PREDICATES, Opcode.FCMP: FCMP_PREDICATES,
                   Opcode.LOAD: ("i32", "f64", "ptr")}.get(op)
        if allowed is None or qual not in allowed:
            raise IRSyntaxError(f"bad qualifier {qual!r} for {op.value}", line, rest_col)
    elif op in (Opcode.ICMP, Opcode.FCMP):
        raise IRSyntaxError(f"{op.value} needs a predicate qualifier", line, rest_col)
    if op == Opcode.LOAD and not qual:
        qual = "i32"
    n = len(args)
    expected = _ARITY.get(op)
    if expected is not None and n != expected:
        raise IRSyntaxError(f"{op.value} takes {expected} operand(s), got {n}", line, args_col)
    if op == Opcode.PHI and (n < 2 or n % 2):
        raise IRSyntaxError("phi takes value, $label pairs", line, args_col)
    return Instr(op, args, dest, qual or None)


_ARITY = {
    Opcode.BR: 1, Opcode.BR_COND: 3, Opcode.SELECT: 3, Opcode.CALL: 1,
    Opcode.LOAD: 1, Opcode.STORE: 2, Opcode.GETELEMENTPTR: 2,
    Opcode.TRUNC: 2, Opcode.ZEXT: 2, Opcode.SEXT: 2,
    Opcode.FPTRUNC: 1, Opcode.FPEXT: 1, Opcode.BITCAST: 1,
    Opcode.ICMP: 2, Opcode.FCMP: 2, Opcode.OUTPUT: 1, Opcode.HALT: 0,
}
for _op in BINARY_INT | BINARY_FLOAT:
    _ARITY[_op] = 2


def _parse_decl_name(tok: str, line: int, col: int) -> str:
    if _REG_RE.match(tok) or _MEM_RE.match(tok):
        return tok
    raise IRSyntaxError(f"bad declared name {tok!r}", line, col)


def parse_program(text: str | Iterable[str]) -> Program:
    """Parse program text. Raises :class:`IRSyntaxError` with line and column."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    inputs: list[tuple[str, OperandKind]] = []
    outputs: list[tuple[str, OperandKind]] = []
    loops: list[tuple[str, int, int]] = []
    blocks: list[tuple[str, list[Instr]]] = []
    label_pos: dict[str, tuple[int, int]] = {}
    refs: list[tuple[str, int, int]] = []

    for lineno, raw in enumerate(lines, start=1):
        body = raw.split(";", 1)[0].rstrip()
        stripped = body.lstrip()
        if not stripped:
            continue
        col = len(body) - len(stripped) + 1
        if stripped.startswith("."):
            parts = stripped.split()
            directive = parts[0]
            if directive in (".input", ".output"):
                if len(parts) != 3:
                    raise IRSyntaxError(f"{directive} takes <name> <kind>", lineno, col)
                name = _parse_decl_name(parts[1], lineno, col + len(directive) + 1)
                try:
                    kind = OperandKind(parts[2])
                except ValueError:
                    kind = None
                if kind is None or kind == OperandKind.LABEL:
                    raise IRSyntaxError(f"bad kind {parts[2]!r}", lineno, body.rfind(parts[2]) + 1)
                (inputs if directive == ".input" else outputs).append((name, kind))
            elif directive == ".loop":
                if len(parts) != 2:
                    raise IRSyntaxError(".loop takes one label", lineno, col)
                loops.append((parts[1], lineno, col + 6))
            else:
                raise IRSyntaxError(f"unknown directive {directive!r}", lineno, col)
            continue
        m = _LABEL_RE.match(stripped)
        if m:
            label = m.group(1)
            if label in label_pos:
                raise IRSyntaxError(f"duplicate block label {label!r}", lineno, col)
            label_pos[label] = (lineno, col)
            blocks.append((label, []))
            rest = stripped[m.end():]
            if not rest.strip():
                continue
            col += m.end() + (len(rest) - len(rest.lstrip()))
            stripped = rest.strip()
        if not blocks:
            raise IRSyntaxError("instruction outside of a block", lineno, col)
        ins = _parse_instr(stripped, lineno, col)
        for a in ins.args:
            if a.tag == "label":
                refs.append((a.value, lineno, col))
        blocks[-1][1].append(ins)

    if not blocks:
        raise IRSyntaxError("program has no blocks", max(len(lines), 1), 1)
    for name, lineno, col in refs:
        if name not in label_pos:
            raise IRSyntaxError(f"undefined label {name!r}", lineno, col)
    for name, lineno, col in loops:
        if name not in label_pos:
            raise IRSyntaxError(f"undefined label {name!r}", lineno, col)
    return Program(
        blocks=tuple(Block(lbl, tuple(ins)) for lbl, ins in blocks),
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        loops=tuple(name for name, _, _ in loops),
    )


def serialize_program(p: Program) -> str:
    out = [f".input {n} {k.value}" for n, k in p.inputs]
    out += [f".output {n} {k.value}" for n, k in p.outputs]
    out += [f".loop {lbl}" for lbl in p.loops]
    # the entry block is always written first
    order = sorted(p.blocks, key=lambda b: b.label != p.entry)
    for b in order:
        out.append(f"{b.label}:")
        out.extend(f"  {ins}" for ins in b.instrs)
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------- analysis

def successors(p: Program) -> dict[str, list[str]]:
    """Control-flow successors; a block without terminator falls through."""
    labels = [b.label for b in p.blocks]
    succ: dict[str, list[str]] = {}
    for i, b in enumerate(p.blocks):
        last = b.instrs[-1] if b.instrs else None
        if last is not None and last.op == Opcode.HALT:
            succ[b.label] = []
        elif last is not None and last.op in (Opcode.BR, Opcode.BR_COND):
            succ[b.label] = list(dict.fromkeys(last.labels()))
        else:
            succ[b.label] = [labels[i + 1]] if i + 1 < len(labels) else []
    return succ


def loop_bodies(p: Program) -> dict[str, frozenset[str]]:
    """Blocks of each annotated loop: those reachable from and reaching the header."""
    succ = successors(p)
    pred: dict[str, list[str]] = {lbl: [] for lbl in succ}
    for a, bs in succ.items():
        for b in bs:
            pred.setdefault(b, []).append(a)

    def reach(start: str, edges: dict[str, list[str]]) -> set[str]:
        seen = {start}
        todo = deque([start])
        while todo:
            for nxt in edges.get(todo.popleft(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return seen

    return {h: frozenset(reach(h, succ) & reach(h, pred)) for h in p.loops}


def _result_kind(ins: Instr, kinds: dict[str, OperandKind]) -> OperandKind | None:
    op = ins.op
    if op in BINARY_INT or op in (Opcode.ICMP, Opcode.FCMP, Opcode.FPTRUNC) or op in EXTENSIONS:
        return OperandKind.I32
    if op in BINARY_FLOAT or op == Opcode.FPEXT:
        return OperandKind.F64
    if op == Opcode.GETELEMENTPTR:
        return OperandKind.PTR
    if op == Opcode.LOAD:
        return OperandKind(ins.qual or "i32")
    if op in (Opcode.SELECT, Opcode.PHI, Opcode.CALL, Opcode.BITCAST):
        src = ins.args[1] if op == Opcode.SELECT else ins.args[0]
        k = operand_kind(src, kinds)
        if op == Opcode.BITCAST and k is not None:
            return OperandKind.PTR if k == OperandKind.I32 else OperandKind.I32
        return k
    return None


def operand_kind(a: Operand, kinds: dict[str, OperandKind], want: OperandKind | None = None
                 ) -> OperandKind | None:
    if a.tag == "reg":
        return kinds.get(a.value)
    if a.tag == "mem":
        return OperandKind.PTR
    if a.tag == "float":
        return OperandKind.F64
    if a.tag == "int":
        return OperandKind.PTR if want == OperandKind.PTR else OperandKind.I32
    return OperandKind.LABEL


def register_kinds(p: Program) -> tuple[dict[str, OperandKind], list[str]]:
    """Infer the static kind of every register; returns (kinds, conflicts)."""
    kinds: dict[str, OperandKind] = {n: k for n, k in p.inputs if n.startswith("%")}
    conflicts: list[str] = []
    changed = True
    while changed:
        changed = False
        for b in p.blocks:
            for ins in b.instrs:
                if ins.dest is None:
                    continue
                k = _result_kind(ins, kinds)
                if k is None:
                    continue
                old = kinds.get(ins.dest)
                if old is None:
                    kinds[ins.dest] = k
                    changed = True
                elif old != k:
                    msg = f"kind conflict: {ins.dest} is {old.value} and {k.value}"
                    if msg not in conflicts:
                        conflicts.append(msg)
    return kinds, conflicts


_I32, _F64, _PTR = OperandKind.I32, OperandKind.F64, OperandKind.PTR


def _signature_errors(ins: Instr, kinds: dict[str, OperandKind]) -> list[str]:
    op, args = ins.op, ins.args
    errs: list[str] = []

    def need(i: int, allowed: tuple[OperandKind, ...]):
        k = operand_kind(args[i], kinds, allowed[0] if len(allowed) == 1 else None)
        if k is None:
            return  # reported as use-before-def
        if k not in allowed:
            errs.append(f"{ins}: operand {i} is {k.value}, expected "
                        + "/".join(a.value for a in allowed))

    def label(i: int):
        if args[i].tag != "label":
            errs.append(f"{ins}: operand {i} must be a label")

    def value(i: int):
        if args[i].tag == "label":
            errs.append(f"{ins}: operand {i} must not be a label")

    if op in BINARY_INT:
        need(0, (_I32,)); need(1, (_I32,))
    elif op in BINARY_FLOAT:
        need(0, (_F64,)); need(1, (_F64,))
    elif op == Opcode.ICMP:
        need(0, (_I32, _PTR)); need(1, (_I32, _PTR))
    elif op == Opcode.FCMP:
        need(0, (_F64,)); need(1, (_F64,))
    elif op == Opcode.GETELEMENTPTR:
        need(0, (_PTR,)); need(1, (_I32,))
    elif op == Opcode.LOAD:
        need(0, (_PTR,))
    elif op == Opcode.STORE:
        value(0); need(1, (_PTR,))
    elif op in EXTENSIONS:
        need(0, (_I32,))
        if args[1].tag != "int" or not 1 <= int(args[1].value) <= 31:
            errs.append(f"{ins}: width must be an integer literal in [1, 31]")
    elif op == Opcode.FPTRUNC:
        need(0, (_F64,))
    elif op == Opcode.FPEXT:
        need(0, (_I32,))
    elif op == Opcode.BITCAST:
        need(0, (_I32, _PTR))
    elif op == Opcode.SELECT:
        need(0, (_I32,)); value(1); value(2)
        k1, k2 = operand_kind(args[1], kinds), operand_kind(args[2], kinds)
        if k1 and k2 and k1 != k2:
            errs.append(f"{ins}: select arms differ in kind")
    elif op == Opcode.PHI:
        for i in range(0, len(args), 2):
            value(i); label(i + 1)
    elif op in (Opcode.CALL, Opcode.OUTPUT):
        value(0)
    elif op == Opcode.BR:
        label(0)
    elif op == Opcode.BR_COND:
        need(0, (_I32,)); label(1); label(2)
    return errs


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_program(p: Program) -> ValidationReport:
    """Check every structural program invariant; violations are returned, not raised."""
    v: list[str] = []
    labels = [b.label for b in p.blocks]
    label_set = set(labels)
    if len(label_set) != len(labels):
        v.append("duplicate block label")
    if p.entry not in label_set:
        v.append(f"undefined label: entry {p.entry}")
        return ValidationReport(v)
    for b in p.blocks:
        for ins in b.instrs:
            for t in ins.labels():
                if t not in label_set:
                    v.append(f"undefined label: {t}")
            if ins.op in TERMINATORS and ins is not b.instrs[-1]:
                v.append(f"terminator {ins.op.value} in the middle of block {b.label}")
    for h in p.loops:
        if h not in label_set:
            v.append(f"undefined label: loop header {h}")
    if v:
        return ValidationReport(v)
    last = p.blocks[-1]
    if not last.instrs or last.instrs[-1].op not in TERMINATORS:
        v.append(f"block {last.label} falls off the end of the program")

    kinds, conflicts = register_kinds(p)
    v.extend(conflicts)
    for b in p.blocks:
        for ins in b.instrs:
            v.extend(_signature_errors(ins, kinds))

    v.extend(_definedness_violations(p))
    return ValidationReport(v)


def _definedness_violations(p: Program) -> list[str]:
    succ = successors(p)
    preds: dict[str, list[str]] = {b.label: [] for b in p.blocks}
    for a, bs in succ.items():
        for b in bs:
            preds[b].append(a)
    all_regs = {n for n, _ in p.inputs if n.startswith("%")}
    for b in p.blocks:
        all_regs.update(i.dest for i in b.instrs if i.dest)
    entry_in = frozenset(n for n, _ in p.inputs if n.startswith("%"))

    # must-defined registers on entry to each block (intersection over predecessors)
    din: dict[str, frozenset[str]] = {b.label: frozenset(all_regs) for b in p.blocks}
    din[p.entry] = entry_in
    reachable = _reachable(p.entry, succ)

    def transfer(b: Block, defined: frozenset[str]) -> frozenset[str]:
        return defined | {i.dest for i in b.instrs if i.dest}

    changed = True
    while changed:
        changed = False
        for b in p.blocks:
            if b.label == p.entry or b.label not in reachable:
                continue
            ps = [q for q in preds[b.label] if q in reachable]
            new = frozenset(all_regs)
            for q in ps:
                new &= transfer(p.block(q), din[q])
            if new != din[b.label]:
                din[b.label] = new
                changed = True

    out: list[str] = []
    out_regs = [n for n, _ in p.outputs if n.startswith("%")]
    for b in p.blocks:
        if b.label not in reachable:
            continue
        defined = set(din[b.label])
        for ins in b.instrs:
            if ins.op == Opcode.PHI:
                uses = []
                for i in range(0, len(ins.args), 2):
                    val, lbl = ins.args[i], ins.args[i + 1].value
                    if val.tag == "reg" and lbl in din and \
                            val.value not in transfer(p.block(lbl), din[lbl]):
                        uses.append(val.value)
            else:
                uses = [u for u in ins.reg_uses() if u not in defined]
            for u in uses:
                msg = f"use before def: {u}"
                if msg not in out:
                    out.append(msg)
            if ins.dest:
                defined.add(ins.dest)
            if ins.op == Opcode.HALT:
                for r in out_regs:
                    if r not in defined:
                        path = _path_without_def(p, succ, b.label, r)
                        out.append(f"output {r} unwritten on path {' -> '.join(path)}")
    return out


def _reachable(start: str, succ: dict[str, list[str]]) -> set[str]:
    seen = {start}
    todo = [start]
    while todo:
        for n in succ[todo.pop()]:
            if n not in seen:
                seen.add(n)
                todo.append(n)
    return seen


def _path_without_def(p: Program, succ: dict[str, list[str]], target: str, reg: str) -> list[str]:
    """A block path from the entry to ``target`` on which ``reg`` is never written."""
    writes = {b.label: any(i.dest == reg for i in b.instrs) for b in p.blocks}
    parent: dict[str, str | None] = {p.entry: None}
    todo = deque([p.entry]) if not writes[p.entry] or p.entry == target else deque()
    while todo:
        cur = todo.popleft()
        if cur == target:
            break
        for n in succ[cur]:
            if n not in parent and (not writes[n] or n == target):
                parent[n] = cur
                todo.append(n)
    if target not in parent:
        return [target]
    path = [target]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]
