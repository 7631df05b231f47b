"""Deterministic mini-IR interpreter.

Two execution paths share one machine state (register list, memory dict,
output list):

* a per-block fast path: every basic block is compiled once into a Python
  function that runs the whole block, used for fault-free stretches;
* a generic single-instruction path that can emit a trace record and apply a
  bit flip to one operand, used for the golden (traced) run and for the one
  faulty instruction of an injected run.

Both call the helpers in :mod:`resilpred.sem`, so results agree.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

from . import sem
from .ir import (FCMP_PREDICATES, ICMP_PREDICATES, Instr, Opcode, OperandKind, Program,
                 loop_bodies, register_kinds, validate_program)
from .sem import M32, Trap
from .trace import IMMEDIATE, InstructionRecord, OperandRecord, Trace, split_chunks


class Status(str, enum.Enum):
    COMPLETED = "completed"
    TRAPPED = "trapped"
    HUNG = "hung"


class UsageError(ValueError):
    """Bad call (unbound input, invalid program); distinct from a trapped run."""


@dataclass
class ExecutionOutcome:
    status: Status
    outputs: tuple = ()
    steps: int = 0
    reason: str | None = None
    trace: Trace | None = None

    def __post_init__(self):
        if self.status != Status.COMPLETED:
            self.outputs = ()


@dataclass
class _State:
    R: list
    M: dict
    O: list
    bi: int = 0
    pc: int = 0
    prev: int = -1
    steps: int = 0
    reason: str | None = None


def _mem_name(addr: int) -> str:
    return f"0x{addr & M32:08x}"


class Machine:
    """A validated program prepared for repeated execution."""

    def __init__(self, program: Program):
        report = validate_program(program)
        if not report.ok:
            raise UsageError("invalid program: " + "; ".join(report.violations))
        self.program = program
        self.kinds, _ = register_kinds(program)
        self.reg_ids: dict[str, int] = {}
        for name, _k in program.inputs:
            if name.startswith("%"):
                self._rid(name)
        for b in program.blocks:
            for ins in b.instrs:
                for r in ins.reg_uses():
                    self._rid(r)
                if ins.dest:
                    self._rid(ins.dest)
        self.reg_names = sorted(self.reg_ids, key=self.reg_ids.get)
        self.blocks = program.blocks
        self.block_index = {b.label: i for i, b in enumerate(program.blocks)}
        self.entry = self.block_index[program.entry]
        bodies = loop_bodies(program)
        self.loop_body = {self.block_index[h]: frozenset(self.block_index[x] for x in blk)
                          for h, blk in bodies.items()}
        self.block_len = [len(b.instrs) for b in program.blocks]
        self._fns = [self._compile_block(i) for i in range(len(program.blocks))]
        self.output_names = tuple(
            n if n.startswith("%") else _mem_name(int(n[1:])) for n, _ in program.outputs)

    def _rid(self, name: str) -> int:
        if name not in self.reg_ids:
            self.reg_ids[name] = len(self.reg_ids)
        return self.reg_ids[name]

    # ------------------------------------------------------------------ state

    def initial_state(self, inputs: Mapping[str, object]) -> _State:
        R: list = [0.0 if self.kinds.get(n) == OperandKind.F64 else 0 for n in self.reg_names]
        M: dict = {}
        for name, kind in self.program.inputs:
            if name not in inputs:
                raise UsageError(f"unbound input {name}")
            val = inputs[name]
            if name.startswith("%"):
                R[self.reg_ids[name]] = _coerce(val, kind)
            else:
                base = int(name[1:])
                vals = val if isinstance(val, (list, tuple)) else [val]
                for off, x in enumerate(vals):
                    v = _coerce(x, kind)
                    M[base + off] = v
        return _State(R, M, [], self.entry, 0, -1, 0)

    # ------------------------------------------------------------------ fast path

    def _compile_block(self, bi: int):
        b = self.blocks[bi]
        lines = ["def _blk(R, M, O, prev):"]
        n = len(b.instrs)
        for idx, ins in enumerate(b.instrs):
            lines.extend("    " + s for s in self._codegen(ins, idx))
        last = b.instrs[-1] if b.instrs else None
        if last is None or last.op not in (Opcode.BR, Opcode.BR_COND, Opcode.HALT):
            lines.append(f"    return {bi + 1}")
        if n == 0 and len(lines) == 1:
            lines.append(f"    return {bi + 1}")
        env = {
            "sem": sem, "Trap": Trap, "M32": M32, "MEMW": sem.MEM_WORDS,
            "f2b": sem.f2b, "b2f": sem.b2f,
        }
        exec(compile("\n".join(lines), f"<block {b.label}>", "exec"), env)
        return env["_blk"]

    def _src(self, a) -> str:
        if a.tag == "reg":
            return f"R[{self.reg_ids[a.value]}]"
        if a.tag == "float":
            return repr(float(a.value))
        if a.tag == "label":
            return ""
        return str(int(a.value) & M32)

    def _codegen(self, ins: Instr, idx: int) -> list[str]:
        op = ins.op
        s = [self._src(a) for a in ins.args]
        d = f"R[{self.reg_ids[ins.dest]}]" if ins.dest else None
        if op == Opcode.ADD:
            return [f"{d} = ({s[0]} + {s[1]}) & M32"]
        if op == Opcode.SUB:
            return [f"{d} = ({s[0]} - {s[1]}) & M32"]
        if op == Opcode.MUL:
            return [f"{d} = ({s[0]} * {s[1]}) & M32"]
        if op == Opcode.SDIV:
            return [f"{d} = sem.sdiv({s[0]}, {s[1]}, {idx})"]
        if op == Opcode.SREM:
            return [f"{d} = sem.srem({s[0]}, {s[1]}, {idx})"]
        if op == Opcode.FADD:
            return [f"{d} = {s[0]} + {s[1]}"]
        if op == Opcode.FSUB:
            return [f"{d} = {s[0]} - {s[1]}"]
        if op == Opcode.FMUL:
            return [f"{d} = {s[0]} * {s[1]}"]
        if op == Opcode.FDIV:
            return [f"{d} = sem.fdiv({s[0]}, {s[1]})"]
        if op == Opcode.AND:
            return [f"{d} = {s[0]} & {s[1]}"]
        if op == Opcode.OR:
            return [f"{d} = {s[0]} | {s[1]}"]
        if op == Opcode.XOR:
            return [f"{d} = {s[0]} ^ {s[1]}"]
        if op == Opcode.SHL:
            return [f"{d} = sem.shl({s[0]}, {s[1]})"]
        if op == Opcode.LSHR:
            return [f"{d} = sem.lshr({s[0]}, {s[1]})"]
        if op == Opcode.ASHR:
            return [f"{d} = sem.ashr({s[0]}, {s[1]})"]
        if op == Opcode.ICMP:
            return [f"{d} = {_icmp_expr(ins.qual, s[0], s[1])}"]
        if op == Opcode.FCMP:
            return [f"{d} = sem.fcmp({ins.qual!r}, {s[0]}, {s[1]})"]
        if op == Opcode.GETELEMENTPTR:
            return [f"{d} = ({s[0]} + {s[1]}) & M32"]
        if op == Opcode.LOAD:
            conv = "v if v.__class__ is float else b2f(v)" if ins.qual == "f64" else \
                "v & M32 if v.__class__ is int else f2b(v) & M32"
            return [f"a = {s[0]}",
                    f"if a >= MEMW: raise Trap('out-of-range address', {idx})",
                    "v = M.get(a, 0)",
                    f"{d} = {conv}"]
        if op == Opcode.STORE:
            return [f"a = {s[1]}",
                    f"if a >= MEMW: raise Trap('out-of-range address', {idx})",
                    f"M[a] = {s[0]}"]
        if op in (Opcode.TRUNC, Opcode.ZEXT):
            return [f"{d} = {s[0]} & {(1 << int(ins.args[1].value)) - 1}"]
        if op == Opcode.SEXT:
            return [f"{d} = sem.sext({s[0]}, {int(ins.args[1].value)})"]
        if op == Opcode.FPTRUNC:
            return [f"{d} = sem.fptrunc({s[0]})"]
        if op == Opcode.FPEXT:
            return [f"{d} = sem.fpext({s[0]})"]
        if op in (Opcode.BITCAST, Opcode.CALL):
            return [f"{d} = {s[0]}"]
        if op == Opcode.SELECT:
            return [f"{d} = {s[1]} if {s[0]} else {s[2]}"]
        if op == Opcode.PHI:
            out = []
            for k in range(0, len(ins.args), 2):
                pred = self.block_index[ins.args[k + 1].value]
                kw = "if" if k == 0 else "elif"
                out.append(f"{kw} prev == {pred}:")
                out.append(f"    {d} = {s[k]}")
            out.append("else:")
            out.append(f"    raise Trap('phi without matching predecessor', {idx})")
            return out
        if op == Opcode.OUTPUT:
            return [f"O.append({s[0]})"]
        if op == Opcode.HALT:
            return ["return -1"]
        if op == Opcode.BR:
            return [f"return {self.block_index[ins.args[0].value]}"]
        if op == Opcode.BR_COND:
            t = self.block_index[ins.args[1].value]
            f = self.block_index[ins.args[2].value]
            return [f"return {t} if {s[0]} else {f}"]
        raise AssertionError(op)

    def _run_fast(self, st: _State, limit: int) -> Status | None:
        """Run whole blocks while they fit under ``limit`` steps.

        Returns COMPLETED or TRAPPED, or None when the next block would cross
        the limit (state is then positioned at that block start).
        """
        fns, lens = self._fns, self.block_len
        R, M, O = st.R, st.M, st.O
        bi, prev, steps = st.bi, st.prev, st.steps
        try:
            while True:
                n = lens[bi]
                if steps + n > limit:
                    st.bi, st.prev, st.steps, st.pc = bi, prev, steps, 0
                    return None
                nxt = fns[bi](R, M, O, prev)
                steps += n
                if nxt < 0:
                    st.steps = steps
                    return Status.COMPLETED
                prev, bi = bi, nxt
        except Trap as t:
            st.steps = steps + t.index + 1
            st.reason = t.reason
            return Status.TRAPPED

    # ------------------------------------------------------------------ generic path

    def _operand(self, st: _State, a, kind: str, want_ptr: bool = False):
        if a.tag == "reg":
            return st.R[self.reg_ids[a.value]], a.value, str(self.kinds[a.value].value)
        if a.tag == "float":
            return float(a.value), IMMEDIATE, "f64"
        if a.tag == "mem":
            return int(a.value) & M32, IMMEDIATE, "ptr"
        return int(a.value) & M32, IMMEDIATE, "ptr" if want_ptr else kind

    def step(self, st: _State, record: bool = False, flip: tuple[int, int] | None = None
             ) -> tuple[InstructionRecord | None, bool]:
        """Execute one instruction; returns (record or None, halted).

        ``flip=(operand_slot, bit)`` corrupts one operand of this instance.
        Raises :class:`Trap` with the trapping instruction already counted.
        """
        ins = self.blocks[st.bi].instrs[st.pc]
        op = ins.op
        seq = st.steps
        st.steps += 1
        # operand descriptors: [role, name, kind, value, setter-kind]
        ops: list[list] = []
        aux: list[tuple[str, int]] = []
        args = ins.args
        R, M = st.R, st.M

        def add_in(a, want_ptr=False, kind="i32"):
            v, name, k = self._operand(st, a, kind, want_ptr)
            ops.append(["in", name, k, v, a])

        mem_addr = None
        if op in (Opcode.BR, Opcode.HALT):
            pass
        elif op == Opcode.PHI:
            for k in range(0, len(args), 2):
                if self.block_index[args[k + 1].value] == st.prev:
                    add_in(args[k])
                    break
            else:
                raise Trap("phi without matching predecessor")
        elif op in (Opcode.TRUNC, Opcode.ZEXT, Opcode.SEXT):
            add_in(args[0])
            w = int(args[1].value)
            aux = [("srcw", 32), ("dstw", w)] if op == Opcode.TRUNC else [("srcw", w), ("dstw", 32)]
        elif op == Opcode.LOAD:
            add_in(args[0], want_ptr=True)
        elif op == Opcode.STORE:
            add_in(args[0])
            add_in(args[1], want_ptr=True)
        elif op == Opcode.GETELEMENTPTR:
            add_in(args[0], want_ptr=True)
            add_in(args[1])
        elif op == Opcode.FPTRUNC:
            add_in(args[0], kind="f64")
            aux = [("srcw", 64), ("dstw", 32)]
        elif op == Opcode.FPEXT:
            add_in(args[0])
            aux = [("srcw", 32), ("dstw", 64)]
        elif op == Opcode.BITCAST:
            add_in(args[0])
            aux = [("srcw", 32), ("dstw", 32)]
        elif op == Opcode.ICMP:
            ptrs = any(a.tag == "reg" and self.kinds[a.value] == OperandKind.PTR for a in args)
            add_in(args[0], want_ptr=ptrs)
            add_in(args[1], want_ptr=ptrs)
            aux = [("pred", ICMP_PREDICATES.index(ins.qual))]
        elif op == Opcode.FCMP:
            add_in(args[0], kind="f64")
            add_in(args[1], kind="f64")
            aux = [("pred", FCMP_PREDICATES.index(ins.qual))]
        else:
            for a in args:
                if a.tag != "label":
                    add_in(a)

        # input flip happens before the instruction consumes its operands
        n_in = len(ops)
        if flip is not None and flip[0] < n_in:
            self._flip_input(st, ops[flip[0]], flip[1])

        vals = [o[3] for o in ops]
        if op == Opcode.LOAD:
            mem_addr = vals[0]
            sem.check_addr(mem_addr)
            kind = ins.qual or "i32"
            if flip is not None and flip[0] == 1:
                sem.flip_cell(M, mem_addr, flip[1])
            cell = sem.load(M, mem_addr, kind)
            ops.append(["in", _mem_name(mem_addr), kind, cell, None])
            vals.append(cell)
            n_in = 2
        elif op == Opcode.STORE:
            mem_addr = vals[1]
        if op in (Opcode.SHL, Opcode.LSHR, Opcode.ASHR):
            aux = [("shamt", sem.shift_amount(vals[1]))]

        nxt_block = None
        result = None
        if op == Opcode.HALT:
            pass
        elif op == Opcode.BR:
            nxt_block = self.block_index[args[0].value]
        elif op == Opcode.BR_COND:
            nxt_block = self.block_index[args[1].value if vals[0] else args[2].value]
        elif op == Opcode.OUTPUT:
            st.O.append(vals[0])
        else:
            result = sem.evaluate(op, vals, dict(aux))
            if op == Opcode.STORE:
                sem.store(M, mem_addr, result)
                ops.append(["out", _mem_name(mem_addr), ops[0][2], result, None])
            else:
                R[self.reg_ids[ins.dest]] = result
                ops.append(["out", ins.dest, self.kinds[ins.dest].value, result, None])
            if flip is not None and flip[0] == n_in:
                if op == Opcode.STORE:
                    sem.flip_cell(M, mem_addr, flip[1])
                else:
                    rid = self.reg_ids[ins.dest]
                    R[rid] = sem.flip_bit(R[rid], ops[-1][2], flip[1])

        rec = None
        if record:
            rec = InstructionRecord(
                seq, op,
                tuple(OperandRecord(name, kind, 64 if kind == "f64" else 32,
                                    sem.value_bits(v, kind), role)
                      for role, name, kind, v, _ in ops),
                tuple(aux),
            )

        if op == Opcode.HALT:
            st.pc += 1
            return rec, True
        if nxt_block is not None:
            st.prev, st.bi, st.pc = st.bi, nxt_block, 0
        else:
            st.pc += 1
            if st.pc >= len(self.blocks[st.bi].instrs):
                st.prev, st.bi, st.pc = st.bi, st.bi + 1, 0
        return rec, False

    def _flip_input(self, st: _State, desc: list, bit: int) -> None:
        _role, name, kind, value, arg = desc
        flipped = sem.flip_bit(value, kind, bit)
        desc[3] = flipped
        if arg is not None and arg.tag == "reg":
            st.R[self.reg_ids[name]] = flipped

    # ------------------------------------------------------------------ drivers

    def execute(self, inputs: Mapping[str, object], step_budget: int,
                trace: bool = False) -> ExecutionOutcome:
        """Fault-free run; ``trace=True`` also captures the dynamic trace."""
        if step_budget < 1:
            raise UsageError("step budget must be positive")
        st = self.initial_state(inputs)
        if not trace:
            return self._finish(st, step_budget)
        return self._traced_run(st, step_budget)

    def _traced_run(self, st: _State, budget: int) -> ExecutionOutcome:
        records: list[InstructionRecord] = []
        delims: list[int] = []
        active: frozenset[int] | None = None
        status, reason = Status.HUNG, None
        while st.steps < budget:
            if st.pc == 0:
                # block entry: outer-loop chunk boundaries
                if active is not None and st.bi not in active:
                    delims.append(len(records))
                    active = None
                if active is None and st.bi in self.loop_body:
                    delims.append(len(records))
                    active = self.loop_body[st.bi]
            try:
                rec, halted = self.step(st, record=True)
            except Trap as t:
                status, reason = Status.TRAPPED, t.reason
                break
            records.append(rec)
            if halted:
                status = Status.COMPLETED
                break
        delims = sorted(set(d for d in delims if 0 < d < len(records)))
        tr = Trace(tuple(split_chunks(records, delims)), self.output_names) if records else None
        return ExecutionOutcome(status, tuple(st.O), st.steps, reason, tr)

    def _finish(self, st: _State, budget: int) -> ExecutionOutcome:
        """Continue from an arbitrary state until halt, trap, or budget."""
        while True:
            if st.pc == 0:
                status = self._run_fast(st, budget)
                if status is not None:
                    return ExecutionOutcome(status, tuple(st.O), st.steps, st.reason)
            # finish a block instruction by instruction
            if st.steps >= budget:
                return ExecutionOutcome(Status.HUNG, (), st.steps)
            try:
                _, halted = self.step(st)
            except Trap as t:
                return ExecutionOutcome(Status.TRAPPED, (), st.steps, t.reason)
            if halted:
                return ExecutionOutcome(Status.COMPLETED, tuple(st.O), st.steps)

    def run_to(self, st: _State, target_steps: int) -> ExecutionOutcome | None:
        """Advance fault-free until exactly ``target_steps`` instructions ran."""
        while st.steps < target_steps:
            if st.pc == 0:
                status = self._run_fast(st, target_steps)
                if status is not None:
                    return ExecutionOutcome(status, tuple(st.O), st.steps, st.reason)
                if st.steps >= target_steps:
                    break
            try:
                _, halted = self.step(st)
            except Trap as t:
                return ExecutionOutcome(Status.TRAPPED, (), st.steps, t.reason)
            if halted:
                return ExecutionOutcome(Status.COMPLETED, tuple(st.O), st.steps)
        return None

    def execute_with_flip(self, inputs: Mapping[str, object], dyn_index: int,
                          operand_slot: int, bit: int, step_budget: int) -> ExecutionOutcome:
        st = self.initial_state(inputs)
        early = self.run_to(st, dyn_index)
        if early is not None:
            raise UsageError(f"execution ended before dynamic instruction {dyn_index}")
        try:
            _, halted = self.step(st, flip=(operand_slot, bit))
        except Trap as t:
            return ExecutionOutcome(Status.TRAPPED, (), st.steps, t.reason)
        if halted:
            return ExecutionOutcome(Status.COMPLETED, tuple(st.O), st.steps)
        return self._finish(st, step_budget)


def _icmp_expr(pred: str, a: str, b: str) -> str:
    rel = {"eq": "==", "ne": "!=", "lt": "<", "le": "<=", "gt": ">", "ge": ">="}
    if pred in ("eq", "ne"):
        return f"int({a} {rel[pred]} {b})"
    if pred[0] == "s":
        # signed order of two's-complement patterns
        return f"int(({a} ^ 0x80000000) {rel[pred[1:]]} ({b} ^ 0x80000000))"
    return f"int({a} {rel[pred[1:]]} {b})"


def injectable_operands(rec: InstructionRecord) -> int:
    """Number of operands a fault may target; ``output``/``halt`` are excluded."""
    if rec.opcode in (Opcode.OUTPUT, Opcode.HALT):
        return 0
    return len(rec.operands)


def _coerce(val, kind: OperandKind):
    if kind == OperandKind.F64:
        return float(val)
    return int(val) & M32


def execute(p: Program | Machine, inputs: Mapping[str, object], step_budget: int,
            trace: bool = True) -> ExecutionOutcome:
    """Run ``p`` fault-free on ``inputs``; the outcome carries the dynamic trace."""
    m = p if isinstance(p, Machine) else Machine(p)
    return m.execute(inputs, step_budget, trace=trace)
