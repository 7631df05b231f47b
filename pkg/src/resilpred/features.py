"""Trace features: weighted instruction-group densities, resilience patterns, bigrams.

Per chunk a 10-dimensional foundation vector is built in the fixed order
``[CFI, FPI, II, MI, Condition, Shift, Truncation, DO, DLR, RA]``; the trace
vector is the chunk mean (10) followed by the mean of consecutive-chunk
bigrams (20).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import sem
from .ir import TAG_ORDER, GroupTag, Opcode, opcode_group
from .trace import Chunk, InstructionRecord, Trace, iter_chunks

FOUNDATION_NAMES = ("CFI", "FPI", "II", "MI", "Condition", "Shift", "Truncation", "DO", "DLR", "RA")
FEATURE_NAMES = tuple(
    [f"ave_{n}" for n in FOUNDATION_NAMES]
    + [f"bi0_{n}" for n in FOUNDATION_NAMES]
    + [f"bi1_{n}" for n in FOUNDATION_NAMES]
)
N_SELF = 2
ADDITIONS = frozenset({Opcode.ADD, Opcode.FADD})
_REEVALUATED = frozenset({Opcode.ICMP, Opcode.FCMP, Opcode.AND, Opcode.OR, Opcode.XOR,
                          Opcode.SELECT, Opcode.BR_COND})
_TAG_INDEX = {t: i for i, t in enumerate(TAG_ORDER)}


# --------------------------------------------------------------------------- resilience weight

def _value(o) -> float | int:
    return sem.b2f(o.value) if o.kind == "f64" else o.value


def _result_bits(op: Opcode, vals: list, aux: dict) -> int:
    r = sem.evaluate(op, vals, aux)
    return sem.f2b(r) if isinstance(r, float) else r


def invariant_input_bits(rec: InstructionRecord) -> int:
    """Input bits whose individual flip leaves this instance's result unchanged."""
    ins = rec.inputs
    vals = [_value(o) for o in ins]
    aux = rec.aux_dict()
    ref = _result_bits(rec.opcode, vals, aux)
    count = 0
    for i, o in enumerate(ins):
        orig = vals[i]
        for bit in range(o.width):
            vals[i] = sem.flip_bit(orig, o.kind, bit)
            if _result_bits(rec.opcode, vals, aux) == ref:
                count += 1
        vals[i] = orig
    return count


def resilience_weight(rec: InstructionRecord) -> float:
    """Fraction of this instance's operand bits that tolerate a single-bit error."""
    total = rec.total_bits()
    if total == 0:
        return 0.0
    out = rec.output
    out_bits = out.width if out is not None else 0
    tag = opcode_group(rec.opcode)
    if tag in (GroupTag.FPI, GroupTag.II, GroupTag.MI):
        tolerant = out_bits
    elif tag == GroupTag.SHIFT:
        shamt = rec.aux_dict().get("shamt", 0)
        tolerant = min(shamt, rec.operands[0].width) + out_bits
    elif tag == GroupTag.TRUNCATION:
        aux = rec.aux_dict()
        tolerant = abs(aux.get("srcw", 0) - aux.get("dstw", 0)) + out_bits
    elif rec.opcode in _REEVALUATED:
        tolerant = invariant_input_bits(rec) + out_bits
    else:
        # br, phi, call, output, halt
        return 0.0
    return tolerant / total


def group_features(chunk: Chunk | list[InstructionRecord]) -> np.ndarray:
    """Weighted per-tag instance counts, normalized by the chunk's instance count."""
    recs = chunk.records if isinstance(chunk, Chunk) else chunk
    if not recs:
        raise ValueError("empty chunk")
    acc = np.zeros(len(TAG_ORDER))
    for r in recs:
        acc[_TAG_INDEX[opcode_group(r.opcode)]] += resilience_weight(r)
    return acc / len(recs)


# --------------------------------------------------------------------------- location patterns

def locations(rec: InstructionRecord) -> list[str]:
    return [o.name for o in rec.operands if o.is_location]


def read_locations(rec: InstructionRecord) -> list[str]:
    return [o.name for o in rec.operands if o.role == "in" and o.is_location]


def written_location(rec: InstructionRecord) -> str | None:
    out = rec.output
    return out.name if out is not None and out.is_location else None


def overwrite_counts(trace: Trace) -> list[int]:
    """Per chunk: instances whose destination was written before and not read since."""
    pending: set[str] = set()  # written, not yet read
    counts = []
    for c in trace.chunks:
        n = 0
        for r in c.records:
            for loc in read_locations(r):
                pending.discard(loc)
            w = written_location(r)
            if w is not None:
                if w in pending:
                    n += 1
                pending.add(w)
        counts.append(n)
    return counts


def overwrite_feature(chunk: Chunk, trace: Trace | None = None) -> float:
    """Data-overwriting density of ``chunk``; earlier chunks of ``trace`` count as history."""
    if trace is None:
        trace = Trace((chunk,))
    for c, n in zip(trace.chunks, overwrite_counts(trace)):
        if c is chunk or c == chunk:
            return n / len(chunk)
    raise ValueError("chunk not in trace")


def chunk_location_sets(trace: Trace) -> list[frozenset[str]]:
    return [frozenset(loc for r in c.records for loc in locations(r)) for c in trace.chunks]


def dead_location_rates(trace: Trace) -> tuple[list[float], float]:
    """Per-chunk dead-location rate and their mean.

    A location named in chunk c is dead if no later chunk names it and it is
    not a program output. One location set per chunk is built up front; a
    backward sweep keeps the union of all later sets.
    """
    if not trace.chunks:
        raise ValueError("empty trace")
    sets = chunk_location_sets(trace)
    live_at_exit = frozenset(trace.outputs)
    rates = [0.0] * len(sets)
    later: set[str] = set(live_at_exit)
    for i in range(len(sets) - 1, -1, -1):
        names = sets[i]
        if names:
            rates[i] = len(names - later) / len(names)
        later |= names
    return rates, float(np.mean(rates))


# --------------------------------------------------------------------------- repeated addition

@dataclass
class DataDependencyGraph:
    """Addition instances of one chunk and their use-to-def edges.

    ``nodes[k] = (output location, seq)``; ``preds[k]`` lists the addition
    nodes that produced the values node ``k`` reads (reaching definitions
    that are themselves additions).
    """

    nodes: list[tuple[str, int]] = field(default_factory=list)
    sources: list[frozenset[str]] = field(default_factory=list)
    preds: list[list[int]] = field(default_factory=list)

    @classmethod
    def build(cls, chunk: Chunk | list[InstructionRecord]) -> "DataDependencyGraph":
        recs = chunk.records if isinstance(chunk, Chunk) else chunk
        g = cls()
        last_writer: dict[str, int | None] = {}  # location -> addition node or None
        for r in recs:
            w = written_location(r)
            if r.opcode in ADDITIONS and w is not None:
                srcs = read_locations(r)
                k = len(g.nodes)
                g.nodes.append((w, r.seq))
                g.sources.append(frozenset(srcs))
                g.preds.append(sorted({p for s in srcs
                                       if (p := last_writer.get(s)) is not None}))
                last_writer[w] = k
            elif w is not None:
                last_writer[w] = None
        return g

    def self_additions(self) -> list[bool]:
        """Whether each node's output reappears as a source upstream in the graph.

        The backward closure of sources is memoized per node; nodes are in
        execution order, so predecessors are always finished first.
        """
        closure: list[frozenset[str]] = []
        flags = []
        for k, (out, _seq) in enumerate(self.nodes):
            acc = set(self.sources[k])
            for p in self.preds[k]:
                acc |= closure[p]
            closure.append(frozenset(acc))
            flags.append(out in acc)
        return flags


def count_runs(written: list[tuple[str, bool]], n_self: int = N_SELF) -> int:
    """Maximal runs of >= n_self consecutive self additions per location.

    ``written`` lists, in order, every write as (location, is_self_addition);
    a write that is not a self addition ends the run on its location.
    """
    run: dict[str, int] = {}
    total = 0
    for loc, is_self in written:
        if is_self:
            run[loc] = run.get(loc, 0) + 1
        else:
            if run.get(loc, 0) >= n_self:
                total += 1
            run[loc] = 0
    return total + sum(1 for v in run.values() if v >= n_self)


def repeated_addition_count(chunk: Chunk | list[InstructionRecord], n_self: int = N_SELF) -> int:
    recs = chunk.records if isinstance(chunk, Chunk) else chunk
    g = DataDependencyGraph.build(recs)
    flags = iter(g.self_additions())
    written = []
    for r in recs:
        w = written_location(r)
        if w is None:
            continue
        is_self = next(flags) if r.opcode in ADDITIONS else False
        written.append((w, is_self))
    return count_runs(written, n_self)


def repeated_addition_feature(chunk: Chunk, n_self: int = N_SELF) -> float:
    return repeated_addition_count(chunk, n_self) / len(chunk)


# --------------------------------------------------------------------------- vectors

def _vectors_from_chunks(chunks: Iterable[Chunk], outputs: Iterable[str],
                         n_self: int = N_SELF) -> np.ndarray:
    """One pass over ``chunks``; only per-chunk location sets outlive a chunk."""
    pending: set[str] = set()
    rows, sets = [], []
    for c in chunks:
        n = len(c)
        do = 0
        names: set[str] = set()
        for r in c.records:
            for loc in read_locations(r):
                pending.discard(loc)
                names.add(loc)
            w = written_location(r)
            if w is not None:
                if w in pending:
                    do += 1
                pending.add(w)
                names.add(w)
        sets.append(frozenset(names))
        rows.append(np.concatenate([
            group_features(c),
            [do / n, 0.0, repeated_addition_count(c, n_self) / n],
        ]))
    if not rows:
        raise ValueError("empty trace")
    later = set(outputs)
    for i in range(len(sets) - 1, -1, -1):
        if sets[i]:
            rows[i][8] = len(sets[i] - later) / len(sets[i])
        later |= sets[i]
    return np.vstack(rows)


def chunk_vectors(trace: Trace, n_self: int = N_SELF) -> np.ndarray:
    """Foundation vector of every chunk, shape (chunks, 10)."""
    return _vectors_from_chunks(trace.chunks, trace.outputs, n_self)


def stream_feature_vector(lines: Iterable[str], n_self: int = N_SELF) -> np.ndarray:
    """Feature vector of a serialized trace, reading it one chunk at a time."""
    it = iter_chunks(lines)
    outputs = next(it)
    return _assemble(_vectors_from_chunks(it, outputs, n_self))  # type: ignore[arg-type]


def foundation_vector(chunk: Chunk, trace: Trace, n_self: int = N_SELF) -> np.ndarray:
    for i, c in enumerate(trace.chunks):
        if c is chunk or c == chunk:
            return chunk_vectors(trace, n_self)[i]
    raise ValueError("chunk not in trace")


def bigram_vectors(vectors: np.ndarray) -> np.ndarray:
    """Mean of consecutive-chunk concatenations; one chunk pairs with itself."""
    v = np.asarray(vectors, dtype=float)
    if v.ndim != 2 or len(v) == 0:
        raise ValueError("need at least one chunk vector")
    if len(v) == 1:
        return np.concatenate([v[0], v[0]])
    return np.concatenate([v[:-1].mean(axis=0), v[1:].mean(axis=0)])


def assemble_feature_vector(trace: Trace, n_self: int = N_SELF) -> np.ndarray:
    """30-dim trace vector: chunk-mean foundation (10) then bigram mean (20)."""
    return _assemble(chunk_vectors(trace, n_self))


def _assemble(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v.mean(axis=0), bigram_vectors(v)])


def format_vector(vec) -> list[str]:
    """Nine significant digits, the dataset's text precision."""
    return [f"{x:.9g}" for x in vec]
