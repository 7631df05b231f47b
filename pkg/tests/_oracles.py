"""Direct, unoptimized restatements of the pattern definitions.

They share no code with the feature extractor: each rescans the records
for every question it answers.
"""

from __future__ import annotations

from fractions import Fraction

ADD_OPS = ("add", "fadd")


def names(r) -> list[str]:
    return [o.name for o in r.operands if o.name != "_"]


def reads(r) -> list[str]:
    return [o.name for o in r.operands if o.role == "in" and o.name != "_"]


def write(r) -> str | None:
    outs = [o.name for o in r.operands if o.role == "out" and o.name != "_"]
    return outs[0] if outs else None


def dlr_brute(trace) -> list[Fraction]:
    """Per chunk: share of its named locations never named by any later chunk nor output."""
    chunks = [list(c.records) for c in trace.chunks]
    rates = []
    for i, c in enumerate(chunks):
        distinct = []
        for r in c:
            for n in names(r):
                if n not in distinct:
                    distinct.append(n)
        if not distinct:
            rates.append(Fraction(0))
            continue
        dead = 0
        for n in distinct:
            alive = n in trace.outputs
            for later in chunks[i + 1:]:
                for r in later:
                    if n in names(r):
                        alive = True
            dead += not alive
        rates.append(Fraction(dead, len(distinct)))
    return rates


def do_brute(trace) -> list[int]:
    """Per chunk: writes whose location was last touched by a write, not a read."""
    recs = [r for c in trace.chunks for r in c.records]
    owner = [i for i, c in enumerate(trace.chunks) for _ in c.records]
    counts = [0] * len(trace.chunks)
    for i, r in enumerate(recs):
        w = write(r)
        if w is None or w in reads(r):
            continue
        for j in range(i - 1, -1, -1):
            if write(recs[j]) == w:
                counts[owner[i]] += 1
                break
            if w in reads(recs[j]):
                break
    return counts


def _is_self(recs, i) -> bool:
    """Walk the addition chains feeding record ``i`` back, looking for its own output."""
    target = write(recs[i])
    stack = [(i, s) for s in reads(recs[i])]
    seen = set()
    while stack:
        at, loc = stack.pop()
        if loc == target:
            return True
        if (at, loc) in seen:
            continue
        seen.add((at, loc))
        # most recent earlier record writing loc; recurse only through additions
        for j in range(at - 1, -1, -1):
            if write(recs[j]) == loc:
                if recs[j].opcode.value in ADD_OPS:
                    stack.extend((j, s) for s in reads(recs[j]))
                break
    return False


def ra_brute(records, n_self: int = 2) -> int:
    """Count maximal same-location runs of >= n_self self additions."""
    recs = list(records)
    seqs: dict[str, list[bool]] = {}
    for i, r in enumerate(recs):
        w = write(r)
        if w is None:
            continue
        flag = r.opcode.value in ADD_OPS and _is_self(recs, i)
        seqs.setdefault(w, []).append(flag)
    total = 0
    for flags in seqs.values():
        run = 0
        for f in flags + [False]:
            if f:
                run += 1
            else:
                total += run >= n_self
                run = 0
    return total
