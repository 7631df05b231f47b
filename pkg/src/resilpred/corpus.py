"""Seed-pinned generator of mini-IR kernels for training and evaluation corpora.

Four families: straight-line arithmetic chains, array reductions, two-pass
stencils, and data-dependent branching loops. Random knobs vary the mix of
masking operations (shifts, truncation, compare/select), pointer work, dead
temporaries, and overwrites so resilience differs across kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ir import parse_program, validate_program

FAMILIES = ("chain", "reduction", "stencil", "branch")


@dataclass(frozen=True)
class Kernel:
    name: str
    family: str
    source: str
    inputs: dict
    tolerance: float = 1e-6


class _Builder:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.lines: list[str] = []
        self.n = 0

    def fresh(self, stem: str) -> str:
        self.n += 1
        return f"%{stem}{self.n}"

    def emit(self, line: str) -> None:
        self.lines.append("  " + line)

    def label(self, name: str) -> None:
        self.lines.append(f"{name}:")

    def chance(self, p: float) -> bool:
        return bool(self.rng.random() < p)

    def pick(self, seq):
        return seq[int(self.rng.integers(len(seq)))]

    def int_(self, lo: int, hi: int) -> int:
        return int(self.rng.integers(lo, hi + 1))


def _fconst(rng) -> str:
    return f"{rng.uniform(0.25, 2.0):.3f}"


def _int_transform(b: _Builder, v: str, steps: int) -> str:
    """A random chain of integer ops starting from register ``v``."""
    for _ in range(steps):
        w = b.fresh("w")
        kind = b.pick(["shl", "lshr", "ashr", "and", "mul", "xor", "sub", "add",
                       "trunc", "clamp", "or", "sdiv", "srem"])
        if kind in ("shl", "lshr", "ashr"):
            b.emit(f"{w} = {kind} {v}, {b.int_(1, 20)}")
        elif kind == "and":
            b.emit(f"{w} = and {v}, {b.pick([1, 3, 7, 15, 255, 4095, 65535])}")
        elif kind == "or":
            b.emit(f"{w} = or {v}, {b.int_(1, 64)}")
        elif kind in ("mul", "xor", "sub", "add"):
            b.emit(f"{w} = {kind} {v}, {b.int_(2, 99)}")
        elif kind == "trunc":
            t = b.fresh("t")
            width = b.pick([8, 12, 16])
            b.emit(f"{t} = trunc {v}, {width}")
            b.emit(f"{w} = {b.pick(['zext', 'sext'])} {t}, {width}")
        elif kind == "clamp":
            k = b.fresh("k")
            lim = b.int_(10, 500)
            b.emit(f"{k} = icmp.{b.pick(['sgt', 'slt', 'ugt'])} {v}, {lim}")
            b.emit(f"{w} = select {k}, {lim}, {v}")
        else:
            b.emit(f"{w} = {kind} {v}, {b.int_(2, 9)}")
        v = w
    return v


def _float_transform(b: _Builder, v: str, steps: int) -> str:
    for _ in range(steps):
        w = b.fresh("w")
        kind = b.pick(["fmul", "fadd", "fsub", "fdiv", "clamp", "round", "square"])
        if kind in ("fmul", "fadd", "fsub", "fdiv"):
            b.emit(f"{w} = {kind} {v}, {_fconst(b.rng)}")
        elif kind == "square":
            b.emit(f"{w} = fmul {v}, {v}")
        elif kind == "clamp":
            k = b.fresh("k")
            lim = _fconst(b.rng)
            b.emit(f"{k} = fcmp.{b.pick(['ogt', 'olt'])} {v}, {lim}")
            b.emit(f"{w} = select {k}, {lim}, {v}")
        else:
            h = b.fresh("h")
            b.emit(f"{h} = fptrunc {v}")
            b.emit(f"{w} = fpext {h}")
        v = w
    return v


def _extras(b: _Builder, v: str, is_float: bool) -> None:
    """Dead temporaries and overwritten scratch values."""
    if b.chance(0.5):
        for _ in range(b.int_(1, 3)):
            d = b.fresh("dead")
            if is_float:
                b.emit(f"{d} = fmul {v}, {_fconst(b.rng)}")
            else:
                b.emit(f"{d} = {b.pick(['mul', 'xor', 'lshr'])} {v}, {b.int_(1, 9)}")
    if b.chance(0.4):
        s = b.fresh("scr")
        op = "fadd" if is_float else "add"
        one = "1.0" if is_float else "1"
        b.emit(f"{s} = {op} {v}, {one}")
        b.emit(f"{s} = {op} {v}, {one}")


def _array(rng, n: int, is_float: bool) -> list:
    if is_float:
        return [round(float(x), 4) for x in rng.uniform(-4.0, 4.0, size=n)]
    return [int(x) for x in rng.integers(0, 1000, size=n)]


def _reduction(b: _Builder) -> tuple[list[str], dict]:
    is_float = b.chance(0.5)
    kind = "f64" if is_float else "i32"
    n = b.int_(4, 24)
    base = b.pick([16, 64, 512, 4096])
    ld = "load.f64" if is_float else "load"
    two_arrays = b.chance(0.4)
    header = [".input %n i32", ".input %a ptr", f".input @{base} {kind}"]
    inputs = {"%n": n, "%a": base, f"@{base}": _array(b.rng, n, is_float)}
    if two_arrays:
        base2 = base + 2048
        header += [".input %b ptr", f".input @{base2} {kind}"]
        inputs.update({"%b": base2, f"@{base2}": _array(b.rng, n, is_float)})
    header += [f".output %acc {kind}", ".loop loop"]
    b.label("entry")
    b.emit("%i = add 0, 0")
    b.emit("%acc = fadd 0.0, 0.0" if is_float else "%acc = add 0, 0")
    b.label("loop")
    b.emit("%p = getelementptr %a, %i")
    b.emit(f"%v = {ld} %p")
    v = "%v"
    if two_arrays:
        b.emit("%q = getelementptr %b, %i")
        b.emit(f"%u = {ld} %q")
        m = b.fresh("m")
        b.emit(f"{m} = {b.pick(['fmul', 'fsub', 'fadd']) if is_float else b.pick(['mul', 'xor', 'sub', 'add'])} %v, %u")
        v = m
    steps = b.int_(0, 4)
    v = _float_transform(b, v, steps) if is_float else _int_transform(b, v, steps)
    _extras(b, v, is_float)
    red = b.pick(["fadd", "fadd", "fmul"]) if is_float else b.pick(["add", "add", "xor", "or"])
    if red == "fmul":
        b.lines[b.lines.index("  %acc = fadd 0.0, 0.0")] = "  %acc = fadd 1.0, 0.0"
    b.emit(f"%acc = {red} %acc, {v}")
    b.emit("%i = add %i, 1")
    b.emit("%c = icmp.slt %i, %n")
    b.emit("br_cond %c, $loop, $done")
    b.label("done")
    b.emit("output %acc")
    b.emit("halt")
    return header, inputs


def _stencil(b: _Builder) -> tuple[list[str], dict]:
    is_float = b.chance(0.6)
    kind = "f64" if is_float else "i32"
    ld = "load.f64" if is_float else "load"
    add = "fadd" if is_float else "add"
    n = b.int_(5, 20)
    base, out = 16, 1024
    header = [".input %n i32", ".input %a ptr", ".input %o ptr", f".input @{base} {kind}",
              f".output %sum {kind}", ".loop pass1", ".loop pass2"]
    inputs = {"%n": n, "%a": base, "%o": out, f"@{base}": _array(b.rng, n + 1, is_float)}
    b.label("entry")
    b.emit("%i = add 0, 0")
    b.emit("%m = sub %n, 1")
    b.label("pass1")
    b.emit("%p = getelementptr %a, %i")
    b.emit(f"%x0 = {ld} %p")
    b.emit("%p1 = getelementptr %p, 1")
    b.emit(f"%x1 = {ld} %p1")
    s = b.fresh("s")
    b.emit(f"{s} = {add} %x0, %x1")
    steps = b.int_(0, 3)
    s = _float_transform(b, s, steps) if is_float else _int_transform(b, s, steps)
    b.emit("%po = getelementptr %o, %i")
    b.emit(f"store {s}, %po")
    _extras(b, s, is_float)
    b.emit("%i = add %i, 1")
    b.emit("%c = icmp.slt %i, %m")
    b.emit("br_cond %c, $pass1, $mid")
    b.label("mid")
    b.emit("%j = add 0, 0")
    b.emit("%sum = fadd 0.0, 0.0" if is_float else "%sum = add 0, 0")
    if b.chance(0.5):
        b.emit(f"%scale = {'fmul %sum, 2.0' if is_float else 'shl %m, 2'}")
    b.label("pass2")
    b.emit("%r = getelementptr %o, %j")
    b.emit(f"%y = {ld} %r")
    y = "%y"
    if b.chance(0.5):
        y = _float_transform(b, y, 1) if is_float else _int_transform(b, y, 1)
    b.emit(f"%sum = {add} %sum, {y}")
    b.emit("%j = add %j, 1")
    b.emit("%c2 = icmp.slt %j, %m")
    b.emit("br_cond %c2, $pass2, $done")
    b.label("done")
    b.emit("output %sum")
    b.emit("halt")
    return header, inputs


def _branch(b: _Builder) -> tuple[list[str], dict]:
    n = b.int_(6, 24)
    base = b.pick([16, 256, 8192])
    header = [".input %n i32", ".input %a ptr", f".input @{base} i32",
              ".output %x i32", ".output %y i32", ".loop loop"]
    inputs = {"%n": n, "%a": base, f"@{base}": _array(b.rng, n, False)}
    thr = b.int_(100, 900)
    b.label("entry")
    b.emit("%i = add 0, 0")
    b.emit("%x = add 0, 0")
    b.emit("%y = add 0, 0")
    b.label("loop")
    b.emit("%p = getelementptr %a, %i")
    b.emit("%v = load %p")
    b.emit(f"%k = icmp.{b.pick(['sgt', 'slt', 'uge'])} %v, {thr}")
    b.emit("br_cond %k, $hi, $lo")
    b.label("hi")
    v = _int_transform(b, "%v", b.int_(0, 3))
    b.emit(f"%x = add %x, {v}")
    b.emit("br $next")
    b.label("lo")
    v = _int_transform(b, "%v", b.int_(0, 3))
    b.emit(f"%y = {b.pick(['xor', 'add', 'or'])} %y, {v}")
    _extras(b, v, False)
    b.emit("br $next")
    b.label("next")
    b.emit("%i = add %i, 1")
    b.emit("%c = icmp.slt %i, %n")
    b.emit("br_cond %c, $loop, $done")
    b.label("done")
    if b.chance(0.5):
        b.emit(f"%x = {b.pick(['lshr', 'and'])} %x, {b.pick([3, 255])}")
    b.emit("output %x")
    b.emit("output %y")
    b.emit("halt")
    return header, inputs


def _chain(b: _Builder) -> tuple[list[str], dict]:
    # operands arrive through memory and the result is stored back, as in a
    # function body working on its arguments; intermediate values may spill
    is_float = b.chance(0.5)
    kind = "f64" if is_float else "i32"
    ld = "load.f64" if is_float else "load"
    base = b.pick([16, 128, 2048])
    header = [".input %a ptr", f".input @{base} {kind}", f".output %r {kind}"]
    if is_float:
        vals = [round(float(x), 3) for x in b.rng.uniform(0.5, 3, size=2)]
    else:
        vals = [int(x) for x in b.rng.integers(1, 5001, size=2)]
    inputs = {"%a": base, f"@{base}": vals}
    b.label("entry")
    b.emit(f"%s0 = {ld} %a")
    b.emit("%p1 = getelementptr %a, 1")
    b.emit(f"%s1 = {ld} %p1")
    v = "%s0"
    for seg in range(b.int_(2, 5)):
        steps = b.int_(2, 6)
        v = _float_transform(b, v, steps) if is_float else _int_transform(b, v, steps)
        m = b.fresh("m")
        if is_float:
            b.emit(f"{m} = {b.pick(['fadd', 'fmul', 'fsub'])} {v}, %s1")
        else:
            b.emit(f"{m} = {b.pick(['add', 'xor', 'mul', 'sub'])} {v}, %s1")
        _extras(b, m, is_float)
        v = m
        if b.chance(0.4):
            sp = b.fresh("sp")
            b.emit(f"{sp} = getelementptr %a, {2 + seg}")
            b.emit(f"store {v}, {sp}")
            v = b.fresh("m")
            b.emit(f"{v} = {ld} {sp}")
    b.emit(f"%r = {'fadd' if is_float else 'add'} {v}, {'0.0' if is_float else '0'}")
    b.emit("%pr = getelementptr %a, 8")
    b.emit("store %r, %pr")
    b.emit("output %r")
    b.emit("halt")
    return header, inputs


_MAKERS = {"chain": _chain, "reduction": _reduction, "stencil": _stencil, "branch": _branch}


def generate_kernel(seed: int, index: int, family: str | None = None) -> Kernel:
    """Kernel ``index`` of the corpus pinned by ``seed``; same arguments, same text."""
    rng = np.random.default_rng([seed, index, 0x6B])
    fam = family or FAMILIES[int(rng.integers(len(FAMILIES)))]
    b = _Builder(rng)
    header, inputs = _MAKERS[fam](b)
    name = f"k{index:04d}_{fam}"
    source = f"; generated kernel {name}\n" + "\n".join(header + b.lines) + "\n"
    report = validate_program(parse_program(source))
    if not report.ok:
        raise AssertionError(f"generator produced an invalid program {name}: {report.violations}")
    return Kernel(name, fam, source, inputs)


def generate_corpus(seed: int, count: int, start: int = 0) -> list[Kernel]:
    return [generate_kernel(seed, i) for i in range(start, start + count)]
