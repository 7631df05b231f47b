from collections import Counter

from resilpred.corpus import FAMILIES, generate_corpus, generate_kernel
from resilpred.interp import Status, execute
from resilpred.ir import parse_program, validate_program


def test_generation_is_seed_pinned():
    assert generate_kernel(3, 17) == generate_kernel(3, 17)
    assert generate_kernel(3, 17).source != generate_kernel(4, 17).source


def test_corpus_slices_agree():
    full = generate_corpus(9, 10)
    assert generate_corpus(9, 4, start=6) == full[6:]


def test_kernels_are_valid_and_complete():
    kernels = generate_corpus(2024, 60)
    fams = Counter(k.family for k in kernels)
    assert set(fams) == set(FAMILIES)
    for k in kernels:
        p = parse_program(k.source)
        assert validate_program(p).ok, k.name
        out = execute(p, k.inputs, 1_000_000)
        assert out.status == Status.COMPLETED, k.name
        ops = {r.opcode.value for r in out.trace.records}
        # every kernel touches memory, which keeps its interruption rate off zero
        assert ops & {"load", "store"}, k.name


def test_family_can_be_forced():
    for fam in FAMILIES:
        assert generate_kernel(1, 0, family=fam).family == fam
