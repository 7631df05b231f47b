"""Single-bit fault injection: sampling, injected runs, classification, campaigns."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Mapping

import numpy as np

from .interp import ExecutionOutcome, Machine, Status, UsageError, injectable_operands
from .ir import Program
from .trace import Trace

DEFAULT_CAMPAIGN_SIZE = 3000
BUDGET_FACTOR = 100

# incremented by every injected run; lets callers prove a path injected nothing
injection_counter = 0


class Manifestation(str, enum.Enum):
    SUCCESS = "Success"
    SDC = "SDC"
    INTERRUPTION = "Interruption"


class CampaignError(RuntimeError):
    """The fault-free run did not complete, so the program cannot be labeled."""


@dataclass(frozen=True)
class InjectionPoint:
    dyn_index: int
    operand_slot: int
    bit_index: int


@dataclass(frozen=True)
class Verifier:
    """Result check standing in for a benchmark's verification phase.

    Floats pass within ``tolerance`` relative to the golden value; integers
    must match exactly. ``accept_all`` accepts any completed run.
    """

    tolerance: float = 1e-6
    accept_all: bool = False

    def accepts(self, outputs: tuple, golden: tuple) -> bool:
        if self.accept_all:
            return True
        if len(outputs) != len(golden):
            return False
        for got, want in zip(outputs, golden):
            if isinstance(want, float):
                if not isinstance(got, float) or math.isnan(got):
                    return False
                if got != want and abs(got - want) > self.tolerance * abs(want):
                    return False
            elif got != want:
                return False
        return True


@dataclass(frozen=True)
class ManifestationRates:
    success: float
    sdc: float
    interruption: float
    n: int

    @classmethod
    def from_counts(cls, counts: Mapping[Manifestation, int]) -> "ManifestationRates":
        n = sum(counts.values())
        if n < 1:
            raise ValueError("no runs")
        return cls(counts.get(Manifestation.SUCCESS, 0) / n,
                   counts.get(Manifestation.SDC, 0) / n,
                   counts.get(Manifestation.INTERRUPTION, 0) / n, n)

    def counts(self) -> dict[Manifestation, int]:
        return {Manifestation.SUCCESS: round(self.success * self.n),
                Manifestation.SDC: round(self.sdc * self.n),
                Manifestation.INTERRUPTION: round(self.interruption * self.n)}

    def as_dict(self) -> dict:
        return {"success": self.success, "sdc": self.sdc,
                "interruption": self.interruption, "n": self.n}


def _same_bits(a: tuple, b: tuple) -> bool:
    if len(a) != len(b):
        return False
    for x, y in zip(a, b):
        if type(x) is not type(y):
            return False
        if isinstance(x, float):
            if math.isnan(x) or math.isnan(y):
                if not (math.isnan(x) and math.isnan(y)):
                    return False
            elif x != y or math.copysign(1.0, x) != math.copysign(1.0, y):
                return False
        elif x != y:
            return False
    return True


def classify(outcome: ExecutionOutcome, golden: ExecutionOutcome,
             verifier: Verifier | None = None) -> Manifestation:
    if golden.status != Status.COMPLETED:
        raise ValueError("golden run did not complete")
    if outcome.status != Status.COMPLETED:
        return Manifestation.INTERRUPTION
    if _same_bits(outcome.outputs, golden.outputs):
        return Manifestation.SUCCESS
    if verifier is not None and verifier.accepts(outcome.outputs, golden.outputs):
        return Manifestation.SUCCESS
    return Manifestation.SDC


class InjectionSpace:
    """The injectable points of a golden trace, prepared for repeated sampling."""

    def __init__(self, trace: Trace):
        seqs, widths = [], []
        for rec in trace.records:
            k = injectable_operands(rec)
            if k:
                seqs.append(rec.seq)
                widths.append(tuple(o.width for o in rec.operands[:k]))
        if not seqs:
            raise ValueError("empty trace: no injectable operand bits")
        self.seqs = seqs
        self.widths = widths

    def __len__(self) -> int:
        return len(self.seqs)

    def total_bits(self) -> int:
        return sum(sum(w) for w in self.widths)

    def sample(self, rng: np.random.Generator) -> InjectionPoint:
        i = int(rng.integers(len(self.seqs)))
        ws = self.widths[i]
        slot = int(rng.integers(len(ws)))
        bit = int(rng.integers(ws[slot]))
        return InjectionPoint(self.seqs[i], slot, bit)

    def points(self):
        """Every (instance, operand, bit) point, in trace order."""
        for seq, ws in zip(self.seqs, self.widths):
            for slot, w in enumerate(ws):
                for bit in range(w):
                    yield InjectionPoint(seq, slot, bit)


def sample_injection(trace: Trace | InjectionSpace, rng: np.random.Generator) -> InjectionPoint:
    """Instance first, then operand, then bit, each uniform."""
    space = trace if isinstance(trace, InjectionSpace) else InjectionSpace(trace)
    return space.sample(rng)


def run_rng(seed: int, run_index: int) -> np.random.Generator:
    """Independent stream for one campaign run, derived from (seed, run index)."""
    return np.random.default_rng([seed, run_index])


def inject_and_execute(p: Program | Machine, inputs: Mapping[str, object], point: InjectionPoint,
                       step_budget: int, golden: ExecutionOutcome | None = None,
                       verifier: Verifier | None = None) -> Manifestation:
    """Re-run with one bit flipped at ``point`` and classify the result."""
    m = p if isinstance(p, Machine) else Machine(p)
    if golden is None:
        golden = m.execute(inputs, step_budget, trace=True)
    if golden.trace is not None:
        recs = golden.trace.records
        if not 0 <= point.dyn_index < len(recs):
            raise UsageError(f"injection point {point} out of range")
        rec = recs[point.dyn_index]
        k = injectable_operands(rec)
        if not 0 <= point.operand_slot < k or \
                not 0 <= point.bit_index < rec.operands[point.operand_slot].width:
            raise UsageError(f"injection point {point} out of range")
    return _run_point(m, inputs, point, step_budget, golden, verifier)


def _run_point(m: Machine, inputs, point: InjectionPoint, budget: int,
               golden: ExecutionOutcome, verifier: Verifier | None) -> Manifestation:
    global injection_counter
    injection_counter += 1
    out = m.execute_with_flip(inputs, point.dyn_index, point.operand_slot, point.bit_index, budget)
    return classify(out, golden, verifier)


@dataclass
class Golden:
    machine: Machine
    outcome: ExecutionOutcome
    space: InjectionSpace
    budget: int


def golden_run(p: Program | Machine, inputs: Mapping[str, object],
               step_budget: int | None = None, max_steps: int = 10_000_000) -> Golden:
    m = p if isinstance(p, Machine) else Machine(p)
    out = m.execute(inputs, max_steps, trace=True)
    if out.status != Status.COMPLETED:
        raise CampaignError(f"golden run {out.status.value}"
                            + (f" ({out.reason})" if out.reason else ""))
    budget = step_budget if step_budget is not None else BUDGET_FACTOR * out.steps
    return Golden(m, out, InjectionSpace(out.trace), budget)


def run_campaign(p: Program | Machine, inputs: Mapping[str, object], n: int = DEFAULT_CAMPAIGN_SIZE,
                 seed: int = 0, step_budget: int | None = None,
                 verifier: Verifier | None = None, golden: Golden | None = None
                 ) -> ManifestationRates:
    """``n`` independent single-bit injections; rates are class counts over ``n``."""
    if n < 1:
        raise ValueError("campaign size must be >= 1")
    verifier = verifier if verifier is not None else Verifier()
    g = golden if golden is not None else golden_run(p, inputs, step_budget)
    counts = {c: 0 for c in Manifestation}
    for i in range(n):
        point = g.space.sample(run_rng(seed, i))
        counts[_run_point(g.machine, inputs, point, g.budget, g.outcome, verifier)] += 1
    return ManifestationRates.from_counts(counts)


def required_sample_size(confidence: float, margin: float, population: int | None = None) -> int:
    """Injections needed for a worst-case (p=0.5) proportion estimate."""
    if not 0 < confidence < 1 or not 0 < margin < 1:
        raise ValueError("confidence and margin must lie in (0, 1)")
    z = NormalDist().inv_cdf(1 - (1 - confidence) / 2)
    n = z * z * 0.25 / (margin * margin)
    if population is not None:
        n = n / (1 + (n - 1) / population)
    return math.ceil(n)
