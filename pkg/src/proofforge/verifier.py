"""Generated verifiers (disjunctions of adjoint checkers) and the discovery loop."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

from .encoding import fast_cost_bound, input_column, tableau
from .formula import Formula, FormulaSequence, conj
from .kernel import DEFAULT_MODE, AdjointChecker, VerificationError, make_checker, replay
from .machine import StepCapExceeded, TuringMachine, iter_strings, run, stability_threshold
from .synthesis import build_special_proof, default_pool, fs_exact, fs_upper, normal_goal

DISPATCH_COST = 1


class CheckerSet:
    """Ordered set of adjoint checkers; re-inserting an equal checker is refused."""

    def __init__(self, checkers=()):
        self._items: list[AdjointChecker] = []
        for ck in checkers:
            self.add(ck)

    def add(self, ck: AdjointChecker) -> bool:
        if ck in self._items:
            return False
        self._items.append(ck)
        return True

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def __getitem__(self, i):
        return self._items[i]


def checker_reach(ck: AdjointChecker, start: str) -> int:
    cols = [input_column(f, start) for f in ck.keyset]
    cols = [c for c in cols if c is not None]
    return max(cols) + 1 if cols else 0


def checker_bound(ck: AdjointChecker, m: TuringMachine) -> int:
    """Largest replay cost of ``ck`` against any theory of ``m``."""
    probe = tableau(m, "")
    return sum(fast_cost_bound(ck.proof[i], probe) for i in ck.in_lines)


@dataclass
class GeneratedVerifier:
    machine: TuringMachine
    checkers: CheckerSet = field(default_factory=CheckerSet)

    @property
    def input_reach(self) -> int:
        return max((checker_reach(ck, self.machine.start) for ck in self.checkers), default=0)


@dataclass(frozen=True)
class CostReport:
    per_checker: tuple[int, ...]
    total: int
    static_bound: int


def static_bound(v: GeneratedVerifier) -> int:
    return sum(checker_bound(ck, v.machine) for ck in v.checkers) + DISPATCH_COST


def run_verifier(v: GeneratedVerifier, s: str) -> tuple[int, CostReport]:
    """1 iff some checker accepts T<M,s>.  Every checker is replayed, so the cost does not depend on which accepts."""
    theory = tableau(v.machine, s)
    verdicts, costs = [], []
    for ck in v.checkers:
        ok, cost = replay(ck, theory)
        verdicts.append(ok)
        costs.append(cost)
    return int(any(verdicts)), CostReport(tuple(costs), sum(costs), static_bound(v))


@dataclass(frozen=True)
class EquivalenceReport:
    checked: int
    divergences: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.divergences


def disjunction_equiv_check(v: GeneratedVerifier, max_len: int) -> EquivalenceReport:
    """Compare F_C with an independent per-checker disjunction on every input up to max_len."""
    divergences = []
    checked = 0
    for s in iter_strings(max_len):
        theory = tableau(v.machine, s)
        direct = 0
        for ck in v.checkers:
            if all(theory.member(ck.proof[i])[0] for i in ck.in_lines) and ck.structurally_valid():
                direct = 1
        got, _ = run_verifier(v, s)
        checked += 1
        if got != direct:
            divergences.append(s)
    return EquivalenceReport(checked, tuple(divergences))


# ---------------------------------------------------------------------------
# Discovery
# ---------------------------------------------------------------------------

# (machine, witness, kernel mode) -> (proof, source label)
ProofSupplier = Callable[[TuringMachine, str, str], tuple[FormulaSequence, str]]


@dataclass(frozen=True)
class Caps:
    step_cap: int = 10_000
    k_cap: int = 10
    pool_budget: int = 2_000
    max_iterations: int = 256


def default_supplier(caps: Caps) -> ProofSupplier:
    """Shortest proof over the special proof's own lines if the budget allows, else the special proof."""

    def supply(m: TuringMachine, r: str, mode: str) -> tuple[FormulaSequence, str]:
        sp = build_special_proof(m, r, caps.step_cap, mode)
        upper = fs_upper(m, r, caps.step_cap, mode)
        res = fs_exact(m, r, sp.value, default_pool(m, r, caps.step_cap, mode), upper + 1, caps.pool_budget, mode=mode)
        if not res.exhausted:
            return res.proof, "shortest"
        return sp.proof, "special"

    return supply


@dataclass(frozen=True)
class Iteration:
    K: int
    witness: str
    source: str
    keyinfo: Formula
    checkers: int


@dataclass
class DiscoveryOutcome:
    status: str  # "proved-all-ones", "counterexample" or "exhausted"
    verifier: GeneratedVerifier
    K: Optional[int] = None
    counterexample: Optional[str] = None
    reason: str = ""
    threshold: Optional[int] = None
    iterations: list = field(default_factory=list)
    mode: str = DEFAULT_MODE

    @property
    def checkers(self) -> CheckerSet:
        return self.verifier.checkers


def discover(
    m: TuringMachine,
    caps: Caps = Caps(),
    mode: str = DEFAULT_MODE,
    supplier: Optional[ProofSupplier] = None,
) -> DiscoveryOutcome:
    """Grow a checker set until it covers every input, or a counterexample appears."""
    supplier = supplier or default_supplier(caps)
    v = GeneratedVerifier(m)
    out = DiscoveryOutcome("exhausted", v, mode=mode)
    try:
        out.threshold = stability_threshold(m, caps.k_cap, caps.step_cap)
    except StepCapExceeded as exc:
        out.reason = f"step cap: {exc}"
        return out
    while True:
        K = max(v.input_reach, out.threshold or 0)
        out.K = K
        if K > caps.k_cap:
            out.reason = f"k cap: K={K} exceeds {caps.k_cap}"
            return out
        inputs = list(iter_strings(K))
        for s in inputs:
            r = run(m, s, caps.step_cap)
            if r.verdict == "cap":
                out.reason = f"step cap: input {s!r} exceeded {caps.step_cap} steps"
                return out
            if r.value != 1:
                out.status, out.counterexample = "counterexample", s
                return out
        witness = next((s for s in inputs if run_verifier(v, s)[0] == 0), None)
        if witness is None:
            out.status = "proved-all-ones"
            return out
        if len(out.iterations) >= caps.max_iterations:
            out.reason = f"iteration cap: {caps.max_iterations} checkers added"
            return out
        proof, source = supplier(m, witness, mode)
        theory = tableau(m, witness)
        try:
            ck = make_checker(theory, proof, normal_goal(m, 1), mode, witness)
        except VerificationError as exc:
            raise ValueError(f"proof supplier returned an invalid proof for {witness!r}: {exc}") from exc
        v.checkers.add(ck)
        keyinfo = conj(list(ck.keyset)) if ck.keyset else conj([])
        out.iterations.append(Iteration(K, witness, source, keyinfo, len(v.checkers)))


def transcript(outcome: DiscoveryOutcome, step_cap: int = 10_000) -> tuple[str, dict]:
    """Human-readable log and a JSON-ready summary."""
    m = outcome.verifier.machine
    lines = [f"machine: {m.name or '<anonymous>'}", f"kernel mode: {outcome.mode}"]
    lines.append(f"prefix-stability threshold: {outcome.threshold if outcome.threshold is not None else 'none found'}")
    for n, it in enumerate(outcome.iterations):
        lines.append(f"iteration {n}: K={it.K} witness={it.witness!r} proof={it.source} checkers={it.checkers}")
        lines.append(f"  keyinfo: ${it.keyinfo.text}$")
    if outcome.status == "proved-all-ones":
        lines.append(f"result: proved-all-ones with {len(outcome.checkers)} checkers, K={outcome.K}")
        lines.append(f"certificate: F_C accepts every input of length <= {outcome.K}; input reach {outcome.verifier.input_reach}")
    elif outcome.status == "counterexample":
        s = outcome.counterexample
        r = run(m, s, step_cap, with_table=True)
        lines.append(f"result: counterexample {s!r} (M halts with {r.value} after {r.steps} steps)")
        if r.table is not None:
            for i in range(r.steps + 1):
                row = r.table.rows[i]
                h = r.table.head(i)
                tape = "".join(sq.symbol for sq in row)
                lines.append(f"  step {i}: state={row[h].state} head={h} tape={tape}")
    else:
        lines.append(f"result: exhausted ({outcome.reason}) with {len(outcome.checkers)} checkers")
    summary = {
        "status": outcome.status,
        "machine": m.name,
        "mode": outcome.mode,
        "K": outcome.K,
        "threshold": outcome.threshold,
        "counterexample": outcome.counterexample,
        "reason": outcome.reason,
        "checkers": len(outcome.checkers),
        "input_reach": outcome.verifier.input_reach,
        "witnesses": [it.witness for it in outcome.iterations],
    }
    return "\n".join(lines) + "\n", summary


def summary_json(summary: dict) -> str:
    return json.dumps(summary, sort_keys=True)
