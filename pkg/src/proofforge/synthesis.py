"""Special normal proofs built from computation tables, and proof-length measures.

Every cell of the (f+2) x (f+2) table window gets a short section proving its
value from the previous row; the sections are concatenated row by row and
closed with an existential generalization of the halting cell.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

from .encoding import TableauTheory, blank_tail_formula, cell_formula, square, tableau
from .formula import (
    LEFT_END,
    TAPE_SYMBOLS,
    Cmp,
    Exists,
    Forall,
    Formula,
    FormulaSequence,
    Imp,
    Num,
    Offset,
    Proj,
    Square,
    Triple,
    Var,
    conj,
    conjuncts,
    forall_many,
    formula_len,
    seq_ascii_len,
    subst,
)
from .kernel import DEFAULT_MODE, MODES, VerificationError, verify
from .machine import ComputationTable, MachineError, StepCapExceeded, TapeSquare, TuringMachine, iter_strings, run

AXIOM_CELL = "axiom-cell"
BLANK_TAIL_CELL = "blank-tail-cell"
TRANSITION_CELL = "transition-cell"


def normal_goal(m: TuringMachine, v: int) -> Formula:
    """``\\exists i t_{i,1}=(v,q_halt,1)``"""
    return Exists("i", Cmp(Square(Var("i"), Num(1)), "=", Triple(str(v), m.halt, 1)))


@dataclass(frozen=True)
class ProofSection:
    cell: tuple[int, int]
    target: Formula
    lines: FormulaSequence
    kind: str
    role: str = ""  # transition cells: "head", "moved" or "frame"


def _sq_formula(i: int, j: int, sq: TapeSquare) -> Formula:
    return cell_formula(i, j, sq.symbol, sq.state, sq.flag)


# ---------------------------------------------------------------------------
# Section templates
# ---------------------------------------------------------------------------


def _conjunct_lines(gamma: Formula, i0: int, h: int, idx: int, mode: str) -> list[Formula]:
    """Lines deriving the idx-th conjunct of a transition formula at row i0, head column h.

    The first line is gamma itself; the head-cell formula is used as an
    outside premise by the modus ponens that produces the conjunct.
    """
    env = {"i": Num(i0), "j": Num(h)}
    guard, body = gamma.body.body.left, gamma.body.body.right
    head = subst(guard, env)
    parts = conjuncts(body)
    if mode == "paper":
        weak = forall_many(["i", "j"], Imp(guard, parts[idx]))
        inst = subst(parts[idx], env)
        return [gamma, Imp(gamma, weak), weak, Imp(weak, Imp(head, inst)), Imp(head, inst), inst]
    row = subst(gamma.body, {"i": Num(i0)})
    whole = subst(body, env)
    inst = subst(parts[idx], env)
    return [gamma, Imp(gamma, row), row, Imp(row, Imp(head, whole)), Imp(head, whole), whole, Imp(whole, inst), inst]


def transition_lines(
    m: TuringMachine,
    theory: TableauTheory,
    i0: int,
    h: int,
    head_sq: TapeSquare,
    c: int,
    prior: TapeSquare,
    mode: str,
) -> tuple[list[Formula], str]:
    """Lines proving cell (i0+1, c) from row i0 whose head sits at column h."""
    q, a = head_sq.state, head_sq.symbol
    p, b, move = m.delta[(q, a)]
    gamma = _transition_in(theory, q, a)
    d = {"L": -1, "S": 0, "R": 1}[move]
    if c == h:
        return _conjunct_lines(gamma, i0, h, 0, mode), "head"
    nxt = i0 + 1
    known = _sq_formula(i0, c, prior)
    if move != "S" and c == h + d:
        lines = _conjunct_lines(gamma, i0, h, 1, mode)
        arrived = lines[-1]
        target = cell_formula(nxt, c, prior.symbol, p, 1)
        link = Imp(arrived, target)
        return lines + [Imp(known, link), link, target], "moved"
    lines = _conjunct_lines(gamma, i0, h, len(conjuncts(gamma.body.body.right)) - 1, mode)
    frame = lines[-1]
    at_c = subst(frame.body, {frame.var: Num(c)})
    guard, value = at_c.left, at_c.right
    target = cell_formula(nxt, c, prior.symbol, p, 0)
    link = Imp(value, target)
    return lines + [Imp(frame, at_c), at_c, guard, value, Imp(known, link), link, target], "frame"


def _transition_in(theory: TableauTheory, q: str, a: str) -> Formula:
    return theory.def_part[2 + theory.machine.states.index(q) * len(TAPE_SYMBOLS) + TAPE_SYMBOLS.index(a)]


def blank_tail_lines(start: str, length: int, b: int) -> list[Formula]:
    header = blank_tail_formula(start, length)
    bound = Cmp(Num(b), ">", Num(length))
    target = cell_formula(0, b, "_", start, 0)
    step = Imp(bound, target)
    return [bound, header, Imp(header, step), step, target]


def closing_lines(m: TuringMachine, d: int, v: int) -> list[Formula]:
    goal = normal_goal(m, v)
    halted = cell_formula(d, 1, str(v), m.halt, 1)
    return [Imp(halted, goal), goal]


def build_sec(table: ComputationTable, theory: TableauTheory, i: int, j: int, mode: str = DEFAULT_MODE) -> ProofSection:
    """The section proving the value of cell (i, j)."""
    m = theory.machine
    target = _sq_formula(i, j, table[i, j])
    if i == 0:
        n = len(theory.input)
        if j <= n:
            return ProofSection((i, j), target, FormulaSequence((target,)), AXIOM_CELL)
        lines = blank_tail_lines(m.start, n, j)
        return ProofSection((i, j), target, FormulaSequence(tuple(lines)), BLANK_TAIL_CELL)
    h = table.head(i - 1)
    lines, role = transition_lines(m, theory, i - 1, h, table[i - 1, h], j, table[i - 1, j], mode)
    if lines[-1] != target:
        raise AssertionError(f"section for cell {(i, j)} ends in {lines[-1].text}, table says {target.text}")
    return ProofSection((i, j), target, FormulaSequence(tuple(lines)), TRANSITION_CELL, role)


# ---------------------------------------------------------------------------
# Whole proofs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpecialProof:
    machine: TuringMachine
    input: str
    value: int
    table: ComputationTable = field(repr=False)
    sections: tuple[ProofSection, ...] = field(repr=False)
    closing: FormulaSequence = field(repr=False)
    proof: FormulaSequence = field(repr=False)
    mode: str = DEFAULT_MODE

    @property
    def steps(self) -> int:
        return self.table.size - 2

    @property
    def goal(self) -> Formula:
        return self.proof[-1]

    @property
    def theory(self) -> TableauTheory:
        return tableau(self.machine, self.input)


def halting_run(m: TuringMachine, s: str, cap: int):
    result = run(m, s, cap, with_table=True)
    if result.verdict == "cap":
        raise StepCapExceeded(s, cap)
    if result.verdict != "halted":
        raise MachineError(f"run on {s!r} halted without a bit under the head at column 1")
    return result


@lru_cache(maxsize=512)
def build_special_proof(m: TuringMachine, s: str, cap: int, mode: str = DEFAULT_MODE) -> SpecialProof:
    if mode not in MODES:
        raise ValueError(f"unknown kernel mode {mode!r}")
    result = halting_run(m, s, cap)
    table, v = result.table, result.value
    theory = tableau(m, s)
    size = table.size
    sections = tuple(build_sec(table, theory, i, j, mode) for i in range(size) for j in range(size))
    d = next(i for i in range(size) if table[i, 1] == TapeSquare(str(v), m.halt, 1))
    closing = FormulaSequence(tuple(closing_lines(m, d, v)))
    lines: list[Formula] = []
    for sec in sections:
        lines.extend(sec.lines)
    lines.extend(closing)
    return SpecialProof(m, s, v, table, sections, closing, FormulaSequence(tuple(lines)), mode)


def fs_upper(m: TuringMachine, s: str, cap: int, mode: str = DEFAULT_MODE) -> int:
    """ASCII length of the special proof, an upper bound on the shortest normal proof."""
    return seq_ascii_len(build_special_proof(m, s, cap, mode).proof)


# ---------------------------------------------------------------------------
# Length constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LengthConstants:
    K: int
    C: int

    def section_bound(self, f: int) -> int:
        return self.K * f + self.C

    def proof_bound(self, f: int) -> int:
        return ((f + 2) * (f + 2) + 1) * self.section_bound(f)


def _numerals(t, out: list) -> None:
    if isinstance(t, Num):
        out.append(t)
    elif isinstance(t, Offset):
        _numerals(t.base, out)
    elif isinstance(t, Square):
        _numerals(t.row, out)
        _numerals(t.col, out)
    elif isinstance(t, Proj):
        _numerals(t.inner, out)
    elif isinstance(t, Triple) and not isinstance(t.symbol, str):
        _numerals(t.symbol, out)


def _formula_numerals(f: Formula, out: list) -> None:
    if isinstance(f, Cmp):
        _numerals(f.lhs, out)
        _numerals(f.rhs, out)
    elif hasattr(f, "left"):
        _formula_numerals(f.left, out)
        _formula_numerals(f.right, out)
    elif hasattr(f, "body"):
        _formula_numerals(f.body, out)


def numeral_profile(lines: Sequence[Formula]) -> tuple[int, int]:
    """(characters outside numerals, number of numerals) of a line sequence."""
    nums: list = []
    for f in lines:
        _formula_numerals(f, nums)
    return seq_ascii_len(lines) - sum(len(n.text) for n in nums), len(nums)


@lru_cache(maxsize=64)
def fit_length_constants(m: TuringMachine, mode: str = DEFAULT_MODE) -> LengthConstants:
    """K and C with every section and the closing pair shorter than K*f+C.

    Each template is instantiated once with placeholder numerals.  Its length
    is F + (sum of numeral lengths) with F fixed; every numeral in a real
    section is at most f+1 and so has at most f+1 digits, giving
    length <= F + N(f+1) <= Kf + (F + K) < Kf + C.
    """
    theory = tableau(m, "")
    profiles = [numeral_profile([cell_formula(0, 1, x, m.start, 0)]) for x in ("0", "1")]
    profiles.append(numeral_profile([cell_formula(0, 0, LEFT_END, m.start, 1)]))
    profiles.append(numeral_profile(blank_tail_lines(m.start, 1, 3)))
    profiles += [numeral_profile(closing_lines(m, 1, v)) for v in (0, 1)]
    i0, h = 1, 2
    for q in m.states:
        for a in TAPE_SYMBOLS:
            head_sq = TapeSquare(a, q, 1)
            _, _, move = m.delta[(q, a)]
            columns = [h, 5] + ([h + (1 if move == "R" else -1)] if move != "S" else [])
            for c in columns:
                for x in TAPE_SYMBOLS:
                    prior = head_sq if c == h else TapeSquare(x, q, 0)
                    lines, _ = transition_lines(m, theory, i0, h, head_sq, c, prior, mode)
                    profiles.append(numeral_profile(lines))
    K = max(n for _, n in profiles)
    F = max(f for f, _ in profiles)
    return LengthConstants(K, F + K + 1)


# ---------------------------------------------------------------------------
# Shortest proofs over a candidate pool
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FsResult:
    length: Optional[int]
    proof: Optional[FormulaSequence] = None
    tried: int = 0
    reason: str = ""

    @property
    def exhausted(self) -> bool:
        return self.length is None


class FsExhausted(RuntimeError):
    def __init__(self, result: FsResult):
        super().__init__(f"shortest-proof search exhausted after {result.tried} sequences: {result.reason}")
        self.result = result


def _dedupe(pool) -> list[Formula]:
    return list(dict.fromkeys(pool))


def _prefixes(pool: list[Formula], total: int, n: int):
    if n == 0:
        if total == 0:
            yield ()
        return
    for idx, f in enumerate(pool):
        ln = formula_len(f)
        if ln <= total:
            for rest in _prefixes(pool, total - ln, n - 1):
                yield (idx,) + rest


def shortest_proof(
    theory,
    goal: Formula,
    pool,
    max_len: int,
    budget: int,
    max_lines: Optional[int] = None,
    mode: str = DEFAULT_MODE,
) -> FsResult:
    """Least ASCII length of a verified proof of ``goal`` built from pool formulas.

    Candidates are visited in sequence order (total length, then concatenated
    text), so the first proof found is the shortest.  ``budget`` caps the
    number of sequences handed to the kernel; a length bucket that would
    overflow it ends the search as exhausted.
    """
    pool = _dedupe(pool)
    if goal not in pool:
        return FsResult(None, reason="goal is not in the pool")
    goal_len = formula_len(goal)
    lengths = sorted({formula_len(f) for f in pool})
    # ways[total][n]: number of n-formula prefixes of that total length
    ways: dict[int, dict[int, int]] = {0: {0: 1}}
    frontier = [0]
    tried = 0
    while frontier:
        total = heapq.heappop(frontier)
        row = ways.pop(total, None)
        if row is None:
            continue
        if total + goal_len >= max_len:
            break
        bucket_size = sum(row.values())
        if tried + bucket_size > budget:
            return FsResult(None, tried=tried, reason=f"budget of {budget} sequences")
        bucket = []
        for n in row:
            for prefix in _prefixes(pool, total, n):
                seq = tuple(pool[i] for i in prefix) + (goal,)
                bucket.append(("".join("$" + f.text + "$" for f in seq), prefix, seq))
        bucket.sort(key=lambda item: (item[0], item[1]))
        for _, _, seq in bucket:
            tried += 1
            try:
                verify(theory, seq, goal, mode)
            except VerificationError:
                continue
            return FsResult(total + goal_len, FormulaSequence(seq), tried)
        for n, w in row.items():
            if max_lines is not None and n + 2 > max_lines:
                continue
            for ln in lengths:
                nt = total + ln
                if nt + goal_len >= max_len:
                    continue
                # every pool formula of this length contributes
                mult = sum(1 for f in pool if formula_len(f) == ln)
                if nt not in ways:
                    ways[nt] = {}
                    heapq.heappush(frontier, nt)
                ways[nt][n + 1] = ways[nt].get(n + 1, 0) + w * mult
    return FsResult(None, tried=tried, reason=f"no proof shorter than {max_len}")


def brute_force_shortest(theory, goal: Formula, pool, max_lines: int, mode: str = DEFAULT_MODE) -> Optional[int]:
    """Oracle: try every pool sequence of up to ``max_lines`` formulas, no ordering shortcuts."""
    pool = _dedupe(pool)
    best = None
    for n in range(1, max_lines + 1):
        for seq in itertools.product(pool, repeat=n):
            if seq[-1] != goal:
                continue
            try:
                verify(theory, seq, goal, mode)
            except VerificationError:
                continue
            ln = seq_ascii_len(seq)
            if best is None or ln < best:
                best = ln
    return best


def default_pool(m: TuringMachine, s: str, cap: int, mode: str = DEFAULT_MODE) -> list[Formula]:
    """Distinct lines of the special proof, in first-use order."""
    return _dedupe(build_special_proof(m, s, cap, mode).proof)


def fs_exact(
    m: TuringMachine,
    s: str,
    v: int,
    pool,
    max_len: int,
    budget: int = 100_000,
    max_lines: Optional[int] = None,
    mode: str = DEFAULT_MODE,
) -> FsResult:
    return shortest_proof(tableau(m, s), normal_goal(m, v), pool, max_len, budget, max_lines, mode)


def apf(m: TuringMachine, n: int, mode: str = "upper", cap: int = 10_000, budget: int = 100_000, kernel_mode: str = DEFAULT_MODE) -> int:
    """Largest proof length over all inputs of length n (special proofs, or exact search)."""
    if mode not in ("upper", "exact"):
        raise ValueError("apf mode is 'upper' or 'exact'")
    best = 0
    for s in iter_strings(n, n):
        upper = fs_upper(m, s, cap, kernel_mode)
        if mode == "upper":
            value = upper
        else:
            sp = build_special_proof(m, s, cap, kernel_mode)
            res = fs_exact(m, s, sp.value, default_pool(m, s, cap, kernel_mode), upper + 1, budget, mode=kernel_mode)
            if res.exhausted:
                raise FsExhausted(res)
            value = res.length
        best = max(best, value)
    return best
