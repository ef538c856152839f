"""Single-tape Turing machines over {0, 1, blank, left-end}.

Machines are deterministic, validated against the 5-tuple clauses, and
simulated with an explicit step cap so non-halting runs come back as a
verdict rather than hanging the caller.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Optional

from .formula import BLANK, LEFT_END, TAPE_SYMBOLS

MOVES = ("L", "S", "R")


class Rule(NamedTuple):
    state: str
    read: str
    next_state: str
    write: str
    move: str


@dataclass(frozen=True)
class TuringMachine:
    start: str
    halt: str
    rules: tuple[Rule, ...]
    name: str = field(default="", compare=False)
    delta: dict = field(init=False, repr=False, compare=False, hash=False)
    states: tuple[str, ...] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(Rule(*r) for r in self.rules))
        object.__setattr__(self, "delta", {(r.state, r.read): (r.next_state, r.write, r.move) for r in self.rules})
        states = [self.start]
        for r in self.rules:
            for q in (r.state, r.next_state):
                if q not in states:
                    states.append(q)
        if self.halt not in states:
            states.append(self.halt)
        object.__setattr__(self, "states", tuple(states))


def iter_strings(max_len: int, min_len: int = 0) -> Iterator[str]:
    """All bit strings with ``min_len <= len <= max_len`` in string order."""
    for n in range(min_len, max_len + 1):
        for bits in itertools.product("01", repeat=n):
            yield "".join(bits)


def validate_machine(m: TuringMachine) -> list[str]:
    """Every violated clause, as human-readable lines; empty means valid."""
    problems = []
    seen = set()
    for r in m.rules:
        key = (r.state, r.read)
        if key in seen:
            problems.append(f"duplicate rule for {key}")
        seen.add(key)
        if r.read not in TAPE_SYMBOLS or r.write not in TAPE_SYMBOLS:
            problems.append(f"rule {key}: symbol outside the tape alphabet")
        if r.move not in MOVES:
            problems.append(f"rule {key}: move must be one of L, S, R")
    for q in m.states:
        for a in TAPE_SYMBOLS:
            if (q, a) not in m.delta:
                problems.append(f"delta is not total: missing ({q}, {a})")
    for (q, a), (p, b, move) in m.delta.items():
        if q == m.halt:
            continue
        if a == LEFT_END and (b != LEFT_END or move != "R"):
            problems.append(f"clause 1: delta({q}, >) must keep > and move R")
        if a != LEFT_END and b == LEFT_END:
            problems.append(f"clause 2: delta({q}, {a}) writes the left-end marker")
    for a in TAPE_SYMBOLS:
        if m.delta.get((m.halt, a)) != (m.halt, a, "S"):
            problems.append(f"halt clause: delta({m.halt}, {a}) must be ({m.halt}, {a}, S)")
    for q in m.states:
        if q != m.halt and all(m.delta.get((q, a)) == (m.halt, a, "S") for a in TAPE_SYMBOLS):
            problems.append(f"halt uniqueness: {q} behaves exactly like {m.halt}")
    return problems


class MachineError(ValueError):
    pass


def check_machine(m: TuringMachine) -> TuringMachine:
    problems = validate_machine(m)
    if problems:
        raise MachineError("; ".join(problems))
    return m


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


@dataclass
class Configuration:
    tape: list[str]
    head: int
    state: str
    step: int = 0

    def read(self) -> str:
        return self.tape[self.head] if self.head < len(self.tape) else BLANK

    def symbol_at(self, col: int) -> str:
        return self.tape[col] if col < len(self.tape) else BLANK


def initial_configuration(m: TuringMachine, s: str) -> Configuration:
    if any(c not in "01" for c in s):
        raise ValueError(f"input must be a bit string: {s!r}")
    return Configuration([LEFT_END, *s], 0, m.start)


def step(m: TuringMachine, conf: Configuration) -> None:
    p, b, move = m.delta[(conf.state, conf.read())]
    while conf.head >= len(conf.tape):
        conf.tape.append(BLANK)
    conf.tape[conf.head] = b
    if move == "R":
        conf.head += 1
    elif move == "L":
        if conf.head == 0:
            raise MachineError("head moved left of the left-end marker")
        conf.head -= 1
    conf.state = p
    conf.step += 1


class TapeSquare(NamedTuple):
    symbol: str
    state: str
    flag: int


@dataclass(frozen=True)
class ComputationTable:
    rows: tuple[tuple[TapeSquare, ...], ...]

    @property
    def size(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij) -> TapeSquare:
        i, j = ij
        return self.rows[i][j]

    def head(self, i: int) -> int:
        return next(j for j, sq in enumerate(self.rows[i]) if sq.flag == 1)


@dataclass(frozen=True)
class RunResult:
    verdict: str  # "halted", "malformed" (halted without a bit under the head at column 1) or "cap"
    steps: int
    value: Optional[int] = None
    max_head: int = 0
    table: Optional[ComputationTable] = None

    @property
    def halted(self) -> bool:
        return self.verdict == "halted"


def run(m: TuringMachine, s: str, cap: int, with_table: bool = False) -> RunResult:
    conf = initial_configuration(m, s)
    history = [_snapshot(conf)] if with_table else None
    max_head = 0
    while conf.state != m.halt:
        if conf.step >= cap:
            return RunResult("cap", conf.step, None, max_head)
        step(m, conf)
        max_head = max(max_head, conf.head)
        if history is not None:
            history.append(_snapshot(conf))
    sym = conf.read()
    if conf.head == 1 and sym in "01":
        verdict, value = "halted", int(sym)
    else:
        verdict, value = "malformed", None
    table = _make_table(m, history) if history is not None else None
    return RunResult(verdict, conf.step, value, max_head, table)


def _snapshot(conf: Configuration) -> tuple[tuple[str, ...], int, str]:
    return tuple(conf.tape), conf.head, conf.state


def _make_table(m: TuringMachine, history) -> ComputationTable:
    f = len(history) - 1
    width = f + 2
    tape, head, state = history[-1]
    # the extra last row is one more halting step, which leaves the tape unchanged
    history = history + [(tape, head, state)]
    rows = []
    for tape, head, state in history:
        row = tuple(
            TapeSquare(tape[c] if c < len(tape) else BLANK, state, 1 if c == head else 0)
            for c in range(width)
        )
        rows.append(row)
    return ComputationTable(tuple(rows))


def build_table(m: TuringMachine, s: str, cap: int) -> ComputationTable:
    """The (f+2) x (f+2) window of the computation, f being the halting step count."""
    result = run(m, s, cap, with_table=True)
    if result.verdict == "cap":
        raise MachineError(f"run on {s!r} exceeded the step cap {cap}")
    return result.table


def check_table(m: TuringMachine, table: ComputationTable) -> list[str]:
    """Invariant violations of a computation table, replaying delta row to row."""
    problems = []
    width = len(table.rows[0])
    for i, row in enumerate(table.rows):
        if sum(sq.flag for sq in row) != 1:
            problems.append(f"row {i}: not exactly one head")
        if row[0].symbol != LEFT_END:
            problems.append(f"row {i}: column 0 is not the left-end marker")
    for i in range(len(table.rows) - 1):
        h = table.head(i)
        q, a = table[i, h].state, table[i, h].symbol
        p, b, move = m.delta[(q, a)]
        new_head = h + {"L": -1, "S": 0, "R": 1}[move]
        for c in range(width):
            if c == h:
                want = TapeSquare(b, p, 1 if move == "S" else 0)
            elif c == new_head:
                want = TapeSquare(table[i, c].symbol, p, 1)
            else:
                want = TapeSquare(table[i, c].symbol, p, 0)
            if table[i + 1, c] != want:
                problems.append(f"row {i + 1}, column {c}: expected {want}, found {table[i + 1, c]}")
    return problems


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


class StepCapExceeded(MachineError):
    def __init__(self, s: str, cap: int):
        super().__init__(f"input {s!r} exceeded the step cap {cap}")
        self.input = s
        self.cap = cap


def time_profile(m: TuringMachine, n: int, cap: int) -> int:
    """Maximum number of steps over all 2**n inputs of length n."""
    worst = 0
    for s in iter_strings(n, n):
        r = run(m, s, cap)
        if r.verdict == "cap":
            raise StepCapExceeded(s, cap)
        worst = max(worst, r.steps)
    return worst


@dataclass(frozen=True)
class PrefixStability:
    certified: bool
    K: int
    witness: Optional[str] = None


def prefix_stability(m: TuringMachine, K: int, cap: int) -> PrefixStability:
    """Certificate iff no input of length K lets the head reach column K+1.

    A certificate means outputs on inputs of length >= K depend only on the
    first K bits.  A refutation carries the first offending input in string order.
    """
    for s in iter_strings(K, K):
        r = run(m, s, cap)
        if r.verdict == "cap":
            raise StepCapExceeded(s, cap)
        if r.max_head >= K + 1:
            return PrefixStability(False, K, s)
    return PrefixStability(True, K)


def stability_threshold(m: TuringMachine, max_K: int, cap: int) -> Optional[int]:
    """Least K <= max_K carrying a prefix-stability certificate, if any."""
    for K in range(max_K + 1):
        if prefix_stability(m, K, cap).certified:
            return K
    return None


@dataclass(frozen=True)
class AllOnes:
    ok: bool
    counterexample: Optional[str] = None
    tested: int = 0


def exhaustive_all_ones(m: TuringMachine, K: int, cap: int) -> AllOnes:
    tested = 0
    for s in iter_strings(K):
        r = run(m, s, cap)
        tested += 1
        if r.verdict == "cap":
            raise StepCapExceeded(s, cap)
        if r.value != 1:
            return AllOnes(False, s, tested)
    return AllOnes(True, None, tested)


# ---------------------------------------------------------------------------
# Machine files
# ---------------------------------------------------------------------------


def parse_machine(text: str, name: str = "") -> TuringMachine:
    """Read the ``start:``/``halt:`` header plus ``q a -> p b M`` rule lines."""
    start = halt = None
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("start:"):
            start = line.split(":", 1)[1].strip()
            continue
        if line.startswith("halt:"):
            halt = line.split(":", 1)[1].strip()
            continue
        parts = line.split()
        if len(parts) != 6 or parts[2] != "->":
            raise MachineError(f"line {lineno}: expected '<state> <sym> -> <state> <sym> <L|S|R>'")
        q, a, _, p, b, move = parts
        rules.append(Rule(q, a, p, b, move))
    if start is None or halt is None:
        raise MachineError("machine file needs 'start:' and 'halt:' headers")
    return TuringMachine(start, halt, tuple(rules), name=name)


def format_machine(m: TuringMachine) -> str:
    lines = [f"start: {m.start}", f"halt: {m.halt}"]
    lines += [f"{r.state} {r.read} -> {r.next_state} {r.write} {r.move}" for r in m.rules]
    return "\n".join(lines) + "\n"


def load_machine(path) -> TuringMachine:
    path = Path(path)
    return parse_machine(path.read_text(encoding="ascii"), name=path.stem)
