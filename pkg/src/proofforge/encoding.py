"""Tableau theories: the ordered formula sequence def_M + input_s, and membership.

Membership (AL) scans the theory in order and counts one unit per formula
equality test.  The fast path reaches the same answers by position
arithmetic, so its cost does not grow with the input length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .formula import (
    BLANK,
    LEFT_END,
    TAPE_SYMBOLS,
    Cmp,
    Exists,
    Forall,
    Formula,
    FormulaSequence,
    Imp,
    Num,
    Proj,
    Square,
    Triple,
    Var,
    conj,
    disj,
    forall_many,
    plus,
)
from .machine import TuringMachine

i_, j_, k_ = Var("i"), Var("j"), Var("k")


def square(row, col) -> Square:
    return Square(row if not isinstance(row, int) else Num(row), col if not isinstance(col, int) else Num(col))


def cell_formula(row: int, col: int, symbol: str, state: str, flag: int) -> Cmp:
    """``t_{row,col}=(symbol,state,flag)``"""
    return Cmp(square(row, col), "=", Triple(symbol, state, flag))


def transition_formula(q: str, a: str, p: str, b: str, move: str) -> Formula:
    """The universally quantified reading of one transition rule."""
    guard = Cmp(Square(i_, j_), "=", Triple(a, q, 1))
    nxt = plus(i_, 1)
    frame_value = Cmp(Square(nxt, k_), "=", Triple(Proj(Square(i_, k_)), p, 0))
    if move == "S":
        written = Cmp(Square(nxt, j_), "=", Triple(b, p, 1))
        frame = Forall("k", Imp(Cmp(k_, "!=", j_), frame_value))
        body = conj([written, frame])
    else:
        d = 1 if move == "R" else -1
        moved = plus(j_, d)
        written = Cmp(Square(nxt, j_), "=", Triple(b, p, 0))
        arrived = Cmp(Square(nxt, moved), "=", Triple(Proj(Square(i_, moved)), p, 1))
        frame = Forall("k", Imp(conj([Cmp(k_, "!=", j_), Cmp(k_, "!=", moved)]), frame_value))
        body = conj([written, arrived, frame])
    return forall_many(["i", "j"], Imp(guard, body))


def _squares_with_flag(term, states, flag: int) -> Formula:
    return disj([Cmp(term, "=", Triple(a, q, flag)) for q in states for a in TAPE_SYMBOLS])


@lru_cache(maxsize=None)
def build_def_m(m: TuringMachine) -> FormulaSequence:
    """Left-end formula, unique-head formula, one formula per (q, a), blank-tail existence."""
    items: list[Formula] = []
    left = disj([Cmp(Square(i_, Num(0)), "=", Triple(LEFT_END, q, fl)) for q in m.states for fl in (0, 1)])
    items.append(Forall("i", left))
    reading = _squares_with_flag(Square(i_, k_), m.states, 1)
    idle = Forall("j", Imp(Cmp(j_, "!=", k_), _squares_with_flag(Square(i_, j_), m.states, 0)))
    items.append(Forall("i", Exists("k", conj([reading, idle]))))
    for q in m.states:
        for a in TAPE_SYMBOLS:
            p, b, move = m.delta[(q, a)]
            items.append(transition_formula(q, a, p, b, move))
    blank0 = Triple(BLANK, m.start, 0)
    row0 = Square(Num(0), j_)
    before = Forall("j", Imp(Cmp(j_, "<", Var("m")), Cmp(row0, "!=", blank0)))
    after = Forall("j", Imp(Cmp(j_, ">=", Var("m")), Cmp(row0, "=", blank0)))
    items.append(Exists("m", conj([before, after])))
    return FormulaSequence(tuple(items))


def blank_tail_formula(start: str, length: int) -> Formula:
    """``\\forall j(j>L\\to t_{0,j}=(_,q0,0))`` with L the input length."""
    return Forall("j", Imp(Cmp(j_, ">", Num(length)), Cmp(Square(Num(0), j_), "=", Triple(BLANK, start, 0))))


def build_input(s: str, start: str = "q0") -> FormulaSequence:
    items: list[Formula] = [blank_tail_formula(start, len(s)), cell_formula(0, 0, LEFT_END, start, 1)]
    items += [cell_formula(0, b, bit, start, 0) for b, bit in enumerate(s, 1)]
    return FormulaSequence(tuple(items))


@lru_cache(maxsize=64)
def _def_index(m: TuringMachine) -> dict:
    index: dict = {}
    for pos, f in enumerate(build_def_m(m)):
        index.setdefault(f, pos)
    return index


@dataclass(frozen=True)
class MembershipCost:
    comparisons: int


@dataclass(frozen=True)
class TableauTheory:
    machine: TuringMachine
    input: str
    def_part: FormulaSequence = field(init=False, repr=False)
    input_part: FormulaSequence = field(init=False, repr=False)
    combined: FormulaSequence = field(init=False, repr=False)

    def __post_init__(self):
        d = build_def_m(self.machine)
        inp = build_input(self.input, self.machine.start)
        object.__setattr__(self, "def_part", d)
        object.__setattr__(self, "input_part", inp)
        object.__setattr__(self, "combined", d + inp)

    @property
    def k(self) -> int:
        """Index of the last def_M formula."""
        return len(self.def_part) - 1

    def member(self, f: Formula) -> tuple[bool, int]:
        """Fast-path membership as (answer, comparisons)."""
        ok, cost = al_member(f, self, fast=True)
        return ok, cost.comparisons


def tableau(m: TuringMachine, s: str) -> TableauTheory:
    return TableauTheory(m, s)


@dataclass(frozen=True)
class ExplicitTheory:
    """A finite theory given as a formula sequence, searched by plain scanning."""

    formulas: FormulaSequence

    def member(self, f: Formula) -> tuple[bool, int]:
        for pos, g in enumerate(self.formulas):
            if g == f:
                return True, pos + 1
        return False, len(self.formulas)


def _header_length(f: Formula, start: str) -> Optional[int]:
    if not (isinstance(f, Forall) and isinstance(f.body, Imp)):
        return None
    guard, value = f.body.left, f.body.right
    if not (isinstance(guard, Cmp) and guard.rel == ">" and guard.lhs == Var(f.var) and isinstance(guard.rhs, Num)):
        return None
    if f != blank_tail_formula(start, guard.rhs.value) or f.var != "j":
        return None
    return guard.rhs.value


def _atom_column(f: Formula) -> Optional[int]:
    if isinstance(f, Cmp) and f.rel == "=" and isinstance(f.lhs, Square) and isinstance(f.rhs, Triple):
        row, col = f.lhs.row, f.lhs.col
        if isinstance(row, Num) and row.value == 0 and isinstance(col, Num):
            return col.value
    return None


def input_column(f: Formula, start: str) -> Optional[int]:
    """Tape column an input-shaped formula constrains (the header constrains L+1), else None."""
    col = _atom_column(f)
    if col is not None:
        return col
    length = _header_length(f, start)
    return None if length is None else length + 1


@lru_cache(maxsize=65536)
def _input_shape(f: Formula, start: str) -> Optional[tuple[str, int]]:
    # depends only on the formula, so replaying a checker over many theories reuses it
    col = _atom_column(f)
    if col is not None:
        return "atom", col
    length = _header_length(f, start)
    return None if length is None else ("header", length)


def input_slot(f: Formula, theory: TableauTheory) -> Optional[tuple[str, Optional[int]]]:
    """("atom"|"header", index in combined or None) for input-shaped formulas, else None."""
    shape = _input_shape(f, theory.machine.start)
    if shape is None:
        return None
    k = len(theory.def_part) - 1
    kind, col = shape
    if kind == "header":
        return "header", k + 1
    if col == 0:
        return "atom", k + 2
    if col <= len(theory.input):
        return "atom", k + 2 + col
    return "atom", None


def al_member(f: Formula, theory: TableauTheory, fast: bool = False) -> tuple[bool, MembershipCost]:
    """Decide ``f`` in the theory.  The literal path is the in-order scan."""
    if not fast:
        for pos, g in enumerate(theory.combined):
            if g == f:
                return True, MembershipCost(pos + 1)
        return False, MembershipCost(len(theory.combined))
    slot = input_slot(f, theory)
    if slot is not None:
        _, pos = slot
        if pos is None:
            return False, MembershipCost(0)
        return theory.combined[pos] == f, MembershipCost(1)
    pos = _def_index(theory.machine).get(f)
    if pos is None:
        return False, MembershipCost(len(theory.def_part))
    return True, MembershipCost(pos + 1)


def fast_cost_bound(f: Formula, theory: TableauTheory) -> int:
    """Largest fast-path cost ``f`` can incur against any theory of the same machine."""
    if input_slot(f, theory) is not None:
        return 1
    pos = _def_index(theory.machine).get(f)
    return len(theory.def_part) if pos is None else pos + 1
