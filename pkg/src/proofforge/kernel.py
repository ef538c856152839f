"""The trusted proof checker.

A line of a proof is justified by theory membership (In), a logical axiom
(Lambda), a true ground fact (Zfc), modus ponens (Mp) or generalization (Gen),
tried in that order.  Mp and Gen search their premise indices in ascending
order, which makes the proof type of a verified proof a function of the proof.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Protocol, Sequence

from .formula import (
    TOP,
    And,
    Binary,
    Cmp,
    Exists,
    Forall,
    Formula,
    FormulaSequence,
    Imp,
    Not,
    Num,
    Offset,
    Or,
    Proj,
    Quant,
    Square,
    Term,
    Top,
    Triple,
    Var,
    conj,
    conjuncts,
    free_vars,
    plus,
    subst,
    substitutable,
)

MODES = ("paper", "strict")
DEFAULT_MODE = "paper"
MAX_SKELETON_ATOMS = 20


def default_mode() -> str:
    mode = os.environ.get("PROOFFORGE_MODE", DEFAULT_MODE)
    if mode not in MODES:
        raise ValueError(f"PROOFFORGE_MODE must be one of {MODES}, got {mode!r}")
    return mode


class Theory(Protocol):
    def member(self, f: Formula) -> tuple[bool, int]: ...


# ---------------------------------------------------------------------------
# Matching against schema instances
# ---------------------------------------------------------------------------


def _match_term(p: Term, t: Term, xs: frozenset, env: dict) -> bool:
    if isinstance(p, Var) and p.name in xs:
        bound = env.get(p.name)
        if bound is None:
            env[p.name] = t
            return True
        return bound == t
    if isinstance(p, Offset) and isinstance(p.base, Var) and p.base.name in xs:
        if isinstance(t, Num):
            if t.value - p.delta < 0:
                return False
            return _match_term(p.base, Num(t.value - p.delta), xs, env)
        if isinstance(t, Offset) and t.delta == p.delta:
            return _match_term(p.base, t.base, xs, env)
        return _match_term(p.base, plus(t, -p.delta), xs, env)
    if type(p) is not type(t):
        return False
    if isinstance(p, (Var, Num)):
        return p == t
    if isinstance(p, Offset):
        return p.delta == t.delta and _match_term(p.base, t.base, xs, env)
    if isinstance(p, Square):
        return _match_term(p.row, t.row, xs, env) and _match_term(p.col, t.col, xs, env)
    if isinstance(p, Proj):
        return _match_term(p.inner, t.inner, xs, env)
    if isinstance(p, Triple):
        if p.state != t.state or p.flag != t.flag:
            return False
        if isinstance(p.symbol, str) or isinstance(t.symbol, str):
            return p.symbol == t.symbol
        return _match_term(p.symbol, t.symbol, xs, env)
    return False


def _match(p: Formula, f: Formula, xs: frozenset, env: dict) -> bool:
    """Extend ``env`` so that ``p`` with ``xs`` replaced may equal ``f``.

    The match is only a candidate generator; callers confirm by substituting.
    """
    if not xs:
        return p == f
    if type(p) is not type(f):
        return False
    if isinstance(p, Cmp):
        return p.rel == f.rel and _match_term(p.lhs, f.lhs, xs, env) and _match_term(p.rhs, f.rhs, xs, env)
    if isinstance(p, Top):
        return True
    if isinstance(p, Not):
        return _match(p.body, f.body, xs, env)
    if isinstance(p, Binary):
        return _match(p.left, f.left, xs, env) and _match(p.right, f.right, xs, env)
    if isinstance(p, Quant):
        return p.var == f.var and _match(p.body, f.body, xs - {p.var}, env)
    return False


def _instance_of(body: Formula, names: Sequence[str], target: Formula) -> bool:
    """Is ``target`` equal to ``body`` with each of ``names`` replaced by some substitutable term?"""
    env: dict = {}
    if not _match(body, target, frozenset(names), env):
        return False
    for name, term in env.items():
        if not substitutable(term, name, body):
            return False
    return subst(body, env) == target


def _forall_prefix(f: Formula) -> tuple[list[str], Formula]:
    names = []
    while isinstance(f, Forall):
        names.append(f.var)
        f = f.body
    return names, f


# ---------------------------------------------------------------------------
# Logical axioms
# ---------------------------------------------------------------------------


class SkeletonTooLarge(ValueError):
    def __init__(self, atoms: int):
        super().__init__(f"skeleton too large: {atoms} atoms exceed the limit of {MAX_SKELETON_ATOMS}")
        self.atoms = atoms


def _skeleton_atoms(f: Formula, atoms: dict) -> None:
    if isinstance(f, (Cmp, Quant)):
        atoms.setdefault(f, len(atoms))
    elif isinstance(f, Not):
        _skeleton_atoms(f.body, atoms)
    elif isinstance(f, Binary):
        _skeleton_atoms(f.left, atoms)
        _skeleton_atoms(f.right, atoms)


def _evaluate(f: Formula, atoms: dict, values: Sequence[bool]) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Not):
        return not _evaluate(f.body, atoms, values)
    if isinstance(f, And):
        return _evaluate(f.left, atoms, values) and _evaluate(f.right, atoms, values)
    if isinstance(f, Or):
        return _evaluate(f.left, atoms, values) or _evaluate(f.right, atoms, values)
    if isinstance(f, Imp):
        return (not _evaluate(f.left, atoms, values)) or _evaluate(f.right, atoms, values)
    return values[atoms[f]]


@lru_cache(maxsize=65536)
def is_tautology(f: Formula) -> bool:
    """Truth-table check of the propositional skeleton.

    Raises SkeletonTooLarge beyond MAX_SKELETON_ATOMS distinct atoms.
    """
    if isinstance(f, (Cmp, Quant)):
        return False
    atoms: dict = {}
    _skeleton_atoms(f, atoms)
    if len(atoms) > MAX_SKELETON_ATOMS:
        raise SkeletonTooLarge(len(atoms))
    return all(_evaluate(f, atoms, values) for values in itertools.product((False, True), repeat=len(atoms)))


def _group2(f: Formula, iterated: bool) -> bool:
    if not (isinstance(f, Imp) and isinstance(f.left, Forall)):
        return False
    names, _ = _forall_prefix(f.left)
    depths = range(1, len(names) + 1) if iterated else (1,)
    for depth in depths:
        body = f.left
        for _ in range(depth):
            body = body.body
        if _instance_of(body, names[:depth], f.right):
            return True
    return False


def _group3(f: Formula) -> bool:
    # \forall x(a\to b)\to(\forall x a\to\forall x b)
    if not (isinstance(f, Imp) and isinstance(f.left, Forall) and isinstance(f.left.body, Imp)):
        return False
    x, a, b = f.left.var, f.left.body.left, f.left.body.right
    return f.right == Imp(Forall(x, a), Forall(x, b))


def _group4(f: Formula) -> bool:
    return (
        isinstance(f, Imp)
        and isinstance(f.right, Forall)
        and f.right.body == f.left
        and f.right.var not in free_vars(f.left)
    )


def _group5(f: Formula) -> bool:
    return isinstance(f, Cmp) and f.rel == "=" and isinstance(f.lhs, Var) and f.lhs == f.rhs


def _term_variants(t: Term, s: Term, u: Term) -> set:
    """Every term obtained from ``t`` by replacing some occurrences of ``s`` with ``u``."""
    if isinstance(t, (Var, Num)):
        out = {t}
    elif isinstance(t, Offset):
        out = {plus(b, t.delta) for b in _term_variants(t.base, s, u)}
    elif isinstance(t, Square):
        out = {Square(r, c) for r in _term_variants(t.row, s, u) for c in _term_variants(t.col, s, u)}
    elif isinstance(t, Proj):
        out = {Proj(x) for x in _term_variants(t.inner, s, u)}
    elif isinstance(t, Triple):
        if isinstance(t.symbol, str):
            out = {t}
        else:
            out = {Triple(x, t.state, t.flag) for x in _term_variants(t.symbol, s, u)}
    else:
        raise TypeError(t)
    if t == s:
        out.add(u)
    return out


def _group6(f: Formula) -> bool:
    # s=u\to(a\to a') with a atomic and a' a replacement instance of a
    if not (isinstance(f, Imp) and isinstance(f.left, Cmp) and f.left.rel == "=" and isinstance(f.right, Imp)):
        return False
    s, u = f.left.lhs, f.left.rhs
    a, a2 = f.right.left, f.right.right
    if not (isinstance(a, Cmp) and isinstance(a2, Cmp) and a.rel == a2.rel):
        return False
    if a2.lhs not in _term_variants(a.lhs, s, u):
        return False
    return a2.rhs in _term_variants(a.rhs, s, u)


def _group7(f: Formula) -> bool:
    if not (isinstance(f, Imp) and isinstance(f.right, Exists)):
        return False
    return _instance_of(f.right.body, [f.right.var], f.left)


def _conjunct_weakening(f: Formula) -> bool:
    # \forall xs(A\to B_1\wedge...\wedge B_m)\to\forall xs(A\to B_i)
    if not isinstance(f, Imp):
        return False
    left_names, left = _forall_prefix(f.left)
    right_names, right = _forall_prefix(f.right)
    if left_names != right_names or not (isinstance(left, Imp) and isinstance(right, Imp)):
        return False
    if left.left != right.left:
        return False
    return right.right in conjuncts(left.right)


@lru_cache(maxsize=65536)
def _lambda_group(f: Formula, mode: str) -> Optional[str]:
    if _group5(f):
        return "5"
    if _group2(f, iterated=False):
        return "2"
    if _group3(f):
        return "3"
    if _group4(f):
        return "4"
    if _group6(f):
        return "6"
    if _group7(f):
        return "7"
    if mode == "paper":
        if _group2(f, iterated=True):
            return "2'"
        if _conjunct_weakening(f):
            return "1'"
    if is_tautology(f):
        return "1"
    return None


def lambda_group(f: Formula, mode: str = DEFAULT_MODE) -> Optional[str]:
    """Name of the axiom group ``f`` belongs to, or None."""
    if mode not in MODES:
        raise ValueError(f"unknown kernel mode {mode!r}")
    return _lambda_group(f, mode)


def check_lambda(f: Formula, mode: str = DEFAULT_MODE) -> bool:
    return lambda_group(f, mode) is not None


# ---------------------------------------------------------------------------
# Ground facts
# ---------------------------------------------------------------------------

_NUMERIC = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _ground_value(f: Formula) -> Optional[bool]:
    if isinstance(f, Top):
        return True
    if isinstance(f, Cmp):
        if isinstance(f.lhs, Num) and isinstance(f.rhs, Num):
            return _NUMERIC[f.rel](f.lhs.value, f.rhs.value)
        literal = (
            isinstance(f.lhs, Triple)
            and isinstance(f.rhs, Triple)
            and isinstance(f.lhs.symbol, str)
            and isinstance(f.rhs.symbol, str)
        )
        if literal and f.rel in ("=", "!="):
            return (f.lhs == f.rhs) == (f.rel == "=")
        return None
    if isinstance(f, Not):
        v = _ground_value(f.body)
        return None if v is None else not v
    if isinstance(f, Binary):
        a, b = _ground_value(f.left), _ground_value(f.right)
        if a is None or b is None:
            return None
        if isinstance(f, And):
            return a and b
        if isinstance(f, Or):
            return a or b
        return (not a) or b
    return None


def check_zfc(f: Formula) -> bool:
    """True ground facts: numeral comparisons and literal triple (in)equalities, under connectives."""
    return _ground_value(f) is True


# ---------------------------------------------------------------------------
# Proof types and verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckerStep:
    kind: str  # "In", "Lambda", "Zfc", "Mp", "Gen"
    j: Optional[int] = None
    k: Optional[int] = None
    var: Optional[str] = None

    def __str__(self):
        if self.kind == "Mp":
            return f"MP {self.j} {self.k}"
        if self.kind == "Gen":
            return f"GEN {self.j} {self.var}"
        return self.kind.upper()


IN = CheckerStep("In")
LAMBDA = CheckerStep("Lambda")
ZFC = CheckerStep("Zfc")


@dataclass(frozen=True)
class ProofType:
    steps: tuple[CheckerStep, ...] = ()

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, i):
        return self.steps[i]

    def __bool__(self):
        return bool(self.steps)

    def kinds(self) -> list[str]:
        return [s.kind for s in self.steps]


EMPTY_TYPE = ProofType()


def same_type(g1: ProofType, g2: ProofType) -> bool:
    return g1.steps == g2.steps


class VerificationError(Exception):
    def __init__(self, index: int, reason: str):
        super().__init__(f"line {index}: {reason}")
        self.index = index
        self.reason = reason


class _Index:
    """Premise lookup tables over the lines seen so far."""

    def __init__(self):
        self.first: dict = {}
        self.by_consequent: dict = {}

    def add(self, i: int, f: Formula) -> None:
        self.first.setdefault(f, i)
        if isinstance(f, Imp):
            self.by_consequent.setdefault(f.right, []).append(i)

    def modus_ponens(self, f: Formula, proof: Sequence[Formula]) -> Optional[CheckerStep]:
        for j in self.by_consequent.get(f, ()):
            k = self.first.get(proof[j].left)
            if k is not None:
                return CheckerStep("Mp", j, k)
        return None

    def generalization(self, f: Formula) -> Optional[CheckerStep]:
        if isinstance(f, Forall):
            j = self.first.get(f.body)
            if j is not None:
                return CheckerStep("Gen", j, var=f.var)
        return None


def _justify(theory: Theory, f: Formula, index: _Index, proof, mode: str) -> tuple[Optional[CheckerStep], str]:
    if theory.member(f)[0]:
        return IN, ""
    reason = "not in the theory, not an axiom, not a ground fact, and no premises"
    try:
        if lambda_group(f, mode) is not None:
            return LAMBDA, ""
    except SkeletonTooLarge as exc:
        reason = str(exc)
    if check_zfc(f):
        return ZFC, ""
    step = index.modus_ponens(f, proof) or index.generalization(f)
    return step, reason


def verify(theory: Theory, proof: Iterable[Formula], goal: Optional[Formula] = None, mode: str = DEFAULT_MODE) -> ProofType:
    """Justify every line; raise VerificationError at the first line that cannot be."""
    proof = tuple(proof)
    if not proof:
        raise VerificationError(0, "empty proof")
    index = _Index()
    steps = []
    for i, f in enumerate(proof):
        step, reason = _justify(theory, f, index, proof, mode)
        if step is None:
            raise VerificationError(i, reason)
        steps.append(step)
        index.add(i, f)
    if goal is not None and proof[-1] != goal:
        raise VerificationError(len(proof) - 1, f"last line is not the goal {goal.text}")
    return ProofType(tuple(steps))


def prooftype(theory: Theory, proof: Iterable[Formula], goal: Optional[Formula] = None, mode: str = DEFAULT_MODE) -> ProofType:
    """The proof type, or the empty type when verification fails."""
    try:
        return verify(theory, proof, goal, mode)
    except VerificationError:
        return EMPTY_TYPE


def _check_structural(proof: Sequence[Formula], i: int, step: CheckerStep, mode: str) -> Optional[str]:
    f = proof[i]
    if step.kind == "Lambda":
        try:
            return None if check_lambda(f, mode) else "not a logical axiom"
        except SkeletonTooLarge as exc:
            return str(exc)
    if step.kind == "Zfc":
        return None if check_zfc(f) else "not a true ground fact"
    if step.kind == "Mp":
        if not (step.j is not None and step.k is not None and 0 <= step.j < i and 0 <= step.k < i):
            return "modus ponens premises must precede the line"
        if proof[step.j] != Imp(proof[step.k], f):
            return f"line {step.j} is not line {step.k} implying this line"
        return None
    if step.kind == "Gen":
        if step.j is None or not 0 <= step.j < i:
            return "generalization premise must precede the line"
        if f != Forall(step.var, proof[step.j]):
            return f"not the generalization of line {step.j} over {step.var}"
        return None
    return f"unknown justification {step.kind}"


def check_justifications(
    theory: Theory,
    proof: Sequence[Formula],
    steps: Sequence[CheckerStep],
    goal: Optional[Formula] = None,
    mode: str = DEFAULT_MODE,
) -> None:
    """Re-check stored justifications as given; raise VerificationError on the first bad one."""
    if len(steps) != len(proof) or not proof:
        raise VerificationError(0, "justification count does not match the proof")
    for i, step in enumerate(steps):
        if step.kind == "In":
            problem = None if theory.member(proof[i])[0] else "not a member of the theory"
        else:
            problem = _check_structural(proof, i, step, mode)
        if problem:
            raise VerificationError(i, problem)
    if goal is not None and proof[-1] != goal:
        raise VerificationError(len(proof) - 1, f"last line is not the goal {goal.text}")


# ---------------------------------------------------------------------------
# Adjoint checkers and key information
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KeyInfo:
    keyset: tuple[Formula, ...]
    keyinfo: Formula


def key_info(proof: Iterable[Formula], theory) -> KeyInfo:
    """Proof lines that are input formulas of the theory, in theory order."""
    lines = set(proof)
    keyset = tuple(f for f in dict.fromkeys(theory.input_part) if f in lines)
    return KeyInfo(keyset, conj(list(keyset)) if keyset else TOP)


@dataclass(frozen=True)
class AdjointChecker:
    """Replays a fixed proof type against any theory; accepts when every In line is a member."""

    proof: FormulaSequence
    type: ProofType
    mode: str = DEFAULT_MODE
    keyset: tuple[Formula, ...] = field(default=(), compare=False)
    witness: Optional[str] = field(default=None, compare=False)
    _structural: list = field(default_factory=list, init=False, repr=False, compare=False, hash=False)

    def structurally_valid(self) -> bool:
        # non-In steps never consult the theory, so they are checked once
        if not self._structural:
            ok = bool(self.type) and len(self.type) == len(self.proof) and all(
                step.kind == "In" or _check_structural(self.proof, i, step, self.mode) is None
                for i, step in enumerate(self.type)
            )
            self._structural.append(ok)
        return self._structural[0]

    @property
    def in_lines(self) -> list[int]:
        return [i for i, step in enumerate(self.type) if step.kind == "In"]


def make_checker(theory, proof: Iterable[Formula], goal: Optional[Formula] = None, mode: str = DEFAULT_MODE, witness: Optional[str] = None) -> AdjointChecker:
    proof = FormulaSequence(tuple(proof))
    ptype = verify(theory, proof, goal, mode)
    return AdjointChecker(proof, ptype, mode, key_info(proof, theory).keyset, witness)


def replay(ck: AdjointChecker, theory: Theory) -> tuple[int, int]:
    """(verdict, comparisons).  Every In line is looked up; no short-circuit, so the cost is fixed."""
    ok = ck.structurally_valid()
    comparisons = 0
    for i in ck.in_lines:
        member, cost = theory.member(ck.proof[i])
        comparisons += cost
        ok = ok and member
    return int(ok), comparisons


def adjoint_check(ck: AdjointChecker, theory: Theory) -> int:
    return replay(ck, theory)[0]
