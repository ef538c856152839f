"""The tableau first-order language.

Terms and formulas are immutable trees whose canonical text is computed once,
bottom-up, at construction time.  Structural equality and hashing go through
that text, so the canonical rendering doubles as the identity of a node.

Ground arithmetic is folded when terms are built: ``3+1`` is stored as ``4``
and ``\\pi_M((0,q,1))`` inside a triple is stored as ``0``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

BLANK = "_"
LEFT_END = ">"
TAPE_SYMBOLS = ("0", "1", BLANK, LEFT_END)
RELATIONS = ("=", "!=", "<", "<=", ">", ">=")

_CONNECTIVES = {"and": r"\wedge", "or": r"\vee", "imp": r"\to"}


def _join(*parts: str) -> str:
    # a space is emitted only where two alphanumeric runs would otherwise fuse
    out = parts[0]
    for part in parts[1:]:
        if out and part and out[-1].isalnum() and part[0].isalnum():
            out += " "
        out += part
    return out


class Node:
    """Shared equality/hash behaviour: identity is the canonical text."""

    text: str

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Node):
            return NotImplemented
        return isinstance(other, Term) == isinstance(self, Term) and self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def __str__(self):
        return self.text


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


class Term(Node):
    pass


@dataclass(frozen=True, eq=False)
class Var(Term):
    name: str
    text: str = field(init=False, repr=False)

    def __post_init__(self):
        if not re.fullmatch(r"[A-Za-z][0-9]*", self.name):
            raise ValueError(f"bad variable name {self.name!r}")
        object.__setattr__(self, "text", self.name)


@dataclass(frozen=True, eq=False)
class Num(Term):
    value: int
    text: str = field(init=False, repr=False)

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("numerals are non-negative")
        object.__setattr__(self, "text", str(self.value))


@dataclass(frozen=True, eq=False)
class Offset(Term):
    """``base+1`` or ``base-1``; build through :func:`plus` to fold numerals."""

    base: Term
    delta: int
    text: str = field(init=False, repr=False)

    def __post_init__(self):
        if self.delta not in (1, -1):
            raise ValueError("offsets are +1 or -1 only")
        if isinstance(self.base, Offset):
            raise ValueError("nested offsets are not part of the language")
        sign = "+1" if self.delta > 0 else "-1"
        object.__setattr__(self, "text", self.base.text + sign)


@dataclass(frozen=True, eq=False)
class Square(Term):
    row: Term
    col: Term
    text: str = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "text", f"t_{{{self.row.text},{self.col.text}}}")


@dataclass(frozen=True, eq=False)
class Proj(Term):
    """``\\pi_M(inner)``: the tape symbol of a square.  Only valid as a triple's symbol."""

    inner: Term
    text: str = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "text", _join(r"\pi_M(", self.inner.text, ")"))


@dataclass(frozen=True, eq=False)
class Triple(Term):
    symbol: Union[str, Proj]
    state: str
    flag: int
    text: str = field(init=False, repr=False)

    def __post_init__(self):
        sym = self.symbol
        if isinstance(sym, Proj) and isinstance(sym.inner, Triple) and isinstance(sym.inner.symbol, str):
            sym = sym.inner.symbol
            object.__setattr__(self, "symbol", sym)
        if isinstance(sym, str) and sym not in TAPE_SYMBOLS:
            raise ValueError(f"bad tape symbol {sym!r}")
        if self.flag not in (0, 1):
            raise ValueError("triple flag must be 0 or 1")
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", self.state):
            raise ValueError(f"bad state name {self.state!r}")
        sym_text = sym if isinstance(sym, str) else sym.text
        object.__setattr__(self, "text", f"({sym_text},{self.state},{self.flag})")


def plus(base: Term, delta: int) -> Term:
    """``base+delta`` with ground folding (``Num(3)+1`` is ``Num(4)``)."""
    if delta == 0:
        return base
    if isinstance(base, Num) and base.value + delta >= 0:
        return Num(base.value + delta)
    if isinstance(base, Offset):
        return plus(base.base, base.delta + delta)
    return Offset(base, delta)


def is_ground_term(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, Num):
        return True
    if isinstance(t, Offset):
        return is_ground_term(t.base)
    if isinstance(t, Square):
        return is_ground_term(t.row) and is_ground_term(t.col)
    if isinstance(t, Proj):
        return is_ground_term(t.inner)
    if isinstance(t, Triple):
        return isinstance(t.symbol, str) or is_ground_term(t.symbol)
    raise TypeError(t)


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


class Formula(Node):
    pass


@dataclass(frozen=True, eq=False)
class Cmp(Formula):
    lhs: Term
    rel: str
    rhs: Term
    text: str = field(init=False, repr=False)

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"bad relation {self.rel!r}")
        object.__setattr__(self, "text", self.lhs.text + self.rel + self.rhs.text)


@dataclass(frozen=True, eq=False)
class Top(Formula):
    text: str = field(init=False, repr=False, default=r"\top")


@dataclass(frozen=True, eq=False)
class Not(Formula):
    body: Formula
    text: str = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "text", _join(r"\neg", self.body.text))


@dataclass(frozen=True, eq=False)
class Binary(Formula):
    left: Formula
    right: Formula
    text: str = field(init=False, repr=False)

    op = ""

    def __post_init__(self):
        body = _join(self.left.text, _CONNECTIVES[self.op], self.right.text)
        object.__setattr__(self, "text", "(" + body + ")")


@dataclass(frozen=True, eq=False)
class And(Binary):
    op = "and"


@dataclass(frozen=True, eq=False)
class Or(Binary):
    op = "or"


@dataclass(frozen=True, eq=False)
class Imp(Binary):
    op = "imp"


@dataclass(frozen=True, eq=False)
class Quant(Formula):
    var: str
    body: Formula
    text: str = field(init=False, repr=False)

    word = ""

    def __post_init__(self):
        Var(self.var)  # validates the name
        object.__setattr__(self, "text", _join(self.word, self.var, self.body.text))


@dataclass(frozen=True, eq=False)
class Forall(Quant):
    word = r"\forall"


@dataclass(frozen=True, eq=False)
class Exists(Quant):
    word = r"\exists"


TOP = Top()


def conj(items: Sequence[Formula]) -> Formula:
    """Left-folded conjunction; the empty conjunction is ``\\top``."""
    if not items:
        return TOP
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def disj(items: Sequence[Formula]) -> Formula:
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


def conjuncts(f: Formula) -> list[Formula]:
    """Flatten nested conjunctions, left to right."""
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


def forall_many(names: Sequence[str], body: Formula) -> Formula:
    for name in reversed(names):
        body = Forall(name, body)
    return body


# ---------------------------------------------------------------------------
# Variables and substitution
# ---------------------------------------------------------------------------


def term_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Num):
        return set()
    if isinstance(t, Offset):
        return term_vars(t.base)
    if isinstance(t, Square):
        return term_vars(t.row) | term_vars(t.col)
    if isinstance(t, Proj):
        return term_vars(t.inner)
    if isinstance(t, Triple):
        return set() if isinstance(t.symbol, str) else term_vars(t.symbol)
    raise TypeError(t)


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, Cmp):
        return term_vars(f.lhs) | term_vars(f.rhs)
    if isinstance(f, Top):
        return set()
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, Binary):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Quant):
        return free_vars(f.body) - {f.var}
    raise TypeError(f)


def subst_term(t: Term, env: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return env.get(t.name, t)
    if isinstance(t, Num):
        return t
    if isinstance(t, Offset):
        return plus(subst_term(t.base, env), t.delta)
    if isinstance(t, Square):
        return Square(subst_term(t.row, env), subst_term(t.col, env))
    if isinstance(t, Proj):
        return Proj(subst_term(t.inner, env))
    if isinstance(t, Triple):
        if isinstance(t.symbol, str):
            return t
        return Triple(subst_term(t.symbol, env), t.state, t.flag)
    raise TypeError(t)


def subst(f: Formula, env: Mapping[str, Term]) -> Formula:
    """Replace free occurrences of variables; bound occurrences are left alone.

    Capture is not prevented here, see :func:`substitutable`.
    """
    if not env:
        return f
    if isinstance(f, Cmp):
        return Cmp(subst_term(f.lhs, env), f.rel, subst_term(f.rhs, env))
    if isinstance(f, Top):
        return f
    if isinstance(f, Not):
        return Not(subst(f.body, env))
    if isinstance(f, Binary):
        return type(f)(subst(f.left, env), subst(f.right, env))
    if isinstance(f, Quant):
        inner = {k: v for k, v in env.items() if k != f.var}
        return type(f)(f.var, subst(f.body, inner))
    raise TypeError(f)


def substitutable(t: Term, x: str, f: Formula) -> bool:
    """True when no free occurrence of ``x`` in ``f`` sits under a binder of a variable of ``t``."""
    danger = term_vars(t)

    def walk(g: Formula, bound: frozenset) -> bool:
        if isinstance(g, (Cmp, Top)):
            if x in bound:
                return True
            if isinstance(g, Cmp) and x in (term_vars(g.lhs) | term_vars(g.rhs)):
                return not (bound & danger)
            return True
        if isinstance(g, Not):
            return walk(g.body, bound)
        if isinstance(g, Binary):
            return walk(g.left, bound) and walk(g.right, bound)
        if isinstance(g, Quant):
            if g.var == x:
                return True
            return walk(g.body, bound | {g.var})
        raise TypeError(g)

    return walk(f, frozenset())


# ---------------------------------------------------------------------------
# Canonical text, lengths and orders
# ---------------------------------------------------------------------------


def asciilen(s: str) -> int:
    return len(s)


def binlen(s: str) -> int:
    return 7 * len(s)


@dataclass(frozen=True)
class CanonicalText:
    text: str

    @property
    def ascii_len(self) -> int:
        return asciilen(self.text)

    @property
    def bin_len(self) -> int:
        return binlen(self.text)


def serialize(f: Formula) -> CanonicalText:
    """Canonical rendering of a formula, delimited by ``$`` on both sides."""
    return CanonicalText("$" + f.text + "$")


def formula_len(f: Formula) -> int:
    return len(f.text) + 2


class Ordering(enum.IntEnum):
    PRECEDES = -1
    EQUAL = 0
    FOLLOWS = 1


def string_cmp(x: str, y: str) -> Ordering:
    """Shorter strings first; equal lengths fall back to ASCII dictionary order."""
    kx, ky = (len(x), x), (len(y), y)
    if kx < ky:
        return Ordering.PRECEDES
    if kx > ky:
        return Ordering.FOLLOWS
    return Ordering.EQUAL


@dataclass(frozen=True)
class FormulaSequence:
    items: tuple[Formula, ...] = ()

    def __post_init__(self):
        if not isinstance(self.items, tuple):
            object.__setattr__(self, "items", tuple(self.items))

    def __len__(self):
        return len(self.items)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.items)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return FormulaSequence(self.items[i])
        return self.items[i]

    def __add__(self, other: "FormulaSequence") -> "FormulaSequence":
        return FormulaSequence(self.items + tuple(other))

    def joined_text(self) -> str:
        return "".join(serialize(f).text for f in self.items)


def seq_ascii_len(seq: Iterable[Formula]) -> int:
    return sum(formula_len(f) for f in seq)


def seq_cmp(s1: Iterable[Formula], s2: Iterable[Formula]) -> Ordering:
    return string_cmp(FormulaSequence(tuple(s1)).joined_text(), FormulaSequence(tuple(s2)).joined_text())


def seq_concat(seqs: Iterable[Iterable[Formula]]) -> FormulaSequence:
    items: list[Formula] = []
    for s in seqs:
        items.extend(s)
    return FormulaSequence(tuple(items))


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    """Syntax error; ``offset`` counts characters from the start of the formula body."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnboundVariableError(ParseError):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<proj>\\pi_M)
  | (?P<cmd>\\[A-Za-z]+)
  | (?P<ident>[A-Za-z][A-Za-z0-9]*)
  | (?P<num>\d+)
  | (?P<rel>!=|<=|>=|=|<|>)
  | (?P<punct>[(){},_+\-])
    """,
    re.VERBOSE,
)

_COMMANDS = {r"\forall", r"\exists", r"\neg", r"\wedge", r"\vee", r"\to", r"\top"}
_BINOPS = {r"\wedge": And, r"\vee": Or, r"\to": Imp}


def _tokenize(body: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(body):
        m = _TOKEN_RE.match(body, pos)
        if not m:
            raise ParseError(f"unexpected character {body[pos]!r}", pos)
        kind = m.lastgroup
        value = m.group()
        if kind == "cmd" and value not in _COMMANDS:
            raise ParseError(f"unknown command {value}", pos)
        if kind == "num" and len(value) > 1 and value[0] == "0":
            raise ParseError("numeral with leading zero", pos)
        if kind != "ws":
            tokens.append((kind, value, pos))
        pos = m.end()
    tokens.append(("end", "", len(body)))
    return tokens


class _Parser:
    def __init__(self, body: str, free: Iterable[str] | None):
        self.toks = _tokenize(body)
        self.i = 0
        self.free = None if free is None else set(free)

    def peek(self, ahead: int = 0):
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.i]
        if tok[0] != "end":
            self.i += 1
        return tok

    def expect(self, value: str):
        tok = self.next()
        if tok[1] != value or tok[0] == "end":
            what = "end of formula" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {value!r}, found {what}", tok[2])
        return tok

    def fail(self, message: str):
        tok = self.peek()
        what = "end of formula" if tok[0] == "end" else repr(tok[1])
        raise ParseError(f"{message}, found {what}", tok[2])

    # formula := \neg F | \forall v F | \exists v F | \top | ( F op F ) | ( F ) | term rel term
    def formula(self, bound: frozenset) -> Formula:
        kind, value, pos = self.peek()
        if kind == "cmd":
            if value == r"\neg":
                self.next()
                return Not(self.formula(bound))
            if value in (r"\forall", r"\exists"):
                self.next()
                vk, vv, vp = self.next()
                if vk != "ident" or not re.fullmatch(r"[A-Za-z][0-9]*", vv):
                    raise ParseError("expected a variable after quantifier", vp)
                body = self.formula(bound | {vv})
                return (Forall if value == r"\forall" else Exists)(vv, body)
            if value == r"\top":
                self.next()
                return TOP
            self.fail("expected a formula")
        if value == "(" and not self._triple_ahead():
            self.next()
            left = self.formula(bound)
            op = self.peek()
            if op[1] in _BINOPS and op[0] == "cmd":
                self.next()
                right = self.formula(bound)
                self.expect(")")
                return _BINOPS[op[1]](left, right)
            self.expect(")")
            return left
        lhs = self.term(bound)
        rk, rv, rp = self.next()
        if rk != "rel":
            raise ParseError("expected a relation", rp)
        rhs = self.term(bound)
        return Cmp(lhs, rv, rhs)

    def _triple_ahead(self) -> bool:
        k1, v1, _ = self.peek(1)
        if k1 == "proj":
            return True
        if (k1 == "num" and v1 in ("0", "1")) or v1 in (BLANK, LEFT_END):
            return self.peek(2)[1] == ","
        return False

    def term(self, bound: frozenset) -> Term:
        base = self.primary(bound)
        if self.peek()[1] in ("+", "-"):
            sign = self.next()[1]
            k, v, p = self.next()
            if v != "1":
                raise ParseError("offsets are +1 or -1 only", p)
            if isinstance(base, Offset):
                raise ParseError("nested offsets are not part of the language", p)
            return plus(base, 1 if sign == "+" else -1)
        return base

    def primary(self, bound: frozenset) -> Term:
        kind, value, pos = self.next()
        if kind == "num":
            return Num(int(value))
        if kind == "ident":
            if value == "t" and self.peek()[1] == "_":
                self.next()
                self.expect("{")
                row = self.term(bound)
                self.expect(",")
                col = self.term(bound)
                self.expect("}")
                return Square(row, col)
            if not re.fullmatch(r"[A-Za-z][0-9]*", value):
                raise ParseError(f"bad variable name {value!r}", pos)
            if value not in bound and (self.free is not None and value not in self.free):
                raise UnboundVariableError(f"unbound variable {value!r}", pos)
            return Var(value)
        if value == "(":
            sk, sv, sp = self.next()
            if sk == "proj":
                self.expect("(")
                symbol: Union[str, Proj] = Proj(self.term(bound))
                self.expect(")")
            elif sv in TAPE_SYMBOLS:
                symbol = sv
            else:
                raise ParseError("expected a tape symbol", sp)
            self.expect(",")
            stk, stv, stp = self.next()
            if stk != "ident":
                raise ParseError("expected a state name", stp)
            self.expect(",")
            fk, fv, fp = self.next()
            if fv not in ("0", "1"):
                raise ParseError("expected flag 0 or 1", fp)
            self.expect(")")
            return Triple(symbol, stv, int(fv))
        what = "end of formula" if kind == "end" else repr(value)
        raise ParseError(f"expected a term, found {what}", pos)


def parse_formula(text: str, free: Iterable[str] | None = ()) -> Formula:
    """Parse one formula.  ``$`` delimiters are optional.

    ``free`` lists variables allowed to occur free; the default demands a
    closed formula and ``None`` disables the check.
    """
    body = text.strip()
    if body.startswith("$"):
        if len(body) < 2 or not body.endswith("$"):
            raise ParseError("unterminated math delimiter", len(body) - 1)
        body = body[1:-1]
    p = _Parser(body, free)
    f = p.formula(frozenset())
    kind, value, pos = p.peek()
    if kind != "end":
        raise ParseError(f"trailing input {value!r}", pos)
    return f
