import pytest
from hypothesis import given
from hypothesis import strategies as st

from proofforge.formula import (
    LEFT_END,
    CanonicalText,
    Cmp,
    Forall,
    FormulaSequence,
    Imp,
    Num,
    Ordering,
    ParseError,
    Proj,
    Square,
    Triple,
    UnboundVariableError,
    Var,
    conj,
    free_vars,
    parse_formula,
    plus,
    seq_ascii_len,
    seq_cmp,
    seq_concat,
    serialize,
    string_cmp,
    subst,
    substitutable,
)

from strategies import formulas, short_strings


# --- parsing -----------------------------------------------------------------


def test_parse_head_atom():
    f = parse_formula("$t_{0,0} = (>,q0,1)$")
    assert f == Cmp(Square(Num(0), Num(0)), "=", Triple(LEFT_END, "q0", 1))


def test_parse_blank_tail_universal():
    f = parse_formula(r"$\forall j ((j > 3) \to t_{0,j} = (_,q0,0))$")
    assert isinstance(f, Forall) and f.var == "j"
    assert isinstance(f.body, Imp)
    assert f.text == r"\forall j(j>3\to t_{0,j}=(_,q0,0))"


def test_unclosed_subscript_offset():
    with pytest.raises(ParseError) as err:
        parse_formula("$t_{0$")
    assert err.value.offset == 4


def test_unbound_variable_rejected():
    with pytest.raises(UnboundVariableError):
        parse_formula("$x=1$")
    assert parse_formula("$x=1$", free=["x"]) == Cmp(Var("x"), "=", Num(1))


@pytest.mark.parametrize("text", ["$01=1$", "$t_{0,0}=(2,q0,1)$", "$(1=1\\wedge 2=2$", "$\\forall(1=1)$"])
def test_malformed_inputs(text):
    with pytest.raises(ParseError):
        parse_formula(text)


@given(formulas)
def test_round_trip(f):
    assert parse_formula(serialize(f).text, free=None) == f


@given(formulas)
def test_serialize_idempotent(f):
    once = serialize(f).text
    assert serialize(parse_formula(once, free=None)).text == once


# --- token lengths -------------------------------------------------------------


@pytest.mark.parametrize("token, ascii_len, bin_len", [("t", 1, 7), ("$t$", 3, 21), ("$t_{298}$", 9, 63)])
def test_token_lengths(token, ascii_len, bin_len):
    c = CanonicalText(token)
    assert (c.ascii_len, c.bin_len) == (ascii_len, bin_len)


@given(formulas)
def test_bin_len_is_seven_times(f):
    c = serialize(f)
    assert c.bin_len == 7 * c.ascii_len


# --- folding and substitution -----------------------------------------------------


def test_numeral_offsets_fold():
    assert plus(Num(99), 1) == Num(100)
    assert plus(plus(Var("j"), 1), -1) == Var("j")
    assert plus(Var("j"), 1).text == "j+1"


def test_projection_of_literal_folds():
    t = Triple(Proj(Triple("1", "q", 0)), "p", 1)
    assert t.text == "(1,p,1)"


def test_subst_respects_binders():
    f = parse_formula(r"$(j>0\wedge\forall j(j>1))$", free=["j"])
    g = subst(f, {"j": Num(5)})
    assert g.text == r"(5>0\wedge\forall j j>1)"


def test_substitutable_detects_capture():
    f = parse_formula(r"$\forall k(j>k)$", free=["j"])
    assert not substitutable(Var("k"), "j", f)
    assert substitutable(Num(3), "j", f)


def test_free_vars():
    f = parse_formula(r"$\exists i t_{i,j}=(0,q,1)$", free=["j"])
    assert free_vars(f) == {"j"}


# --- orders and sequences ------------------------------------------------------------


@pytest.mark.parametrize("x, y, want", [("b", "aa", Ordering.PRECEDES), ("ab", "ba", Ordering.PRECEDES), ("x", "x", Ordering.EQUAL)])
def test_string_cmp_examples(x, y, want):
    assert string_cmp(x, y) == want


@given(short_strings, short_strings)
def test_string_cmp_antisymmetric(x, y):
    assert string_cmp(x, y) == -string_cmp(y, x)
    assert (string_cmp(x, y) == Ordering.EQUAL) == (x == y)


@given(short_strings, short_strings, short_strings)
def test_string_cmp_transitive(x, y, z):
    if string_cmp(x, y) <= 0 and string_cmp(y, z) <= 0:
        assert string_cmp(x, z) <= 0


def _seq(*texts):
    return FormulaSequence(tuple(parse_formula(t, free=None) for t in texts))


def test_seq_cmp_examples():
    phi = _seq("1=1")
    assert seq_cmp(FormulaSequence(), phi) == Ordering.PRECEDES
    assert seq_cmp(phi, phi) == Ordering.EQUAL
    assert seq_cmp(_seq("1<2"), _seq("2<1")) == Ordering.PRECEDES


@given(st.lists(formulas, max_size=3), st.lists(formulas, max_size=3), st.lists(formulas, max_size=3))
def test_seq_cmp_total_order(a, b, c):
    a, b, c = FormulaSequence(tuple(a)), FormulaSequence(tuple(b)), FormulaSequence(tuple(c))
    assert seq_cmp(a, b) == string_cmp(a.joined_text(), b.joined_text())
    assert seq_cmp(a, b) == -seq_cmp(b, a)
    if seq_cmp(a, b) <= 0 and seq_cmp(b, c) <= 0:
        assert seq_cmp(a, c) <= 0


@given(st.lists(formulas, max_size=3), st.lists(formulas, max_size=3), st.lists(formulas, max_size=3))
def test_concat_laws(a, b, c):
    a, b, c = FormulaSequence(tuple(a)), FormulaSequence(tuple(b)), FormulaSequence(tuple(c))
    assert seq_concat([seq_concat([a, b]), c]) == seq_concat([a, seq_concat([b, c])])
    assert seq_concat([FormulaSequence(), a]) == a
    assert len(a + b) == len(a) + len(b)
    assert seq_ascii_len(a + b) == seq_ascii_len(a) + seq_ascii_len(b)


def test_seq_ascii_len_examples():
    phi = parse_formula("$t_{0,0}=(>,q0,1)$")
    assert seq_ascii_len(FormulaSequence()) == 0
    assert seq_ascii_len(FormulaSequence((phi,))) == serialize(phi).ascii_len == 18
    assert seq_ascii_len(FormulaSequence((phi, phi))) == 36


def test_empty_conjunction_is_top():
    assert conj([]).text == r"\top"
