import pytest
from hypothesis import given

from proofforge.encoding import ExplicitTheory, tableau
from proofforge.fixtures import M_ALLZERO, M_CONST1, M_FIRSTBIT
from proofforge.formula import TOP, FormulaSequence, Imp, conj, parse_formula
from proofforge.kernel import (
    EMPTY_TYPE,
    IN,
    CheckerStep,
    ProofType,
    SkeletonTooLarge,
    VerificationError,
    adjoint_check,
    check_justifications,
    check_lambda,
    check_zfc,
    is_tautology,
    key_info,
    lambda_group,
    make_checker,
    prooftype,
    replay,
    same_type,
    verify,
)
from proofforge.machine import iter_strings, run
from proofforge.synthesis import build_special_proof, normal_goal

from strategies import formulas

CAP = 10_000


def P(text, free=None):
    return parse_formula(text, free=free)


# --- logical axioms ------------------------------------------------------------


@given(formulas)
def test_self_implication_is_axiom(f):
    assert check_lambda(Imp(f, f))


def test_instantiation_example():
    f = P(r"$(\forall j(j>3\to t_{0,j}=(_,q0,0))\to(5>3\to t_{0,5}=(_,q0,0)))$")
    assert check_lambda(f)
    assert lambda_group(f, "strict") == "2"


def test_atom_is_not_axiom():
    assert not check_lambda(P("$t_{0,0}=(>,q0,1)$"))


def test_capturing_instantiation_rejected():
    # j := k would be captured by the inner binder
    f = P(r"$(\forall j\exists k j>k\to\exists k k>k)$")
    assert not check_lambda(f)


def test_remaining_groups():
    assert lambda_group(P(r"$(\forall x(x>1\to x>0)\to(\forall x x>1\to\forall x x>0))$")) == "3"
    assert lambda_group(P(r"$(3>1\to\forall x 3>1)$")) == "4"
    assert lambda_group(P("$x=x$", free=["x"])) == "5"
    assert lambda_group(P(r"$(4>1\to\exists x x>1)$")) == "7"
    assert check_lambda(P(r"$(x=2\to(x>1\to 2>1))$", free=["x"]))


def test_paper_mode_extras():
    iterated = P(r"$(\forall i\forall j t_{i,j}=(0,q,0)\to t_{2,3}=(0,q,0))$")
    weaken = P(r"$(\forall i(i>0\to(i>1\wedge i>2))\to\forall i(i>0\to i>2))$")
    assert check_lambda(iterated, "paper") and not check_lambda(iterated, "strict")
    assert check_lambda(weaken, "paper") and not check_lambda(weaken, "strict")


def test_skeleton_too_large():
    big = conj([P(f"${n}>{n + 1}$") for n in range(25)])
    with pytest.raises(SkeletonTooLarge):
        is_tautology(Imp(big, big))


# --- ground facts ------------------------------------------------------------------


@pytest.mark.parametrize("text, want", [("$102>6$", True), ("$(0,q,1)!=(1,q,1)$", True), ("$3>5$", False), (r"$(1=1\wedge\neg 2>3)$", True)])
def test_zfc_examples(text, want):
    assert check_zfc(P(text)) is want


def test_zfc_rejects_open_formula():
    assert not check_zfc(P("$x>0$", free=["x"]))


# --- verification ------------------------------------------------------------------


def test_three_line_hand_proof():
    a, b = P("$t_{0,1}=(0,q0,0)$"), P("$t_{1,1}=(0,q0,0)$")
    th = ExplicitTheory(FormulaSequence((a, Imp(a, b))))
    g = verify(th, [a, Imp(a, b), b], goal=b)
    assert list(g) == [IN, IN, CheckerStep("Mp", 1, 0)]


def test_unjustified_line_fails_at_zero():
    psi = P("$t_{9,9}=(1,q0,0)$")
    with pytest.raises(VerificationError) as err:
        verify(ExplicitTheory(FormulaSequence()), [psi])
    assert err.value.index == 0
    assert prooftype(ExplicitTheory(FormulaSequence()), [psi]) == EMPTY_TYPE


def test_wrong_goal_fails():
    a = P("$1=1$")
    with pytest.raises(VerificationError):
        verify(ExplicitTheory(FormulaSequence()), [a], goal=P("$2=2$"))


def test_priority_prefers_membership():
    # a tautology that is also a member is justified by membership
    f = P(r"$(1=1\to 1=1)$")
    assert list(verify(ExplicitTheory(FormulaSequence((f,))), [f])) == [IN]


def test_generalization_step():
    f = P("$x=x$", free=["x"])
    g = verify(ExplicitTheory(FormulaSequence()), [f, P(r"$\forall x x=x$")])
    assert g[1] == CheckerStep("Gen", 0, var="x")


def test_special_proof_verifies_full_length():
    sp = build_special_proof(M_CONST1(), "", CAP)
    g = verify(sp.theory, sp.proof, normal_goal(M_CONST1(), 1))
    assert len(g) == len(sp.proof)


def test_stored_justifications_rechecked():
    sp = build_special_proof(M_CONST1(), "", CAP)
    g = verify(sp.theory, sp.proof)
    check_justifications(sp.theory, sp.proof, g.steps)
    bad = list(g.steps)
    i = next(n for n, s in enumerate(bad) if s.kind == "Mp")
    bad[i] = CheckerStep("Mp", bad[i].k, bad[i].j)
    with pytest.raises(VerificationError) as err:
        check_justifications(sp.theory, sp.proof, bad)
    assert err.value.index == i


# --- types ---------------------------------------------------------------------------


def test_same_type_examples():
    g = verify(tableau(M_CONST1(), "00"), build_special_proof(M_CONST1(), "00", CAP).proof)
    h = verify(tableau(M_CONST1(), "01"), build_special_proof(M_CONST1(), "01", CAP).proof)
    assert same_type(g, g) and same_type(g, h)
    i = next(n for n, s in enumerate(g) if s.kind == "Mp")
    steps = list(g.steps)
    steps[i] = CheckerStep("Mp", steps[i].j, steps[i].k + 1)
    assert not same_type(g, ProofType(tuple(steps)))


# --- key information -------------------------------------------------------------------


def test_keyset_examples():
    t = tableau(M_CONST1(), "")
    info = key_info(build_special_proof(M_CONST1(), "", CAP).proof, t)
    assert set(info.keyset) == {P("$t_{0,0}=(>,q0,1)$"), P(r"$\forall j(j>0\to t_{0,j}=(_,q0,0))$")}
    assert info.keyinfo == conj(list(info.keyset))
    t1 = tableau(M_FIRSTBIT(), "1")
    assert P("$t_{0,1}=(1,q0,0)$") in key_info(build_special_proof(M_FIRSTBIT(), "1", CAP).proof, t1).keyset
    assert key_info(list(t1.def_part), t1).keyinfo == TOP


def test_keyinfo_in_theory_order():
    t = tableau(M_ALLZERO(), "010")
    info = key_info(build_special_proof(M_ALLZERO(), "010", CAP).proof, t)
    order = [t.input_part.items.index(f) for f in info.keyset]
    assert order == sorted(order)
    assert info.keyinfo == conj(list(info.keyset))


# --- adjoint checkers ---------------------------------------------------------------------


@pytest.mark.parametrize("mode", ["paper", "strict"])
def test_self_check(mode):
    for m in (M_CONST1(), M_FIRSTBIT(), M_ALLZERO()):
        for s in iter_strings(3):
            sp = build_special_proof(m, s, CAP, mode)
            ck = make_checker(sp.theory, sp.proof, sp.goal, mode)
            assert adjoint_check(ck, sp.theory) == 1


def test_firstbit_checker_rejects_other_bit():
    sp = build_special_proof(M_FIRSTBIT(), "1", CAP)
    ck = make_checker(sp.theory, sp.proof, sp.goal)
    assert adjoint_check(ck, tableau(M_FIRSTBIT(), "0")) == 0


def test_keyinfo_equivalence_and_soundness():
    for m in (M_CONST1(), M_FIRSTBIT(), M_ALLZERO()):
        for r in ("", "1", "01"):
            sp = build_special_proof(m, r, CAP)
            ck = make_checker(sp.theory, sp.proof, sp.goal)
            for s in iter_strings(5):
                t = tableau(m, s)
                ok = adjoint_check(ck, t)
                assert ok == all(t.member(f)[0] for f in ck.keyset)
                assert ok == (prooftype(t, ck.proof) == ck.type)
                if ok:
                    assert run(m, s, CAP).value == sp.value


def test_replay_cost_is_input_independent():
    sp = build_special_proof(M_ALLZERO(), "00", CAP)
    ck = make_checker(sp.theory, sp.proof, sp.goal)
    costs = {replay(ck, tableau(M_ALLZERO(), s))[1] for s in iter_strings(6, 2)}
    assert len(costs) == 1


def test_structurally_broken_checker_rejects():
    sp = build_special_proof(M_CONST1(), "", CAP)
    ck = make_checker(sp.theory, sp.proof, sp.goal)
    steps = list(ck.type.steps)
    i = next(n for n, s in enumerate(steps) if s.kind == "Lambda")
    steps[i] = CheckerStep("Zfc")
    broken = type(ck)(ck.proof, ProofType(tuple(steps)), ck.mode)
    assert adjoint_check(broken, sp.theory) == 0
