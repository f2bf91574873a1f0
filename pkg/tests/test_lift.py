from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bellforge import catalog
from bellforge.core import FullCorrelationInequality, Scenario
from bellforge.equivalence import equivalent
from bellforge.lift import (
    LiftInputError,
    NonFaceInput,
    chsh_extend,
    compose_lift,
    converse_check,
    decompose,
    find_face_signs,
    flip_pairs,
    four_term_extend,
    recompose,
    split_two_setting,
    structure_identity,
    structure_values,
)
from bellforge.polytope import enumerate_vertices, lr_bound, tightness

from strategies import full_inequalities

A1, A2 = catalog.single_party_facets(2)
CHSH = catalog.get("chsh").inequality


@given(full_inequalities(max_parties=3, max_settings=3), st.data())
@settings(max_examples=120, deadline=None)
def test_decompose_recompose_identity(ineq, data):
    p = data.draw(st.integers(0, ineq.scenario.n_parties - 1))
    d = decompose(ineq, p)
    assert recompose(d) == ineq
    assert structure_identity(d) == ineq


def test_structure_values_are_special_evaluations():
    # S_k is the expression with party p's outcomes set to (1, .., -1 at k, .., 1)
    ineq = FullCorrelationInequality((3, 2), {(0, 0): 1, (1, 1): Fraction(1, 3), (2, 0): -2, (2, 1): 1})
    d = decompose(ineq, 0)
    svals = structure_values(d)
    for k, sk in enumerate(svals):
        outcome = [1, 1, 1]
        if k:
            outcome[k] = -1
        for v in enumerate_vertices(Scenario((2,)), reduced=False):
            full = sum(c * outcome[t[0]] * v.outcomes[0][t[1]] for t, c in ineq.terms.items())
            part = sum(c * v.outcomes[0][t[0]] for t, c in sk.terms.items())
            assert full == part


def test_chsh_from_single_party_facets():
    assert chsh_extend(A1, A2) == CHSH
    lifted = compose_lift([A1, A2])
    assert lifted.verified and lifted.is_facet


def test_single_face_lift_is_product():
    b = FullCorrelationInequality((2,), {(0,): Fraction(1, 2), (1,): Fraction(1, 2)})
    out = compose_lift([b], verify=False).inequality
    assert out.scenario == Scenario((2, 1))
    assert out.terms == {(0, 0): Fraction(1, 2), (1, 0): Fraction(1, 2)}


def test_i44_from_trivial_faces():
    faces = catalog.i44_faces()
    for f in faces:
        rep = tightness(f)
        assert rep.is_face and not rep.is_facet
    res = compose_lift(faces)
    assert res.verified
    assert res.report.is_facet and res.report.rank == 16
    assert equivalent(res.inequality, catalog.get("i44").inequality)


def test_lifting_facet_pairs_gives_facets():
    # the two-setting construction keeps facets, including the degenerate
    # pairs (B, B) and (B, -B) whose output is a product with one new setting
    for b2 in (CHSH, -CHSH):
        res = compose_lift([CHSH, b2])
        assert res.is_facet
    assert compose_lift([A1, -A1]).is_facet


def test_compose_lift_unverified_beyond_cap():
    res = compose_lift([CHSH, CHSH], cap=3)
    assert res.verified is False and res.report is None


def test_lift_input_checks():
    with pytest.raises(LiftInputError):
        compose_lift([])
    with pytest.raises(ValueError):
        chsh_extend(A1, CHSH)
    with pytest.raises(LiftInputError):
        chsh_extend(A1, FullCorrelationInequality((2,), {(0,): 1}, 0))


def test_converse_on_wzg_family():
    for name in ("wzg3", "wzg4", "wzg5"):
        rep = converse_check(catalog.get(name).inequality)
        assert rep.both_facets


def test_split_inverts_extend():
    b1, b2 = split_two_setting(chsh_extend(CHSH, -CHSH))
    assert (b1, b2) == (CHSH, -CHSH)
    with pytest.raises(LiftInputError):
        split_two_setting(catalog.get("i44").inequality)


def test_four_term_extend_chain():
    ineq = CHSH
    recipe = catalog.get("wzg8").recipe
    flips = [s["flip"] for s in recipe if s["op"] == "four_term_extend"]
    for n, flip in zip(range(3, 9), flips):
        ineq = four_term_extend(ineq, [tuple(k - 1 for k in key) for key in flip])
        assert ineq.term_count() == 4
        assert lr_bound(ineq) == 1
        assert equivalent(ineq, catalog.get(f"wzg{n}").inequality)


def test_four_term_extend_rejects_non_face():
    ineq = FullCorrelationInequality((2, 2), {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 1}, 1)
    with pytest.raises(NonFaceInput):
        four_term_extend(ineq, [(1, 0), (1, 1)])
    with pytest.raises(LiftInputError):
        four_term_extend(catalog.get("i44").inequality, [(0, 0), (1, 0)])
    with pytest.raises(LiftInputError):
        four_term_extend(CHSH, [(0, 0), (0, 0)])


def test_flip_pairs_count():
    assert len(flip_pairs(CHSH)) == 6


def test_find_face_signs():
    signs, k, sv = find_face_signs(CHSH, 1)
    assert lr_bound(sv) == 1
    assert len(signs) == 2
    # every structure value is 0 or 2 a1 whatever the signs
    heavy = FullCorrelationInequality((2, 2), {(0, 0): 1, (0, 1): 1})
    assert find_face_signs(heavy, 1) is None
