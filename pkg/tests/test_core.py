import json
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings

from bellforge.core import (
    FullCorrelationInequality,
    ParseError,
    Scenario,
    Vertex,
    algebraic_bound,
    evaluate,
    outcome_table,
    parse,
    serialize,
    to_document,
    vertex_from_row,
)

from strategies import full_inequalities, general_inequalities


def test_scenario_sizes():
    s = Scenario((2, 3))
    assert s.n_parties == 2
    assert s.dimension() == 6
    assert s.total_settings() == 5
    assert s.vertex_count() == 16 and s.vertex_count(reduced=False) == 32
    assert [s.index(t) for t in s.tuples()] == list(range(6))
    assert s.remove_party(0) == Scenario((3,))
    with pytest.raises(ValueError):
        Scenario((2, 0))


def test_zero_party_scenario():
    s = Scenario(())
    assert s.dimension() == 1
    assert list(s.tuples()) == [()]


def test_outcome_table_order():
    s = Scenario((2, 1))
    full = outcome_table(s, reduced=False)
    red = outcome_table(s, reduced=True)
    assert full.shape == (8, 3)
    assert np.array_equal(full[:4], red)
    assert (red[:, 0] == 1).all()
    assert {tuple(r) for r in full} == set(product((1, -1), repeat=3))


def test_normalization_keeps_original_bound():
    ineq = FullCorrelationInequality((2, 2), {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1}, 2)
    assert ineq.bound == 1
    assert ineq.original_bound == 2
    assert ineq.coefficient((1, 1)) == Fraction(-1, 2)
    assert algebraic_bound(ineq) == 2


def test_negative_bound_not_rescaled():
    ineq = FullCorrelationInequality((2,), {(0,): 3}, -1)
    assert ineq.bound == -1 and ineq.coefficient((0,)) == 3


def test_zero_terms_dropped_and_merged():
    ineq = FullCorrelationInequality((2,), [((0,), 1), ((0,), -1), ((1,), 2)])
    assert ineq.terms == {(1,): 2}


def test_evaluate_and_inverted_vertex():
    chsh = FullCorrelationInequality((2, 2), {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1}, 2)
    v = Vertex(((1, 1), (1, 1)))
    assert evaluate(chsh, v) == 1
    assert evaluate(chsh, v.inverted()) == -1
    row = [1, -1, 1, 1]
    assert vertex_from_row(Scenario((2, 2)), row).outcomes == ((1, -1), (1, 1))


def test_expression_text():
    chsh = FullCorrelationInequality((2, 2), {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1})
    assert chsh.expression() == "a1b1 + a1b2 + a2b1 - a2b2"


def test_immutable():
    ineq = FullCorrelationInequality((2,), {(0,): 1})
    with pytest.raises(AttributeError):
        ineq.bound = 2


def test_arithmetic_checks_scenario():
    a = FullCorrelationInequality((2,), {(0,): 1})
    b = FullCorrelationInequality((3,), {(0,): 1})
    with pytest.raises(ValueError):
        a + b
    assert (a - a).terms == {}
    assert (2 * a).coefficient((0,)) == 2


@given(full_inequalities())
@settings(max_examples=150, deadline=None)
def test_full_json_round_trip(ineq):
    back = parse(serialize(ineq))
    assert back == ineq
    assert back.original_bound == ineq.original_bound
    assert back.name == ineq.name


@given(general_inequalities())
@settings(max_examples=100, deadline=None)
def test_general_json_round_trip(g):
    back = parse(serialize(g))
    assert back == g


def test_document_uses_one_based_settings():
    doc = to_document(FullCorrelationInequality((2, 2), {(1, 0): Fraction(1, 3)}))
    assert doc["terms"] == [{"settings": [2, 1], "coeff": "1/3"}]
    assert doc["bound"] == "1/1"


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"settings": [2], "terms": []}, "kind"),
        ({"kind": "full", "settings": [0], "terms": []}, "settings"),
        ({"kind": "full", "settings": [2], "terms": [{"settings": [3], "coeff": "1"}]}, "terms[0].settings"),
        ({"kind": "full", "settings": [2], "terms": [{"settings": [1], "coeff": "1/0"}]}, "terms[0].coeff"),
        ({"kind": "full", "settings": [2], "terms": [{"settings": [1], "coeff": 0.5}]}, "terms[0].coeff"),
        ({"kind": "full", "settings": [2], "terms": [], "constant": "1"}, "constant"),
        (
            {"kind": "full", "settings": [2], "terms": [{"settings": [1], "coeff": "1"}, {"settings": [1], "coeff": "2"}]},
            "terms",
        ),
        ({"kind": "general", "settings": [2], "terms": [{"settings": [0], "coeff": "1"}]}, "terms[0].settings"),
    ],
)
def test_parse_errors_name_the_field(doc, field):
    with pytest.raises(ParseError) as info:
        parse(json.dumps(doc))
    assert info.value.field == field


def test_malformed_json():
    with pytest.raises(ParseError, match="malformed JSON"):
        parse("{")
