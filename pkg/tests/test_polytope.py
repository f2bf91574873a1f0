from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.optimize import linprog

from bellforge.core import FullCorrelationInequality, GeneralInequality, Scenario, correlation_matrix, outcome_table
from bellforge.linalg import MODULUS, ModularRowSpace, RowSpace, bareiss_rank, bareiss_solve
from bellforge.polytope import (
    CapExceeded,
    enumerate_facets,
    enumerate_vertices,
    general_lr_bound,
    lr_bound,
    lr_bound_bruteforce,
    tightness,
)

from strategies import full_inequalities, general_inequalities

CHSH = FullCorrelationInequality((2, 2), {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1}, 2)


def naive_max(ineq):
    """Evaluate on every strategy, one at a time."""
    return max(
        sum((c * np.prod([v.outcomes[p][k] for p, k in enumerate(t)]) for t, c in ineq.terms.items()), Fraction(0))
        for v in enumerate_vertices(ineq.scenario, reduced=False)
    )


def fraction_solve(a, b):
    """Plain Gauss-Jordan over Q."""
    n = len(a)
    m = [[Fraction(x) for x in a[i]] + [Fraction(x) for x in b[i]] for i in range(n)]
    for c in range(n):
        piv = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        m[c] = [x / m[c][c] for x in m[c]]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]


def test_vertex_enumeration_counts():
    s = Scenario((2, 3))
    assert len(list(enumerate_vertices(s))) == 16
    assert len(set(enumerate_vertices(s, reduced=False))) == 32


def test_chsh_bound():
    assert lr_bound(CHSH) == 1
    assert lr_bound_bruteforce(CHSH) == 1


@given(full_inequalities(max_parties=3, max_settings=3))
@settings(max_examples=120, deadline=None)
def test_lr_bound_matches_bruteforce(ineq):
    lr = lr_bound(ineq)
    if ineq.terms:
        assert lr == lr_bound_bruteforce(ineq) == naive_max(ineq)
    else:
        assert lr == 0


@given(general_inequalities())
@settings(max_examples=80, deadline=None)
def test_general_lr_bound_matches_vertex_evaluation(g):
    best = max(g.evaluate(v) for v in enumerate_vertices(g.scenario, reduced=False))
    assert general_lr_bound(g) == best


def test_cap_refuses_and_env_override(monkeypatch):
    big = FullCorrelationInequality((2,) * 14, {(0,) * 14: 1})
    with pytest.raises(CapExceeded) as info:
        tightness(big)
    assert info.value.cap == 26 and info.value.required == 28
    monkeypatch.setenv("BELLFORGE_CAP", "3")
    with pytest.raises(CapExceeded):
        lr_bound(CHSH.__class__((2, 2, 2), {(0, 0, 0): 1}))


def test_tightness_chsh():
    rep = tightness(CHSH)
    assert rep.is_face and rep.is_facet
    assert rep.saturating_count == 8
    assert rep.rank == rep.dimension == 4


def test_face_that_is_not_a_facet():
    ineq = FullCorrelationInequality((2, 2), {(0, 0): Fraction(1, 2), (0, 1): Fraction(1, 2)})
    rep = tightness(ineq)
    assert rep.is_face and not rep.is_facet
    assert rep.rank == 2


def test_invalid_inequality_is_not_a_face():
    ineq = FullCorrelationInequality((2, 2), {(0, 0): 1, (0, 1): 1})
    rep = tightness(ineq)
    assert rep.lr_max == 2 and not rep.is_face and not rep.is_facet


def saturating_rank_oracle(ineq):
    s = ineq.scenario
    table = outcome_table(s, reduced=False)
    M = correlation_matrix(s, table)
    vals = M @ np.array([float(c) for c in ineq.dense()])
    rows = M[np.isclose(vals, float(ineq.bound))]
    return int(np.linalg.matrix_rank(rows)) if len(rows) else 0, len(rows)


@given(full_inequalities(max_parties=3, max_settings=2))
@settings(max_examples=80, deadline=None)
def test_tightness_rank_matches_float_oracle(ineq):
    if not ineq.terms:
        return
    ineq = FullCorrelationInequality(ineq.scenario, ineq.terms, lr_bound(ineq))
    auto, exact = tightness(ineq), tightness(ineq, method="exact")
    assert auto == exact
    rank, count = saturating_rank_oracle(ineq)
    assert exact.rank == rank
    assert exact.saturating_count == count


def test_rank_engines_agree():
    rng = np.random.default_rng(1)
    for _ in range(40):
        r, c = rng.integers(1, 8, size=2)
        M = rng.integers(-3, 4, size=(r, c))
        if rng.random() < 0.5 and r > 1:
            M[-1] = M[0] * 2 - M[1 % r]
        space = RowSpace(c)
        for row in M:
            space.add(row.tolist())
        mod = ModularRowSpace(c)
        mod.add_batch(M)
        expected = int(np.linalg.matrix_rank(M))
        assert bareiss_rank(M.tolist()) == space.rank == mod.rank == expected


def test_modular_rank_is_a_lower_bound():
    # a row that vanishes only mod p
    M = np.array([[1, 0], [0, MODULUS]])
    mod = ModularRowSpace(2)
    mod.add_batch(M)
    assert mod.rank == 1
    assert bareiss_rank(M.tolist()) == 2


def test_bareiss_solve_matches_fractions():
    rng = np.random.default_rng(2)
    for _ in range(30):
        n = int(rng.integers(1, 6))
        a = rng.integers(-4, 5, size=(n, n)).tolist()
        b = rng.integers(-4, 5, size=(n, 2)).tolist()
        det, y = bareiss_solve(a, b)
        exact_det = round(np.linalg.det(np.array(a, dtype=float)))
        assert det == exact_det
        if det:
            assert [[Fraction(v, det) for v in row] for row in y] == fraction_solve(a, b)


def in_hull(point, vertices):
    n = len(vertices)
    res = linprog(
        np.zeros(n),
        A_eq=np.vstack([vertices.T, np.ones(n)]),
        b_eq=np.append(point, 1.0),
        bounds=[(0, None)] * n,
        method="highs",
    )
    return res.status == 0


@pytest.mark.parametrize("sp, count", [((1, 1), 2), ((2, 2), 16), ((1, 2), 4), ((2, 3), 36)])
def test_facets_describe_the_hull(sp, count):
    s = Scenario(sp)
    fl = enumerate_facets(s)
    assert len(fl.facets) == count
    for f in fl.facets:
        assert tightness(f).is_facet
    # the facet inequalities cut out exactly the convex hull
    vertices = correlation_matrix(s, outcome_table(s, reduced=False)).astype(float)
    A = np.array([[float(c) for c in f.dense()] for f in fl.facets])
    rng = np.random.default_rng(3)
    for _ in range(150):
        x = rng.uniform(-1, 1, size=s.dimension())
        inside = bool((A @ x <= 1 + 1e-9).all())
        assert inside == in_hull(x, vertices)


def test_facet_guards():
    with pytest.raises(CapExceeded):
        enumerate_facets(Scenario((3, 3)))
    with pytest.raises(CapExceeded):
        enumerate_facets(Scenario((1, 1, 1, 1, 1, 1, 1)), max_vertices=16)


def test_general_lr_bound_with_constant():
    g = GeneralInequality((1, 1), {(0, -1): 1, (-1, 0): 1, (0, 0): -1}, -1)
    # a + b - ab - 1 <= 0
    assert general_lr_bound(g) == 0
    outcomes = [g.evaluate(v) for v in enumerate_vertices(g.scenario, reduced=False)]
    assert max(outcomes) == 0 and sorted(outcomes) == [-4, 0, 0, 0]


def test_report_serializes():
    d = tightness(CHSH).to_dict()
    assert d["lr_max"] == "1/1" and d["is_facet"] is True


def test_product_bound_on_larger_scenario():
    # a1 b1 c1 d1 summed over all settings factorizes: bound = prod of settings
    s = Scenario((2, 3, 1, 2))
    ineq = FullCorrelationInequality(s, {t: 1 for t in product(*(range(m) for m in s.settings_per_party))})
    assert lr_bound(ineq) == 12
