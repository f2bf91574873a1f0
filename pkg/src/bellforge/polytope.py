"""Deterministic strategies, local-realistic bounds, tightness and tiny-case facets."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Iterator

import numpy as np

from .core import (
    BellForgeError,
    FullCorrelationInequality,
    GeneralInequality,
    Scenario,
    Vertex,
    correlation_matrix,
    format_fraction,
    outcome_table,
    term_products,
    to_document,
    vertex_from_row,
)
from .linalg import ModularRowSpace, RowSpace, bareiss_solve

DEFAULT_CAP = 26


class CapExceeded(BellForgeError):
    """An enumeration guard refused the request."""

    def __init__(self, what: str, required: int, cap: int):
        super().__init__(f"{what} needs cap >= {required}, current cap is {cap}")
        self.required = required
        self.cap = cap


def enumeration_cap() -> int:
    env = os.environ.get("BELLFORGE_CAP")
    return int(env) if env else DEFAULT_CAP


def _guard(total_settings: int, cap: int | None, what: str):
    cap = enumeration_cap() if cap is None else cap
    if total_settings > cap:
        raise CapExceeded(what, total_settings, cap)


def enumerate_vertices(s: Scenario, reduced: bool = True, cap: int | None = None) -> Iterator[Vertex]:
    _guard(s.total_settings(), cap, f"vertex enumeration of ({s})")
    table = outcome_table(s, reduced)
    for row in table:
        yield vertex_from_row(s, row)


def vertex_values(ineq: FullCorrelationInequality, reduced: bool = True, cap: int | None = None):
    """Integer-scaled values on all strategies: returns (values, L, table)."""
    s = ineq.scenario
    _guard(s.total_settings(), cap, f"vertex enumeration of ({s})")
    table = outcome_table(s, reduced)
    L, iterms = ineq.integer_terms()
    values = _scaled_values(s, table, iterms)
    return values, L, table


def _scaled_values(s: Scenario, table: np.ndarray, iterms) -> np.ndarray:
    if not iterms:
        return np.zeros(table.shape[0], dtype=object)
    big = max(abs(c) for _, c in iterms) * len(iterms) >= 2**62
    dtype = object if big else np.int64
    values = np.zeros(table.shape[0], dtype=dtype)
    prods = term_products(s, table, [t for t, _ in iterms])
    for j, (_, c) in enumerate(iterms):
        values += prods[:, j].astype(dtype) * c
    return values


def lr_bound_bruteforce(ineq: FullCorrelationInequality, cap: int | None = None) -> Fraction:
    values, L, _ = vertex_values(ineq, reduced=False, cap=cap)
    return Fraction(int(values.max()), L)


def lr_bound(ineq: FullCorrelationInequality, cap: int | None = None) -> Fraction:
    """Local-realistic maximum, with the last party's outcomes chosen analytically.

    For fixed outcomes of the other parties the expression is sum_k c_k f_k,
    maximized by c_k = sign(f_k), giving sum_k |f_k|.  Negating party 0 only
    negates every f_k, so the remaining enumeration is the reduced one.
    """
    s = ineq.scenario
    if s.n_parties == 0:
        return ineq.coefficient(())
    rest = s.remove_party(s.n_parties - 1)
    _guard(rest.total_settings(), cap, f"LR bound of ({s})")
    L, iterms = ineq.integer_terms()
    if not iterms:
        return Fraction(0)
    last = s.settings_per_party[-1]
    table = outcome_table(rest, reduced=True)
    total = None
    for k in range(last):
        sub = [(t[:-1], c) for t, c in iterms if t[-1] == k]
        if not sub:
            continue
        f = np.abs(_scaled_values(rest, table, sub))
        total = f if total is None else total + f
    return Fraction(int(total.max()), L)


@dataclass(frozen=True)
class TightnessReport:
    lr_max: Fraction
    is_face: bool
    saturating_count: int
    rank: int
    dimension: int
    is_facet: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lr_max"] = format_fraction(self.lr_max)
        return d


def tightness(
    ineq: FullCorrelationInequality, cap: int | None = None, method: str = "auto"
) -> TightnessReport:
    """Face/facet verdict with an exact rank certificate.

    ``saturating_count`` counts strategies in the full (unreduced) set whose
    value equals the bound.  Each reduced strategy stands for itself and its
    inversion partner, whose correlation vector is the negation, so the rank
    is computed from the reduced rows alone.

    ``method="auto"`` first eliminates modulo a prime; reaching full rank
    there certifies full rank over the rationals.  Otherwise (or with
    ``method="exact"``) the rank comes from fraction-free integer elimination.
    """
    if method not in ("auto", "exact"):
        raise ValueError(f"unknown rank method {method!r}")
    s = ineq.scenario
    values, L, table = vertex_values(ineq, reduced=True, cap=cap)
    dim = s.dimension()
    absvals = np.abs(values)
    lr_max = Fraction(int(absvals.max()), L) if len(values) else Fraction(0)
    target = ineq.bound * L
    if target.denominator != 1:
        return TightnessReport(lr_max, False, 0, 0, dim, False)
    target = int(target)
    if target == 0:
        hits = np.flatnonzero(values == 0)
        count = 2 * len(hits)
    else:
        hits = np.flatnonzero(absvals == abs(target))
        count = len(hits)
    # binary-counter neighbours are nearly collinear; a fixed shuffle reaches
    # full rank after far fewer rows
    hits = np.random.default_rng(0).permutation(hits)
    rank = _saturating_rank(s, table, hits, method)
    is_face = lr_max == ineq.bound and count >= 1
    return TightnessReport(lr_max, is_face, int(count), rank, dim, is_face and rank == dim)


def _saturating_rank(s: Scenario, table: np.ndarray, hits: np.ndarray, method: str) -> int:
    dim = s.dimension()
    batch = max(64, 2 * dim)
    first: list[int] = []
    if method == "auto":
        mod = ModularRowSpace(dim)
        for start in range(0, len(hits), batch):
            chunk = hits[start : start + batch]
            taken = mod.add_batch(correlation_matrix(s, table[chunk]))
            first.extend(int(chunk[i]) for i in taken)
            if mod.rank == dim:
                return dim
    # exact pass; rows independent mod p go first since they are independent here too
    space = RowSpace(dim)
    seen = set(first)
    order = first + [int(h) for h in hits if int(h) not in seen]
    for start in range(0, len(order), batch):
        for row in correlation_matrix(s, table[order[start : start + batch]]):
            space.add(row.tolist())
            if space.rank == dim:
                return dim
    return space.rank


def general_lr_bound(g: GeneralInequality, cap: int | None = None) -> Fraction:
    """Brute-force LR maximum of a CH-type inequality over all strategies."""
    s = g.scenario
    _guard(s.total_settings(), cap, f"LR bound of ({s})")
    table = outcome_table(s, reduced=False)
    L = lcm(g.constant.denominator, *(c.denominator for c in g.terms.values()))
    iterms = [(t, int(c * L)) for t, c in g.terms.items()]
    values = _scaled_values(s, table, iterms) if iterms else np.zeros(table.shape[0], dtype=np.int64)
    return Fraction(int(values.max()) + int(g.constant * L), L)


# --- facets of tiny polytopes -----------------------------------------------------

FACET_MAX_DIMENSION = 8
FACET_MAX_VERTICES = 64


@dataclass
class FacetList:
    scenario: Scenario
    facets: list[FullCorrelationInequality]
    orbit_classes: list[list[int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scenario": list(self.scenario.settings_per_party),
            "facets": [to_document(f) for f in self.facets],
            "orbit_classes": self.orbit_classes,
        }


def enumerate_facets(
    s: Scenario,
    max_dimension: int = FACET_MAX_DIMENSION,
    max_vertices: int = FACET_MAX_VERTICES,
    classify: bool = True,
) -> FacetList:
    """All facets ``alpha . x <= 1`` of the correlation polytope of a tiny scenario.

    Every facet contains ``d = dim`` linearly independent vertices; up to
    inversion, a vertex on the face is a reduced strategy with a sign.  So we
    try each d-subset of distinct reduced correlation vectors together with
    every sign pattern (first sign fixed; the other half gives -alpha), solve
    ``M alpha = signs`` exactly, and keep solutions with |alpha . x| <= 1 on
    all vertices.  A kept solution is a face containing d independent
    vertices, i.e. a facet.
    """
    d = s.dimension()
    if d > max_dimension:
        raise CapExceeded(f"facet enumeration of ({s}) (dimension)", d, max_dimension)
    if s.vertex_count(reduced=False) > max_vertices:
        raise CapExceeded(f"facet enumeration of ({s}) (vertices)", s.vertex_count(False), max_vertices)
    points = np.unique(correlation_matrix(s, outcome_table(s, reduced=True)), axis=0)
    # one representative per +-pair
    reps, seen = [], set()
    for p in points:
        key, neg = tuple(p.tolist()), tuple((-p).tolist())
        if neg in seen or key in seen:
            continue
        seen.add(key)
        reps.append(p.astype(np.int64))
    V = np.array(reps, dtype=np.int64)
    signs = np.array(
        [[1] + [1 - 2 * ((j >> b) & 1) for b in range(d - 1)] for j in range(2 ** (d - 1))],
        dtype=np.int64,
    ).T  # d x 2^(d-1)
    found: dict[tuple, FullCorrelationInequality] = {}
    tuples = list(s.tuples())
    for subset in combinations(range(len(V)), d):
        M = V[list(subset)]
        det, adj = bareiss_solve(M.tolist(), np.eye(d, dtype=np.int64).tolist())
        if det == 0:
            continue
        adj = np.array(adj, dtype=np.int64)  # M @ adj == det * I
        num = adj @ signs  # alpha = num / det, one column per sign pattern
        vals = np.abs(V @ num)
        ok = np.all(vals <= abs(det), axis=0)
        for j in np.nonzero(ok)[0]:
            for sgn in (1, -1):
                alpha = [Fraction(int(sgn * x), det) for x in num[:, j]]
                key = tuple(alpha)
                if key not in found:
                    found[key] = FullCorrelationInequality(s, dict(zip(tuples, alpha)))
    facets = [found[k] for k in sorted(found)]
    result = FacetList(s, facets)
    if classify:
        from .equivalence import classify_orbits

        result.orbit_classes = classify_orbits(facets)
    return result
