"""Relabelling group (sign flips, setting and party permutations) and canonical forms.

A group element maps new variables to old ones:
``Y[q][j] = signs[q][j] * X[party_perm[q]][setting_perms[q][j]]``.
"""
from __future__ import annotations

import random as _random
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Mapping, Sequence

from .core import (
    BellForgeError,
    FullCorrelationInequality,
    GeneralInequality,
    Scenario,
    ScenarioMismatch,
)

CANONICAL_MAX_SETTINGS = 20


class CanonicalGuardExceeded(BellForgeError):
    def __init__(self, total: int, cap: int):
        super().__init__(f"canonical form needs sum of settings <= {cap}, got {total}")
        self.required = total
        self.cap = cap


@dataclass(frozen=True)
class GroupElement:
    party_perm: tuple[int, ...]
    setting_perms: tuple[tuple[int, ...], ...]
    signs: tuple[tuple[int, ...], ...]

    @classmethod
    def identity(cls, s: Scenario) -> "GroupElement":
        sp = s.settings_per_party
        return cls(
            tuple(range(len(sp))),
            tuple(tuple(range(m)) for m in sp),
            tuple((1,) * m for m in sp),
        )

    @classmethod
    def random(cls, s: Scenario, rng: _random.Random) -> "GroupElement":
        sp = s.settings_per_party
        perm = list(range(len(sp)))
        # shuffle within groups of equal setting count
        for m in set(sp):
            idx = [p for p in perm if sp[p] == m]
            shuffled = idx[:]
            rng.shuffle(shuffled)
            for a, b in zip(idx, shuffled):
                perm[a] = b
        setting_perms, signs = [], []
        for q in range(len(sp)):
            m = sp[q]
            sp_q = list(range(m))
            rng.shuffle(sp_q)
            setting_perms.append(tuple(sp_q))
            signs.append(tuple(rng.choice((1, -1)) for _ in range(m)))
        return cls(tuple(perm), tuple(setting_perms), tuple(signs))

    def compatible(self, s: Scenario) -> bool:
        sp = s.settings_per_party
        n = len(sp)
        if len(self.party_perm) != n or sorted(self.party_perm) != list(range(n)):
            return False
        for q in range(n):
            m = sp[q]
            if sp[self.party_perm[q]] != m:
                return False
            if sorted(self.setting_perms[q]) != list(range(m)) or len(self.signs[q]) != m:
                return False
            if any(x not in (1, -1) for x in self.signs[q]):
                return False
        return True

    def compose(self, h: "GroupElement") -> "GroupElement":
        """The element acting as ``self`` after ``h``."""
        pp, sp, sg = [], [], []
        for q, r in enumerate(self.party_perm):
            pp.append(h.party_perm[r])
            sp.append(tuple(h.setting_perms[r][j] for j in self.setting_perms[q]))
            sg.append(
                tuple(
                    self.signs[q][j] * h.signs[r][self.setting_perms[q][j]]
                    for j in range(len(self.signs[q]))
                )
            )
        return GroupElement(tuple(pp), tuple(sp), tuple(sg))

    def inverse(self) -> "GroupElement":
        n = len(self.party_perm)
        pp = [0] * n
        sp: list = [None] * n
        sg: list = [None] * n
        for q, r in enumerate(self.party_perm):
            pp[r] = q
            inv = [0] * len(self.setting_perms[q])
            for j, i in enumerate(self.setting_perms[q]):
                inv[i] = j
            sp[r] = tuple(inv)
            sg[r] = tuple(self.signs[q][inv[i]] for i in range(len(inv)))
        return GroupElement(tuple(pp), tuple(sp), tuple(sg))


def act(g: GroupElement, ineq: FullCorrelationInequality) -> FullCorrelationInequality:
    s = ineq.scenario
    if not g.compatible(s):
        raise ScenarioMismatch(f"group element incompatible with scenario {s}")
    n = s.n_parties
    inv_settings = []
    for q in range(n):
        inv = [0] * len(g.setting_perms[q])
        for j, i in enumerate(g.setting_perms[q]):
            inv[i] = j
        inv_settings.append(inv)
    terms = {}
    for t, c in ineq.terms.items():
        o = tuple(inv_settings[q][t[g.party_perm[q]]] for q in range(n))
        sign = 1
        for q, j in enumerate(o):
            sign *= g.signs[q][j]
        terms[o] = c * sign
    return FullCorrelationInequality(s, terms, ineq.bound, ineq.name)


# --- canonical form -------------------------------------------------------------------
#
# The canonical form is the orbit element whose dense coefficient vector
# (row-major, party 0 slowest) is lexicographically smallest.  Sparse vectors
# are compared through ``_sort_key``; the search fixes which max-modulus term
# lands at the origin, then assigns output parties slowest-first with a
# lower bound on every completion, and finally picks signs greedily over GF(2).

_END = (1,)


def _item_key(pos: int, val: Fraction):
    # negative entries: earlier is smaller; positive entries: later is smaller
    return (0, pos, val) if val < 0 else (2, -pos, val)


def _sort_key(items) -> tuple:
    return tuple(_item_key(p, v) for p, v in items) + (_END,)


def _greedy_signs(placed, offsets) -> list[tuple[int, Fraction]]:
    """Best sign assignment for fixed positions.

    ``placed`` is a list of (position, output tuple, coefficient) sorted by
    position.  A term's sign can be chosen freely unless its variable mask is
    a GF(2) combination of earlier masks; free terms are made negative.
    """
    basis: dict[int, tuple[int, int]] = {}
    out = []
    for pos, o, c in placed:
        mask = 0
        for q, j in enumerate(o):
            mask |= 1 << (offsets[q] + j)
        want = 1 if c > 0 else 0  # parity that makes the term negative
        m, r = mask, 0
        while m:
            top = m.bit_length() - 1
            if top not in basis:
                break
            bm, br = basis[top]
            m ^= bm
            r ^= br
        if m:
            basis[m.bit_length() - 1] = (m, r ^ want)
            out.append((pos, -abs(c)))
        else:
            out.append((pos, c if r == 0 else -c))
    return out


def _party_classes(s: Scenario, terms) -> list[int]:
    """Class id per party; parties in one class are interchangeable.

    Two parties are interchangeable when their setting columns over the term
    list agree up to a bijection of settings; swapping them is then an
    automorphism that fixes every term.
    """
    n = s.n_parties
    cols = [[t[p] for t, _ in terms] for p in range(n)]
    cls = list(range(n))
    for p in range(n):
        for r in range(p):
            if cls[r] != r or s.settings_per_party[r] != s.settings_per_party[p]:
                continue
            fwd: dict[int, int] = {}
            bwd: dict[int, int] = {}
            ok = True
            for a, b in zip(cols[r], cols[p]):
                if fwd.setdefault(a, b) != b or bwd.setdefault(b, a) != a:
                    ok = False
                    break
            if ok:
                cls[p] = r
                break
    return cls


def _canonical_items(ineq: FullCorrelationInequality) -> list[tuple[int, Fraction]]:
    s = ineq.scenario
    sp = s.settings_per_party
    n = s.n_parties
    terms = list(ineq.terms.items())
    if not terms:
        return []
    offsets = s.offsets()
    strides = [1] * n
    for q in range(n - 2, -1, -1):
        strides[q] = strides[q + 1] * sp[q + 1]
    classes = _party_classes(s, terms)
    top = max(abs(c) for _, c in terms)
    best: list = [None, None]  # key, items

    def lower_bound_key(assign, depth):
        # blocks share the output prefix of parties 0..depth-1; inside a block
        # the best conceivable layout is all negative, largest modulus first
        blocks: dict[int, list[Fraction]] = {}
        for t, c in terms:
            base = 0
            for q in range(depth):
                r, inv = assign[q]
                base += inv[t[r]] * strides[q]
            blocks.setdefault(base, []).append(abs(c))
        items = []
        for base in sorted(blocks):
            for k, a in enumerate(sorted(blocks[base], reverse=True)):
                items.append((base + k, -a))
        return _sort_key(items)

    def leaf(assign):
        placed = []
        for t, c in terms:
            o = tuple(assign[q][1][t[assign[q][0]]] for q in range(n))
            pos = sum(o[q] * strides[q] for q in range(n))
            placed.append((pos, o, c))
        placed.sort(key=lambda x: x[0])
        items = _greedy_signs(placed, offsets)
        key = _sort_key(items)
        if best[0] is None or key < best[0]:
            best[0], best[1] = key, items

    def search(t0, assign, used):
        depth = len(assign)
        if depth == n:
            leaf(assign)
            return
        if best[0] is not None and depth and lower_bound_key(assign, depth) >= best[0]:
            return
        m = sp[depth]
        tried_classes = set()
        for r in range(n):
            if r in used or sp[r] != m or classes[r] in tried_classes:
                continue
            tried_classes.add(classes[r])
            others = [k for k in range(m) if k != t0[r]]
            for rest in permutations(others):
                order = (t0[r],) + rest  # output setting j <- input setting order[j]
                inv = [0] * m
                for j, i in enumerate(order):
                    inv[i] = j
                assign.append((r, inv))
                used.add(r)
                search(t0, assign, used)
                used.discard(r)
                assign.pop()

    for t0, c0 in terms:
        if abs(c0) == top:
            search(t0, [], set())
    return best[1]


def canonical_form(ineq: FullCorrelationInequality, guard: int = CANONICAL_MAX_SETTINGS) -> FullCorrelationInequality:
    """Lexicographically smallest dense coefficient vector in the orbit of ``ineq``."""
    s = ineq.scenario
    if s.total_settings() > guard:
        raise CanonicalGuardExceeded(s.total_settings(), guard)
    tuples = list(s.tuples())
    items = _canonical_items(ineq)
    return FullCorrelationInequality(s, {tuples[p]: v for p, v in items}, ineq.bound, ineq.name)


def orbit_fingerprint(ineq: FullCorrelationInequality) -> dict:
    """Cheap orbit invariants for scenarios beyond the canonical-form guard."""
    from .polytope import lr_bound

    return {
        "scenario": sorted(ineq.scenario.settings_per_party),
        "abs_coefficients": sorted(abs(c) for c in ineq.terms.values()),
        "term_count": ineq.term_count(),
        "lr_bound": lr_bound(ineq),
    }


def equivalent(a: FullCorrelationInequality, b: FullCorrelationInequality) -> bool:
    """Same orbit under the relabelling group (scenarios must match exactly)."""
    if a.scenario != b.scenario or a.bound != b.bound:
        return False
    return canonical_form(a).terms == canonical_form(b).terms


def classify_orbits(ineqs: Sequence[FullCorrelationInequality]) -> list[list[int]]:
    """Group indices by canonical form, in order of first appearance."""
    groups: dict = {}
    for i, ineq in enumerate(ineqs):
        key = (ineq.scenario, ineq.bound, tuple(canonical_form(ineq).terms.items()))
        groups.setdefault(key, []).append(i)
    return list(groups.values())


# --- CH <-> CHSH conversion ----------------------------------------------------------

def dehomogenize(ineq, fixed: Mapping[int, int] | None = None) -> GeneralInequality:
    """Substitute the outcome +1 for one chosen setting of each listed party.

    The chosen setting disappears from the scenario (later indices shift
    down); a party left without settings disappears too.
    """
    fixed = dict(fixed or {})
    g = ineq if isinstance(ineq, GeneralInequality) else GeneralInequality.from_full(ineq)
    s = g.scenario
    for p, k in fixed.items():
        if not 0 <= p < s.n_parties:
            raise ValueError(f"party {p} out of range for scenario {s}")
        if not 0 <= k < s.settings_per_party[p]:
            raise ValueError(f"setting {k} out of range for party {p}")
    keep = [p for p in range(s.n_parties) if not (p in fixed and s.settings_per_party[p] == 1)]
    new_sp = tuple(s.settings_per_party[p] - (1 if p in fixed else 0) for p in keep)
    terms: dict = {}
    constant = g.constant
    for t, c in g.terms.items():
        key = []
        for p in keep:
            k = t[p]
            if p in fixed and k >= 0:
                k = -1 if k == fixed[p] else (k - 1 if k > fixed[p] else k)
            key.append(k)
        # a removed party can only carry its fixed setting or be absent
        if all(k == -1 for k in key):
            constant += c
        else:
            terms[tuple(key)] = terms.get(tuple(key), 0) + c
    return GeneralInequality(Scenario(new_sp), terms, constant, g.bound, g.name)


def auxiliary_settings(g: GeneralInequality) -> dict[int, int]:
    """Parties that receive an auxiliary setting under ``homogenize``, with its index."""
    s = g.scenario
    need = set()
    if g.constant != 0:
        need = set(range(s.n_parties))
    for t in g.terms:
        need.update(p for p, k in enumerate(t) if k < 0)
    return {p: s.settings_per_party[p] for p in sorted(need)}


def homogenize(g: GeneralInequality) -> FullCorrelationInequality:
    """Replace every missing party in a term by that party's auxiliary setting.

    The auxiliary setting is appended after the party's existing settings; a
    party present in every term (and no constant) gets none.
    """
    aux = auxiliary_settings(g)
    s = g.scenario
    sp = tuple(m + (1 if p in aux else 0) for p, m in enumerate(s.settings_per_party))
    terms: dict = {}
    for t, c in g.terms.items():
        key = tuple(aux[p] if k < 0 else k for p, k in enumerate(t))
        terms[key] = terms.get(key, 0) + c
    if g.constant != 0:
        key = tuple(aux[p] for p in range(s.n_parties))
        terms[key] = terms.get(key, 0) + g.constant
    return FullCorrelationInequality(Scenario(sp), terms, g.bound, g.name)
