"""Splitting a face along one party and lifting faces to one more party.

For a party with N settings, an expression I = sum_k c_k f_k is rewritten as

    I = ((-(N-3) c_1 + c_2 + ... + c_N) / 2) S_1 + sum_{k>=2} ((c_1 - c_k) / 2) S_k

with S_1 = f_1 + ... + f_N and S_k = S_1 - 2 f_k, i.e. the values of I at the
setting vectors (1, ..., 1) and (1, .., -1 at k, .., 1).  Lifting runs the same
formula forwards, with N faces B_k of the smaller polytope in place of S_k.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

from .core import BellForgeError, FullCorrelationInequality, Scenario, ScenarioMismatch
from .polytope import CapExceeded, TightnessReport, lr_bound, tightness

HALF = Fraction(1, 2)


class LiftInputError(BellForgeError, ValueError):
    pass


class NonFaceInput(LiftInputError):
    pass


@dataclass(frozen=True)
class PartyDecomposition:
    party: int
    scenario: Scenario  # scenario of the decomposed inequality
    components: tuple[FullCorrelationInequality, ...]

    @property
    def settings(self) -> int:
        return len(self.components)

    def to_dict(self) -> dict:
        from .core import to_document

        return {
            "party": self.party + 1,
            "settings": list(self.scenario.settings_per_party),
            "components": [to_document(f) for f in self.components],
        }


def decompose(ineq: FullCorrelationInequality, party: int) -> PartyDecomposition:
    """Collect the terms by the setting of ``party``; f_k drops that factor."""
    s = ineq.scenario
    if not 0 <= party < s.n_parties:
        raise ValueError(f"party {party} out of range for scenario {s}")
    rest = s.remove_party(party)
    buckets: list[dict] = [{} for _ in range(s.settings_per_party[party])]
    for t, c in ineq.terms.items():
        buckets[t[party]][t[:party] + t[party + 1 :]] = c
    return PartyDecomposition(
        party, s, tuple(FullCorrelationInequality(rest, b) for b in buckets)
    )


def recompose(d: PartyDecomposition) -> FullCorrelationInequality:
    """sum_k c_k f_k with the party's variables put back in place."""
    terms = {}
    for k, f in enumerate(d.components):
        for t, c in f.terms.items():
            terms[t[: d.party] + (k,) + t[d.party :]] = c
    return FullCorrelationInequality(d.scenario, terms)


def structure_values(d: PartyDecomposition) -> list[FullCorrelationInequality]:
    """[S_1, ..., S_N]: the expression at each of the N special setting vectors."""
    fs = d.components
    total = fs[0]
    for f in fs[1:]:
        total = total + f
    return [total] + [total - 2 * f for f in fs[1:]]


def _lift(parts: Sequence[FullCorrelationInequality], party: int) -> FullCorrelationInequality:
    """Expand the structure formula with ``parts`` as S_1..S_N, new party at ``party``."""
    n_settings = len(parts)
    first, rest = parts[0], parts[1:]
    comps = [first * Fraction(-(n_settings - 3), 2)]
    for b in rest:
        comps[0] = comps[0] + b * HALF
    comps += [(first - b) * HALF for b in rest]
    base = first.scenario
    sp = list(base.settings_per_party)
    sp.insert(party, n_settings)
    d = PartyDecomposition(party, Scenario(tuple(sp)), tuple(comps))
    return recompose(d)


def structure_identity(d: PartyDecomposition) -> FullCorrelationInequality:
    """Rebuild the original inequality from its structure values."""
    return _lift(structure_values(d), d.party)


@dataclass(frozen=True)
class LiftResult:
    inequality: FullCorrelationInequality
    verified: bool
    report: TightnessReport | None = None

    @property
    def is_face(self) -> bool | None:
        return self.report.is_face if self.report else None

    @property
    def is_facet(self) -> bool | None:
        return self.report.is_facet if self.report else None

    def to_dict(self) -> dict:
        from .core import to_document

        return {
            "inequality": to_document(self.inequality),
            "verified": self.verified,
            "report": self.report.to_dict() if self.report else None,
        }


def _check_faces(faces: Sequence[FullCorrelationInequality]):
    if not faces:
        raise LiftInputError("need at least one face")
    s = faces[0].scenario
    for b in faces:
        if b.scenario != s:
            raise ScenarioMismatch(f"faces live on {s} and {b.scenario}")
        if b.bound != 1:
            raise LiftInputError(f"face bound must be 1, got {b.bound}")


def compose_lift(
    faces: Sequence[FullCorrelationInequality], verify: bool = True, cap: int | None = None
) -> LiftResult:
    """Combine N faces B_1..B_N into an inequality with one more party (appended last).

    N = 1 gives c_1 B_1.  With ``verify`` the all-vertex bound and the facet
    rank are computed; when the scenario is beyond the enumeration cap the
    result comes back with ``verified=False``.
    """
    _check_faces(faces)
    ineq = _lift(list(faces), faces[0].scenario.n_parties)
    if not verify:
        return LiftResult(ineq, False)
    try:
        report = tightness(ineq, cap=cap)
    except CapExceeded:
        return LiftResult(ineq, False)
    return LiftResult(ineq, True, report)


def chsh_extend(b1: FullCorrelationInequality, b2: FullCorrelationInequality) -> FullCorrelationInequality:
    """1/2 (c_1 (B_1 + B_2) + c_2 (B_1 - B_2)) with c the appended party."""
    _check_faces([b1, b2])
    return _lift([b1, b2], b1.scenario.n_parties)


@dataclass(frozen=True)
class ConverseReport:
    b1: FullCorrelationInequality
    b2: FullCorrelationInequality
    report1: TightnessReport
    report2: TightnessReport

    @property
    def both_facets(self) -> bool:
        return self.report1.is_facet and self.report2.is_facet


def split_two_setting(ineq: FullCorrelationInequality, party: int | None = None):
    """Inverse of ``chsh_extend``: (B_1, B_2) = (f_1 + f_2, f_1 - f_2)."""
    s = ineq.scenario
    party = s.n_parties - 1 if party is None else party
    if s.settings_per_party[party] != 2:
        raise LiftInputError(f"party {party} has {s.settings_per_party[party]} settings, need 2")
    b1, b2 = structure_values(decompose(ineq, party))
    return b1, b2


def converse_check(ineq: FullCorrelationInequality, party: int | None = None, cap: int | None = None) -> ConverseReport:
    b1, b2 = split_two_setting(ineq, party)
    return ConverseReport(b1, b2, tightness(b1, cap=cap), tightness(b2, cap=cap))


def four_term_extend(
    ineq: FullCorrelationInequality, flip_pair, cap: int | None = None
) -> FullCorrelationInequality:
    """Lift a 4-term inequality against a copy with two terms negated.

    The result keeps four terms: the unflipped pair times the new party's
    first setting, the flipped pair (original signs) times the second.
    Raises NonFaceInput when the sign-flipped copy is not a face.
    """
    if ineq.term_count() != 4:
        raise LiftInputError(f"need exactly 4 terms, got {ineq.term_count()}")
    pair = {tuple(t) for t in flip_pair}
    if len(pair) != 2 or not pair <= set(ineq.terms):
        raise LiftInputError(f"flip pair {sorted(pair)} is not two of the inequality's terms")
    flipped = FullCorrelationInequality(
        ineq.scenario, {t: (-c if t in pair else c) for t, c in ineq.terms.items()}
    )
    lr = lr_bound(flipped, cap=cap)
    if lr != 1:
        raise NonFaceInput(f"sign-flipped copy has LR maximum {lr}, not a face")
    return chsh_extend(ineq, flipped)


def flip_pairs(ineq: FullCorrelationInequality) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    return list(combinations(ineq.terms, 2))


def find_face_signs(ineq: FullCorrelationInequality, party: int, cap: int | None = None):
    """Sign flips of ``party``'s settings making some structure value a face.

    Returns ``(signs, k, S_k)`` for the first hit in sign-vector order, or
    None if no choice works.
    """
    s = ineq.scenario
    m = s.settings_per_party[party]
    for signs in product((1, -1), repeat=m):
        flipped = FullCorrelationInequality(
            s, {t: c * signs[t[party]] for t, c in ineq.terms.items()}
        )
        for k, sv in enumerate(structure_values(decompose(flipped, party))):
            if sv.terms and lr_bound(sv, cap=cap) == 1:
                return signs, k, sv
    return None
