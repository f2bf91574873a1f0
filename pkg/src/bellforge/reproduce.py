"""Acceptance checks for the published claims, one function per criterion.

Each ``criterion_N`` returns a ``CriterionResult``; ``run_all`` collects them
in order.  Sub-checks are kept individually so a failure names its cause.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from . import catalog
from .core import FullCorrelationInequality, GeneralInequality, Scenario
from .equivalence import GroupElement, act, auxiliary_settings, canonical_form, dehomogenize, equivalent, homogenize
from .lift import chsh_extend, compose_lift, decompose, four_term_extend, recompose, split_two_setting, structure_identity
from .polytope import enumerate_facets, general_lr_bound, lr_bound, tightness
from .quantum import max_eigenvalue_bound, maximize_ghz_violation

WZG = [f"wzg{n}" for n in range(3, 9)]
QUANTUM_TOL = 1e-6


@dataclass
class CriterionResult:
    number: int
    claim: str
    checks: dict = field(default_factory=dict)
    seconds: float = 0.0
    time_limit: float | None = None

    @property
    def passed(self) -> bool:
        in_time = self.time_limit is None or self.seconds <= self.time_limit
        return in_time and all(self.checks.values())

    def failures(self) -> list[str]:
        out = [k for k, ok in self.checks.items() if not ok]
        if self.time_limit is not None and self.seconds > self.time_limit:
            out.append(f"runtime {self.seconds:.1f}s > {self.time_limit}s")
        return out

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        text = f"criterion {self.number} {verdict}: {self.claim} ({self.seconds:.2f}s)"
        if not self.passed:
            text += " -- failed: " + "; ".join(self.failures())
        return text

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "claim": self.claim,
            "pass": self.passed,
            "seconds": round(self.seconds, 3),
            "time_limit": self.time_limit,
            "checks": dict(self.checks),
        }


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def _four_term(name: str) -> FullCorrelationInequality:
    return catalog.get(name).inequality


def criterion_1() -> CriterionResult:
    r = CriterionResult(1, "four-term inequalities: LR bound 1, algebraic bound 2", time_limit=5.0)
    with _Timer() as t:
        for name in WZG:
            ineq = _four_term(name)
            r.checks[f"{name} lr_bound == 1"] = lr_bound(ineq) == 1
            r.checks[f"{name} algebraic_bound == 2"] = ineq.algebraic_value() == 2
    r.seconds = t.seconds
    return r


def criterion_2() -> CriterionResult:
    r = CriterionResult(2, "four-term inequalities and I44 are facets (exact rank)", time_limit=120.0)
    with _Timer() as t:
        for name in WZG:
            ineq = _four_term(name)
            rep = tightness(ineq, method="exact")
            n = ineq.scenario.n_parties
            r.checks[f"{name} facet, rank {2**n}"] = rep.is_facet and rep.rank == 2**n
        rep = tightness(_four_term("i44"), method="exact")
        r.checks["i44 facet, rank 16"] = rep.is_facet and rep.rank == 16
    r.seconds = t.seconds
    return r


def criterion_3(restarts: int = 32, seed: int = 0) -> CriterionResult:
    r = CriterionResult(3, "GHZ violation factor 2 and v_crit 0.5; CHSH sqrt(2)", time_limit=30.0)
    with _Timer() as t:
        for name in WZG:
            q = maximize_ghz_violation(_four_term(name), restarts=restarts, seed=seed)
            r.checks[f"{name} factor 2"] = abs(q.violation_factor - 2) <= QUANTUM_TOL
            r.checks[f"{name} v_crit 0.5"] = abs(q.critical_visibility - 0.5) <= QUANTUM_TOL
            r.checks[f"{name} eigenvalue bound matches"] = abs(q.max_eigenvalue - q.quantum_value) <= QUANTUM_TOL
        chsh = _four_term("chsh")
        q = maximize_ghz_violation(chsh, restarts=restarts, seed=seed)
        root2 = 2**0.5
        r.checks["chsh value sqrt(2)"] = abs(q.quantum_value - root2) <= QUANTUM_TOL
        r.checks["chsh eigen-oracle sqrt(2)"] = abs(max_eigenvalue_bound(chsh, q.settings) - root2) <= QUANTUM_TOL
    r.seconds = t.seconds
    return r


def _passes_1_2(ineq: FullCorrelationInequality) -> bool:
    rep = tightness(ineq)
    return lr_bound(ineq) == 1 and rep.is_facet


def criterion_4() -> CriterionResult:
    r = CriterionResult(4, "construction chain regenerates CHSH, the four-term family and I44")
    with _Timer() as t:
        a1, a2 = catalog.single_party_facets(2)
        current = chsh_extend(a1, a2)
        r.checks["chsh regenerated"] = equivalent(current, _four_term("chsh"))
        r.checks["chsh passes 1-2"] = _passes_1_2(current)
        recipe = catalog.get("wzg8").recipe
        flips = [step["flip"] for step in recipe if step["op"] == "four_term_extend"]
        for name, flip in zip(WZG, flips):
            current = four_term_extend(current, [tuple(k - 1 for k in key) for key in flip])
            target = _four_term(name)
            r.checks[f"{name} regenerated"] = equivalent(current, target)
            r.checks[f"{name} passes 1-2"] = (
                _passes_1_2(current) and current.algebraic_value() == 2
            )
        lifted = compose_lift(catalog.i44_faces())
        r.checks["i44 regenerated"] = equivalent(lifted.inequality, _four_term("i44"))
        r.checks["i44 passes 1-2"] = bool(lifted.verified and lifted.is_facet)
    r.seconds = t.seconds
    return r


def _random_fraction(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-9, 9), rng.randint(1, 6))


def scenarios_up_to(max_parties: int, max_settings: int):
    """Scenarios with settings listed in non-decreasing order."""
    for n in range(1, max_parties + 1):
        for sp in product(range(1, max_settings + 1), repeat=n):
            if list(sp) == sorted(sp):
                yield Scenario(sp)


def criterion_5(samples: int = 200, seed: int = 0) -> CriterionResult:
    r = CriterionResult(5, "structure identity: decompose/reconstruct is exact")
    rng = random.Random(seed)
    with _Timer() as t:
        for s in scenarios_up_to(3, 3):
            ok = True
            for _ in range(samples):
                terms = {tup: _random_fraction(rng) for tup in s.tuples()}
                ineq = FullCorrelationInequality(s, terms)
                for p in range(s.n_parties):
                    d = decompose(ineq, p)
                    if recompose(d) != ineq or structure_identity(d) != ineq:
                        ok = False
            r.checks[f"scenario ({s})"] = ok
    r.seconds = t.seconds
    return r


def criterion_6() -> CriterionResult:
    """Two-setting iff on F_222 / F_22, plus the stated facet and class counts."""
    r = CriterionResult(6, "two-setting lifting iff; F22 and F222 facets", time_limit=600.0)
    with _Timer() as t:
        f22 = enumerate_facets(Scenario((2, 2)))
        f222 = enumerate_facets(Scenario((2, 2, 2)))
        r.checks["F22 has 16 facets"] = len(f22.facets) == 16
        r.checks["F222 has 256 facets"] = len(f222.facets) == 256
        facet22 = set(f22.facets)
        r.checks["every F222 facet splits into two F22 facets"] = all(
            all(b in facet22 for b in split_two_setting(f)) for f in f222.facets
        )
        facet222 = set(f222.facets)
        pairs_ok = True
        for b1, b2 in product(f22.facets, repeat=2):
            lifted = chsh_extend(b1, b2)
            if lr_bound(lifted) == 1:
                if not tightness(lifted).is_facet or lifted not in facet222:
                    pairs_ok = False
        r.checks["every valid chsh_extend of F22 facets is a facet"] = pairs_ok
        wzg3 = _four_term("wzg3")
        classes222 = [[f222.facets[i] for i in c] for c in f222.orbit_classes]
        r.checks["wzg3 among the F222 facets' classes"] = any(equivalent(c[0], wzg3) for c in classes222)
        chsh = _four_term("chsh")
        nontrivial = [c for c in f22.orbit_classes if f22.facets[c[0]].term_count() > 1]
        r.checks["CHSH is the only nontrivial F22 class"] = (
            len(nontrivial) == 1 and equivalent(f22.facets[nontrivial[0][0]], chsh)
        )
        r.checks[f"F22 in 1 class (found {len(f22.orbit_classes)})"] = len(f22.orbit_classes) == 1
        r.checks[f"F222 in 1 class (found {len(f222.orbit_classes)})"] = len(f222.orbit_classes) == 1
    r.seconds = t.seconds
    return r


def criterion_7(samples: int = 50, seed: int = 0) -> CriterionResult:
    r = CriterionResult(7, "bounds, tightness and canonical form are group invariant")
    rng = random.Random(seed)
    with _Timer() as t:
        for name in catalog.list_names():
            ineq = _four_term(name)
            lr, alg, rep = lr_bound(ineq), ineq.algebraic_value(), tightness(ineq)
            canon = canonical_form(ineq)
            ok = canonical_form(canon) == canon
            for _ in range(samples):
                g = GroupElement.random(ineq.scenario, rng)
                img = act(g, ineq)
                ok &= lr_bound(img) == lr
                ok &= img.algebraic_value() == alg
                ok &= tightness(img) == rep
                ok &= canonical_form(img) == canon
            r.checks[name] = bool(ok)
    r.seconds = t.seconds
    return r


def random_general(rng: random.Random, max_parties: int = 3, max_settings: int = 3) -> GeneralInequality:
    n = rng.randint(1, max_parties)
    sp = tuple(rng.randint(1, max_settings) for _ in range(n))
    keys = [k for k in product(*[range(-1, m) for m in sp]) if any(x >= 0 for x in k)]
    chosen = rng.sample(keys, rng.randint(1, min(6, len(keys))))
    constant = _random_fraction(rng) if rng.random() < 0.5 else 0
    return GeneralInequality(sp, {k: _random_fraction(rng) for k in chosen}, constant, 1)


def criterion_8(samples: int = 100, seed: int = 0) -> CriterionResult:
    r = CriterionResult(8, "homogenize/dehomogenize round trip; dehomogenization keeps validity")
    rng = random.Random(seed)
    with _Timer() as t:
        ok = True
        for _ in range(samples):
            g = random_general(rng)
            ok &= dehomogenize(homogenize(g), auxiliary_settings(g)) == g
        r.checks[f"round trip on {samples} random inequalities"] = bool(ok)
        for s in scenarios_up_to(2, 3):
            valid = True
            for _ in range(10):
                terms = {tup: _random_fraction(rng) for tup in s.tuples()}
                lr = lr_bound(FullCorrelationInequality(s, terms))
                if lr <= 0:
                    continue
                ineq = FullCorrelationInequality(s, terms, lr)
                for fix in _fix_choices(s):
                    valid &= general_lr_bound(dehomogenize(ineq, fix)) <= ineq.bound
            r.checks[f"validity kept on ({s})"] = bool(valid)
    r.seconds = t.seconds
    return r


def _fix_choices(s: Scenario):
    """Every way of fixing one setting for a non-empty subset of parties."""
    options = [[None] + list(range(m)) for m in s.settings_per_party]
    for choice in product(*options):
        fix = {p: k for p, k in enumerate(choice) if k is not None}
        if fix:
            yield fix


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def run_all(progress=None) -> list[CriterionResult]:
    results = []
    for fn in CRITERIA:
        res = fn()
        if progress:
            progress(res)
        results.append(res)
    return results


def table(results) -> dict:
    return {
        "all_pass": all(r.passed for r in results),
        "criteria": [r.to_dict() for r in results],
    }
