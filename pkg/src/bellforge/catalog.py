"""Named inequalities shipped as data, with expected properties and build recipes.

Entries live in ``data/v1/<name>.json`` (inequality documents); expected
values and recipes live in ``data/v1/manifest.json``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from math import isclose

from .core import (
    BellForgeError,
    FullCorrelationInequality,
    format_fraction,
    from_document,
    parse_fraction,
    to_document,
)

DATA_VERSION = "v1"
NAMES = ("chsh", "wzg3", "wzg4", "wzg5", "wzg6", "wzg7", "wzg8", "i44")
QUANTUM_TOL = 1e-6


class UnknownEntry(BellForgeError, KeyError):
    def __str__(self):
        return f"unknown catalog entry {self.args[0]!r}; known: {', '.join(NAMES)}"


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    inequality: FullCorrelationInequality
    expected: dict
    recipe: list = field(default_factory=list)
    source: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "inequality": to_document(self.inequality),
            "expected": self.expected,
            "recipe": self.recipe,
            "source": self.source,
        }


def _data_dir():
    return resources.files("bellforge") / "data" / DATA_VERSION


def _manifest() -> dict:
    return json.loads((_data_dir() / "manifest.json").read_text())


def list_names() -> list[str]:
    return list(NAMES)


def get(name: str) -> CatalogEntry:
    if name not in NAMES:
        raise UnknownEntry(name)
    doc = json.loads((_data_dir() / f"{name}.json").read_text())
    meta = _manifest()["entries"][name]
    return CatalogEntry(
        name, from_document(doc), meta["expected"], meta.get("recipe", []), meta.get("source", {})
    )


# --- transcription ---------------------------------------------------------------------

def _terms(pattern: str, coeff: Fraction) -> list:
    """'+111 -122' -> [((0,0,0), c), ((0,1,1), -c)] (digits are 1-based settings)."""
    out = []
    for word in pattern.split():
        sign = -1 if word[0] == "-" else 1
        out.append((tuple(int(ch) - 1 for ch in word.lstrip("+-")), sign * coeff))
    return out


HALF = Fraction(1, 2)

DISPLAYED_FORMS = {
    "chsh": ((2, 2), "+11 +12 +21 -22"),
    "wzg3": ((2,) * 3, "+111 -122 -212 -221"),
    "wzg4": ((2,) * 4, "+1111 +1222 +2121 -2212"),
    "wzg5": ((2,) * 5, "+11111 +22212 -22121 +11222"),
    "wzg6": ((2,) * 6, "+111111 -221211 +222122 +112222"),
    "wzg7": ((2,) * 7, "+1111111 -2212111 +2221222 +1122222"),
    "wzg8": ((2,) * 8, "+11111111 -22121111 +22212222 +11222222"),
}

# I_44 in sixths, first index Alice, second Bob
I44_SIXTHS = {
    (1, 1): -2, (2, 1): 1, (3, 1): 1, (1, 2): 1, (1, 3): 1, (2, 2): 1, (2, 3): 1,
    (3, 2): 1, (3, 3): 1, (4, 2): 1, (4, 3): -1, (2, 4): 1, (3, 4): -1,
}

# the four trivial faces of F_4 lifted to I_44, as thirds of b_1..b_4
I44_FACES_THIRDS = [(0, 2, 1, 0), (-1, 1, 0, -1), (-1, 1, 0, 1), (0, 1, 2, 0)]


def transcribed(name: str) -> FullCorrelationInequality:
    """The inequality with coefficients exactly as published."""
    if name == "i44":
        terms = {(a - 1, b - 1): Fraction(v, 6) for (a, b), v in I44_SIXTHS.items()}
        return FullCorrelationInequality((4, 4), terms, 1, name)
    sp, pattern = DISPLAYED_FORMS[name]
    return FullCorrelationInequality(sp, _terms(pattern, HALF), 1, name)


def i44_faces() -> list[FullCorrelationInequality]:
    return [
        FullCorrelationInequality((4,), {(k,): Fraction(v, 3) for k, v in enumerate(row)})
        for row in I44_FACES_THIRDS
    ]


def single_party_facets(settings: int = 2) -> list[FullCorrelationInequality]:
    return [FullCorrelationInequality((settings,), {(k,): 1}) for k in range(settings)]


# --- recipes ---------------------------------------------------------------------------

def run_recipe(recipe: list) -> FullCorrelationInequality:
    """Replay a construction recipe with the lift engine."""
    from .lift import chsh_extend, compose_lift, four_term_extend

    current = None
    for step in recipe:
        op = step["op"]
        if op == "chsh_extend":
            b1, b2 = (from_document(d) for d in step["faces"])
            current = chsh_extend(b1, b2)
        elif op == "compose_lift":
            current = compose_lift([from_document(d) for d in step["faces"]], verify=False).inequality
        elif op == "four_term_extend":
            pair = [tuple(k - 1 for k in key) for key in step["flip"]]
            current = four_term_extend(current, pair)
        else:
            raise ValueError(f"unknown recipe step {op!r}")
    return current


def discover_chain(last: int = 8) -> list:
    """For each step CHSH -> wzg3 -> ... find the flip pairs that land in the next entry's orbit."""
    from .equivalence import equivalent
    from .lift import NonFaceInput, chsh_extend, flip_pairs, four_term_extend

    a1, a2 = single_party_facets(2)
    current = chsh_extend(a1, a2)
    chain = []
    for n in range(3, last + 1):
        target = transcribed(f"wzg{n}")
        hits = []
        for pair in flip_pairs(current):
            try:
                out = four_term_extend(current, pair)
            except NonFaceInput:
                continue
            if equivalent(out, target):
                hits.append(pair)
        if not hits:
            raise RuntimeError(f"no flip pair reaches wzg{n}")
        chain.append(hits)
        current = four_term_extend(current, hits[0])
    return chain


def build_manifest() -> dict:
    """Regenerate manifest.json contents (expected values + recipes)."""
    from .quantum import maximize_ghz_violation

    a1, a2 = single_party_facets(2)
    start = {"op": "chsh_extend", "faces": [to_document(a1), to_document(a2)]}
    chain = discover_chain()
    entries = {}
    published = {"lr_bound": "published", "algebraic_bound": "published",
                 "violation_factor": "published", "v_crit": "computed", "is_facet": "published"}
    computed_quantum = {"lr_bound": "published", "algebraic_bound": "computed",
                        "violation_factor": "computed", "v_crit": "computed", "is_facet": "published"}
    steps = [start]
    for name in NAMES:
        ineq = transcribed(name)
        if name == "chsh":
            recipe = [start]
            prov = dict(computed_quantum)
        elif name == "i44":
            recipe = [{"op": "compose_lift", "faces": [to_document(f) for f in i44_faces()]}]
            prov = dict(computed_quantum)
        else:
            n = int(name[3:])
            pair = chain[n - 3][0]
            steps = steps + [{"op": "four_term_extend", "flip": [[k + 1 for k in key] for key in pair]}]
            recipe = list(steps)
            prov = dict(published)
            if n == 8:
                prov["v_crit"] = "published"
        q = maximize_ghz_violation(ineq)
        expected = {
            "lr_bound": "1/1",
            "algebraic_bound": f"{ineq.algebraic_value().numerator}/{ineq.algebraic_value().denominator}",
            "violation_factor": float(f"{q.violation_factor:.12g}"),
            "v_crit": float(f"{q.critical_visibility:.12g}"),
            "is_facet": True,
        }
        entries[name] = {"expected": expected, "recipe": recipe, "source": prov}
    return {"version": 1, "entries": entries}


def write_data(directory=None) -> None:
    from pathlib import Path

    d = Path(directory) if directory else Path(str(_data_dir()))
    d.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        doc = to_document(transcribed(name))
        (d / f"{name}.json").write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    (d / "manifest.json").write_text(json.dumps(build_manifest(), sort_keys=True, indent=1) + "\n")


# --- checks ----------------------------------------------------------------------------

def check(name: str) -> dict:
    """Re-derive every expected property of an entry; one result per field."""
    from .equivalence import canonical_form
    from .polytope import lr_bound, tightness
    from .quantum import maximize_ghz_violation

    entry = get(name)
    ineq = entry.inequality
    exp = entry.expected
    lr = lr_bound(ineq)
    rep = tightness(ineq)
    q = maximize_ghz_violation(ineq, lr=lr)
    results = {
        "lr_bound": (format_fraction(lr), exp["lr_bound"], lr == parse_fraction(exp["lr_bound"], "lr_bound")),
        "algebraic_bound": (
            format_fraction(ineq.algebraic_value()),
            exp["algebraic_bound"],
            ineq.algebraic_value() == parse_fraction(exp["algebraic_bound"], "algebraic_bound"),
        ),
        "is_facet": (rep.is_facet, exp["is_facet"], rep.is_facet == exp["is_facet"]),
        "violation_factor": (
            q.violation_factor,
            exp["violation_factor"],
            isclose(q.violation_factor, exp["violation_factor"], rel_tol=0, abs_tol=QUANTUM_TOL),
        ),
        "v_crit": (
            q.critical_visibility,
            exp["v_crit"],
            isclose(q.critical_visibility, exp["v_crit"], rel_tol=0, abs_tol=QUANTUM_TOL),
        ),
    }
    if entry.recipe:
        rebuilt = run_recipe(entry.recipe)
        same = canonical_form(rebuilt).terms == canonical_form(ineq).terms
        results["recipe"] = (same, True, same)
    return {
        key: {"observed": _jsonable(o), "expected": _jsonable(e), "pass": bool(ok)}
        for key, (o, e, ok) in results.items()
    }


def _jsonable(x):
    if isinstance(x, float):
        return float(f"{x:.12g}")
    return x
