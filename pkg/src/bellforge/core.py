"""Scenarios, exact-rational inequality types and the JSON interchange format.

Setting indices are 0-based inside the library and 1-based in JSON documents.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import lcm, prod
from typing import Iterable, Iterator, Mapping

import numpy as np

Tuple = tuple[int, ...]


class BellForgeError(Exception):
    """Base class for library errors."""


class ScenarioMismatch(BellForgeError, ValueError):
    pass


class ParseError(BellForgeError, ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # floats only enter through user code; keep the exact binary value
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class Scenario:
    """Number of dichotomic settings for each party, e.g. ``Scenario((2, 2, 2))``.

    A zero-party scenario is allowed as the target of a one-party
    decomposition; it has a single (empty) setting tuple.
    """

    settings_per_party: tuple[int, ...]

    def __post_init__(self):
        sp = tuple(int(m) for m in self.settings_per_party)
        if any(m < 1 for m in sp):
            raise ValueError(f"every party needs at least one setting, got {sp}")
        object.__setattr__(self, "settings_per_party", sp)

    @classmethod
    def of(cls, *settings: int) -> "Scenario":
        return cls(tuple(settings))

    @property
    def n_parties(self) -> int:
        return len(self.settings_per_party)

    def dimension(self) -> int:
        return prod(self.settings_per_party)

    def total_settings(self) -> int:
        return sum(self.settings_per_party)

    def vertex_count(self, reduced: bool = True) -> int:
        s = self.total_settings()
        return 2 ** (s - 1) if reduced and s else 2**s

    def tuples(self) -> Iterator[Tuple]:
        """Setting tuples in row-major order (first party slowest)."""
        return product(*(range(m) for m in self.settings_per_party))

    def index(self, t: Tuple) -> int:
        i = 0
        for m, k in zip(self.settings_per_party, t):
            i = i * m + k
        return i

    def valid(self, t: Tuple) -> bool:
        return len(t) == self.n_parties and all(
            0 <= k < m for k, m in zip(t, self.settings_per_party)
        )

    def remove_party(self, party: int) -> "Scenario":
        sp = list(self.settings_per_party)
        del sp[party]
        return Scenario(tuple(sp))

    def extend(self, settings: int) -> "Scenario":
        return Scenario(self.settings_per_party + (settings,))

    def offsets(self) -> list[int]:
        """Column offset of each party's first setting in a flat outcome row."""
        out, acc = [], 0
        for m in self.settings_per_party:
            out.append(acc)
            acc += m
        return out

    def __str__(self) -> str:
        return ",".join(map(str, self.settings_per_party))


@dataclass(frozen=True)
class Vertex:
    """A deterministic strategy: one +-1 outcome per setting per party."""

    outcomes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        out = tuple(tuple(int(x) for x in row) for row in self.outcomes)
        if any(x not in (1, -1) for row in out for x in row):
            raise ValueError("outcomes must be +1 or -1")
        object.__setattr__(self, "outcomes", out)

    @property
    def scenario(self) -> Scenario:
        return Scenario(tuple(len(row) for row in self.outcomes))

    def correlation(self, t: Tuple) -> int:
        return prod(row[k] for row, k in zip(self.outcomes, t))

    def inverted(self) -> "Vertex":
        first = tuple(-x for x in self.outcomes[0])
        return Vertex((first,) + self.outcomes[1:])


class FullCorrelationInequality:
    """Sparse full-correlation expression ``sum alpha[t] prod_p X_p[t_p] <= bound``.

    Positive bounds are normalized to 1 on construction; the bound given by
    the caller is kept as ``original_bound``.  Arithmetic operators act on the
    left-hand side only and produce bound-1 inequalities.
    """

    __slots__ = ("scenario", "terms", "bound", "original_bound", "name")

    def __init__(
        self,
        scenario: Scenario | Iterable[int],
        terms: Mapping[Tuple, object] | Iterable[tuple[Tuple, object]] = (),
        bound=1,
        name: str | None = None,
    ):
        if not isinstance(scenario, Scenario):
            scenario = Scenario(tuple(scenario))
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Tuple, Fraction] = {}
        for t, c in items:
            t = tuple(int(k) for k in t)
            if not scenario.valid(t):
                raise ValueError(f"setting tuple {t} invalid for scenario {scenario}")
            acc[t] = acc.get(t, Fraction(0)) + to_fraction(c)
        bound = to_fraction(bound)
        original = bound
        if bound > 0 and bound != 1:
            acc = {t: c / bound for t, c in acc.items()}
            bound = Fraction(1)
        self.scenario = scenario
        self.terms = {t: acc[t] for t in sorted(acc) if acc[t] != 0}
        self.bound = bound
        self.original_bound = original
        self.name = name

    # --- value semantics -------------------------------------------------
    def __setattr__(self, key, value):
        if hasattr(self, "name") and key != "name":
            raise AttributeError("inequalities are immutable")
        object.__setattr__(self, key, value)

    def __eq__(self, other):
        if not isinstance(other, FullCorrelationInequality):
            return NotImplemented
        return (
            self.scenario == other.scenario
            and self.terms == other.terms
            and self.bound == other.bound
        )

    def __hash__(self):
        return hash((self.scenario, tuple(self.terms.items()), self.bound))

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<FullCorrelationInequality{label} [{self.scenario}] {self.expression()} <= {self.bound}>"

    def renamed(self, name: str | None) -> "FullCorrelationInequality":
        out = FullCorrelationInequality(self.scenario, self.terms, self.bound, name)
        object.__setattr__(out, "original_bound", self.original_bound)
        return out

    # --- arithmetic on the expression -------------------------------------
    def _check(self, other: "FullCorrelationInequality"):
        if self.scenario != other.scenario:
            raise ScenarioMismatch(f"{self.scenario} vs {other.scenario}")

    def __add__(self, other):
        self._check(other)
        acc = dict(self.terms)
        for t, c in other.terms.items():
            acc[t] = acc.get(t, 0) + c
        return FullCorrelationInequality(self.scenario, acc)

    def __neg__(self):
        return FullCorrelationInequality(self.scenario, {t: -c for t, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, k):
        k = to_fraction(k)
        return FullCorrelationInequality(self.scenario, {t: k * c for t, c in self.terms.items()})

    __rmul__ = __mul__

    # --- queries ---------------------------------------------------------
    def term_count(self) -> int:
        return len(self.terms)

    def algebraic_value(self) -> Fraction:
        return sum((abs(c) for c in self.terms.values()), Fraction(0))

    def coefficient(self, t: Tuple) -> Fraction:
        return self.terms.get(tuple(t), Fraction(0))

    def dense(self) -> list[Fraction]:
        vec = [Fraction(0)] * self.scenario.dimension()
        for t, c in self.terms.items():
            vec[self.scenario.index(t)] = c
        return vec

    def denominator(self) -> int:
        return lcm(1, *(c.denominator for c in self.terms.values()))

    def integer_terms(self) -> tuple[int, list[tuple[Tuple, int]]]:
        """Common denominator L and the terms scaled by L to integers."""
        L = self.denominator()
        return L, [(t, int(c * L)) for t, c in self.terms.items()]

    def expression(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for t, c in self.terms.items():
            mono = "".join(f"{_party_letter(p)}{k + 1}" for p, k in enumerate(t))
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            coef = "" if mag == 1 else f"{mag}*"
            parts.append(f"{sign} {coef}{mono or '1'}")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


def _party_letter(p: int) -> str:
    letters = "abcdefghijklmnopqrstuvwxyz"
    return letters[p] if p < len(letters) else f"x{p}_"


def evaluate(ineq: FullCorrelationInequality, v: Vertex) -> Fraction:
    if v.scenario != ineq.scenario:
        raise ScenarioMismatch(f"vertex scenario {v.scenario} vs inequality {ineq.scenario}")
    return sum((c * v.correlation(t) for t, c in ineq.terms.items()), Fraction(0))


def algebraic_bound(ineq: FullCorrelationInequality) -> Fraction:
    """Sum of moduli of the coefficients."""
    return ineq.algebraic_value()


class GeneralInequality:
    """CH-type inequality with marginal terms and a constant.

    Term keys have one entry per party; -1 marks a party absent from the term.
    """

    __slots__ = ("scenario", "terms", "constant", "bound", "original_bound", "name")

    def __init__(self, scenario, terms=(), constant=0, bound=1, name=None):
        if not isinstance(scenario, Scenario):
            scenario = Scenario(tuple(scenario))
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Tuple, Fraction] = {}
        for t, c in items:
            t = tuple(int(k) for k in t)
            if len(t) != scenario.n_parties or any(
                not (k == -1 or 0 <= k < m) for k, m in zip(t, scenario.settings_per_party)
            ):
                raise ValueError(f"term key {t} invalid for scenario {scenario}")
            if all(k == -1 for k in t):
                raise ValueError("the empty term is not allowed; use `constant`")
            acc[t] = acc.get(t, Fraction(0)) + to_fraction(c)
        constant = to_fraction(constant)
        bound = to_fraction(bound)
        original = bound
        if bound > 0 and bound != 1:
            acc = {t: c / bound for t, c in acc.items()}
            constant /= bound
            bound = Fraction(1)
        self.scenario = scenario
        self.terms = {t: acc[t] for t in sorted(acc) if acc[t] != 0}
        self.constant = constant
        self.bound = bound
        self.original_bound = original
        self.name = name

    def __setattr__(self, key, value):
        if hasattr(self, "name") and key != "name":
            raise AttributeError("inequalities are immutable")
        object.__setattr__(self, key, value)

    def __eq__(self, other):
        if not isinstance(other, GeneralInequality):
            return NotImplemented
        return (
            self.scenario == other.scenario
            and self.terms == other.terms
            and self.constant == other.constant
            and self.bound == other.bound
        )

    def __hash__(self):
        return hash((self.scenario, tuple(self.terms.items()), self.constant, self.bound))

    def __repr__(self):
        return (
            f"<GeneralInequality [{self.scenario}] {len(self.terms)} terms,"
            f" constant {self.constant}, bound {self.bound}>"
        )

    def evaluate(self, v: Vertex) -> Fraction:
        total = self.constant
        for t, c in self.terms.items():
            total += c * prod(v.outcomes[p][k] for p, k in enumerate(t) if k >= 0)
        return total

    def is_full_correlation(self) -> bool:
        return self.constant == 0 and all(k >= 0 for t in self.terms for k in t)

    def to_full(self) -> FullCorrelationInequality:
        if not self.is_full_correlation():
            raise ValueError("inequality has marginal terms or a constant")
        return FullCorrelationInequality(self.scenario, self.terms, self.bound, self.name)

    @classmethod
    def from_full(cls, ineq: FullCorrelationInequality) -> "GeneralInequality":
        return cls(ineq.scenario, ineq.terms, 0, ineq.bound, ineq.name)


# --- outcome tables ----------------------------------------------------------

def outcome_table(s: Scenario, reduced: bool = True) -> np.ndarray:
    """All deterministic strategies as rows of +-1 (int8), binary-counter order.

    Column ``offsets[p] + k`` holds the outcome of setting k of party p; the
    most significant bit is party 0, setting 0 (bit 0 -> +1, bit 1 -> -1), so
    the reduced table is the first half of the full one.
    """
    nbits = s.total_settings()
    count = s.vertex_count(reduced)
    idx = np.arange(count, dtype=np.int64)
    shifts = np.arange(nbits - 1, -1, -1, dtype=np.int64)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def term_products(s: Scenario, table: np.ndarray, keys: Iterable[Tuple]) -> np.ndarray:
    """Column per key: product of the selected outcomes (absent parties skipped)."""
    offs = s.offsets()
    keys = list(keys)
    out = np.ones((table.shape[0], len(keys)), dtype=np.int8)
    for j, t in enumerate(keys):
        for p, k in enumerate(t):
            if k >= 0:
                out[:, j] *= table[:, offs[p] + k]
    return out


def correlation_matrix(s: Scenario, table: np.ndarray) -> np.ndarray:
    """Rows of full correlation vectors (row-major over setting tuples)."""
    offs = s.offsets()
    corr = np.ones((table.shape[0], 1), dtype=np.int8)
    for p, m in enumerate(s.settings_per_party):
        block = table[:, offs[p] : offs[p] + m]
        corr = (corr[:, :, None] * block[:, None, :]).reshape(table.shape[0], -1)
    return corr


def vertex_from_row(s: Scenario, row) -> Vertex:
    offs = s.offsets()
    return Vertex(
        tuple(tuple(int(x) for x in row[o : o + m]) for o, m in zip(offs, s.settings_per_party))
    )


# --- JSON interchange ----------------------------------------------------------

def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text, field: str) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise ParseError(field, f"expected a 'p/q' string, got {text!r}")
    s = str(text).strip()
    num, sep, den = s.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise ParseError(field, f"not a rational: {text!r}") from None
    if d == 0:
        raise ParseError(field, f"zero denominator in {text!r}")
    return Fraction(n, d)


def to_document(ineq, canonical: bool = False) -> dict:
    full = isinstance(ineq, FullCorrelationInequality)
    doc: dict = {"kind": "full" if full else "general"}
    doc["settings"] = list(ineq.scenario.settings_per_party)
    doc["terms"] = [
        {"settings": [k + 1 for k in t], "coeff": format_fraction(c)}
        for t, c in ineq.terms.items()
    ]
    if not full:
        doc["constant"] = format_fraction(ineq.constant)
    doc["bound"] = format_fraction(ineq.bound)
    if ineq.original_bound != ineq.bound:
        doc["original_bound"] = format_fraction(ineq.original_bound)
    if ineq.name is not None:
        doc["name"] = ineq.name
    if canonical:
        doc["canonical"] = True
    return doc


def serialize(ineq, canonical: bool = False) -> str:
    return json.dumps(to_document(ineq, canonical), sort_keys=True, separators=(",", ":"))


def from_document(doc):
    if not isinstance(doc, dict):
        raise ParseError("document", "expected a JSON object")
    kind = doc.get("kind")
    if kind not in ("full", "general"):
        raise ParseError("kind", f"expected 'full' or 'general', got {kind!r}")
    settings = doc.get("settings")
    if (
        not isinstance(settings, list)
        or not settings
        or any(isinstance(m, bool) or not isinstance(m, int) or m < 1 for m in settings)
    ):
        raise ParseError("settings", f"expected a non-empty list of positive integers, got {settings!r}")
    scenario = Scenario(tuple(settings))
    raw_terms = doc.get("terms", [])
    if not isinstance(raw_terms, list):
        raise ParseError("terms", "expected a list")
    lo = 1 if kind == "full" else 0
    terms = []
    for j, term in enumerate(raw_terms):
        where = f"terms[{j}]"
        if not isinstance(term, dict) or "settings" not in term or "coeff" not in term:
            raise ParseError(where, "expected an object with 'settings' and 'coeff'")
        idx = term["settings"]
        if not isinstance(idx, list) or len(idx) != scenario.n_parties:
            raise ParseError(f"{where}.settings", f"expected {scenario.n_parties} indices")
        for k, m in zip(idx, settings):
            if isinstance(k, bool) or not isinstance(k, int) or not lo <= k <= m:
                raise ParseError(f"{where}.settings", f"index {k!r} outside {lo}..{m}")
        if kind == "general" and all(k == 0 for k in idx):
            raise ParseError(f"{where}.settings", "empty term; use 'constant'")
        terms.append((tuple(k - 1 for k in idx), parse_fraction(term["coeff"], f"{where}.coeff")))
    bound = parse_fraction(doc.get("bound", "1"), "bound")
    original = parse_fraction(doc["original_bound"], "original_bound") if "original_bound" in doc else None
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ParseError("name", "expected a string")
    constant = parse_fraction(doc.get("constant", "0"), "constant") if kind == "general" else Fraction(0)
    if original is not None and original > 0 and bound == 1:
        # the stored form is normalized; scale back so the metadata survives
        terms = [(t, c * original) for t, c in terms]
        constant *= original
        bound = original
    if kind == "full":
        if "constant" in doc:
            raise ParseError("constant", "only allowed for kind 'general'")
        if len(set(t for t, _ in terms)) != len(terms):
            raise ParseError("terms", "duplicate setting tuple")
        return FullCorrelationInequality(scenario, terms, bound, name)
    return GeneralInequality(scenario, terms, constant, bound, name)


def parse(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("document", f"malformed JSON ({exc.msg})") from None
    return from_document(doc)
