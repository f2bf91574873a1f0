"""Hypothesis strategies shared by the test modules."""
from fractions import Fraction
from itertools import product

from hypothesis import strategies as st

from bellforge.core import FullCorrelationInequality, GeneralInequality, Scenario

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def scenarios(draw, max_parties=3, max_settings=3):
    n = draw(st.integers(1, max_parties))
    return Scenario(tuple(draw(st.integers(1, max_settings)) for _ in range(n)))


@st.composite
def full_inequalities(draw, max_parties=3, max_settings=3):
    s = draw(scenarios(max_parties, max_settings))
    keys = list(s.tuples())
    chosen = draw(st.lists(st.sampled_from(keys), unique=True, max_size=len(keys)))
    terms = {t: draw(fractions) for t in chosen}
    bound = draw(st.sampled_from([Fraction(1), Fraction(2), Fraction(3, 2)]))
    return FullCorrelationInequality(s, terms, bound, draw(st.none() | st.just("x")))


@st.composite
def general_inequalities(draw):
    s = draw(scenarios(3, 2))
    keys = [k for k in product(*[range(-1, m) for m in s.settings_per_party]) if any(x >= 0 for x in k)]
    chosen = draw(st.lists(st.sampled_from(keys), unique=True, max_size=6))
    return GeneralInequality(s, {t: draw(fractions) for t in chosen}, draw(fractions), 1)
