"""Correlation Bell inequalities: bounds, facets, lifting, equivalence and GHZ violations."""
from .core import (
    BellForgeError,
    FullCorrelationInequality,
    GeneralInequality,
    ParseError,
    Scenario,
    ScenarioMismatch,
    Vertex,
    algebraic_bound,
    evaluate,
    from_document,
    parse,
    serialize,
    to_document,
)
from .equivalence import (
    GroupElement,
    act,
    canonical_form,
    classify_orbits,
    dehomogenize,
    equivalent,
    homogenize,
)
from .lift import (
    chsh_extend,
    compose_lift,
    converse_check,
    decompose,
    find_face_signs,
    four_term_extend,
    recompose,
    structure_identity,
    structure_values,
)
from .polytope import (
    CapExceeded,
    enumerate_facets,
    enumerate_vertices,
    general_lr_bound,
    lr_bound,
    lr_bound_bruteforce,
    tightness,
)
from .quantum import critical_visibility, ghz_value, max_eigenvalue_bound, maximize_ghz_violation

__version__ = "0.1.0"

__all__ = [
    "BellForgeError",
    "CapExceeded",
    "FullCorrelationInequality",
    "GeneralInequality",
    "GroupElement",
    "ParseError",
    "Scenario",
    "ScenarioMismatch",
    "Vertex",
    "act",
    "algebraic_bound",
    "canonical_form",
    "chsh_extend",
    "classify_orbits",
    "compose_lift",
    "converse_check",
    "critical_visibility",
    "decompose",
    "dehomogenize",
    "enumerate_facets",
    "enumerate_vertices",
    "equivalent",
    "evaluate",
    "find_face_signs",
    "four_term_extend",
    "from_document",
    "general_lr_bound",
    "ghz_value",
    "homogenize",
    "lr_bound",
    "lr_bound_bruteforce",
    "max_eigenvalue_bound",
    "maximize_ghz_violation",
    "parse",
    "recompose",
    "serialize",
    "structure_identity",
    "structure_values",
    "tightness",
    "to_document",
]
