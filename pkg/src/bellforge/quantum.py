"""Qubit Bell operators with equatorial observables, GHZ values and noise thresholds.

A(phi) = cos(phi) X + sin(phi) Y.  On GHZ_n = (|0..0> + |1..1>)/sqrt(2) the
full correlation of A(phi_1) x ... x A(phi_n) is cos(phi_1 + ... + phi_n).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .core import BellForgeError, FullCorrelationInequality, ScenarioMismatch
from .polytope import lr_bound

DENSE_MAX_PARTIES = 12
WITNESS_VCRIT = 0.6  # reported v_crit of the 9-setting eight-qubit witness; context only

AngleSettings = tuple[tuple[float, ...], ...]


class DimensionCapExceeded(BellForgeError):
    def __init__(self, n: int, cap: int = DENSE_MAX_PARTIES):
        super().__init__(f"dense operator on {n} qubits exceeds the {cap}-qubit cap")
        self.required = n
        self.cap = cap


class NoViolation(BellForgeError, ValueError):
    pass


def _check_settings(ineq: FullCorrelationInequality, settings) -> AngleSettings:
    sp = ineq.scenario.settings_per_party
    settings = tuple(tuple(float(x) for x in row) for row in settings)
    if tuple(len(row) for row in settings) != sp:
        raise ScenarioMismatch(f"angle shape {[len(r) for r in settings]} vs scenario {list(sp)}")
    return settings


def observable(phi: float) -> np.ndarray:
    return np.array([[0, np.exp(-1j * phi)], [np.exp(1j * phi), 0]], dtype=complex)


def bell_operator(ineq: FullCorrelationInequality, settings) -> np.ndarray:
    settings = _check_settings(ineq, settings)
    n = ineq.scenario.n_parties
    if n > DENSE_MAX_PARTIES:
        raise DimensionCapExceeded(n)
    dim = 2**n
    B = np.zeros((dim, dim), dtype=complex)
    for t, c in ineq.terms.items():
        ops = [observable(settings[p][k]) for p, k in enumerate(t)]
        B += float(c) * reduce(np.kron, ops, np.ones((1, 1), dtype=complex))
    return B


def ghz_state(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def ghz_value(ineq: FullCorrelationInequality, settings, method: str = "closed") -> float:
    settings = _check_settings(ineq, settings)
    if method == "closed":
        return float(
            sum(float(c) * np.cos(sum(settings[p][k] for p, k in enumerate(t))) for t, c in ineq.terms.items())
        )
    if method == "operator":
        psi = ghz_state(ineq.scenario.n_parties)
        return float(np.real(np.vdot(psi, bell_operator(ineq, settings) @ psi)))
    raise ValueError(f"unknown method {method!r}")


def max_eigenvalue_bound(ineq: FullCorrelationInequality, settings) -> float:
    """Best quantum value over all states at fixed settings."""
    if not ineq.terms:
        return 0.0
    return float(np.linalg.eigvalsh(bell_operator(ineq, settings))[-1])


def noise_value(ineq: FullCorrelationInequality) -> float:
    # every equatorial observable is traceless, so white noise scores 0
    return 0.0


def critical_visibility(
    ineq: FullCorrelationInequality,
    quantum_value: float,
    lr: Fraction | float | None = None,
    noise: float | None = None,
) -> float:
    """Smallest v for which v|psi><psi| + (1 - v) 1/d still violates the bound.

    Values >= 1 mean no violation at all.
    """
    lr = float(lr_bound(ineq) if lr is None else lr)
    noise = noise_value(ineq) if noise is None else noise
    if quantum_value <= noise:
        raise NoViolation(f"quantum value {quantum_value} does not exceed the noise value {noise}")
    return (lr - noise) / (quantum_value - noise)


@dataclass
class QuantumReport:
    quantum_value: float
    violation_factor: float | None
    critical_visibility: float | None
    max_eigenvalue: float | None
    settings: AngleSettings
    state_tag: str
    seed: int
    restarts: int
    lr_bound: Fraction | None = None
    converged: bool = True
    sweeps: int = 0
    global_maximum_certified: bool = False
    history: list[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        r = _round12
        return {
            "quantum_value": r(self.quantum_value),
            "violation_factor": r(self.violation_factor),
            "critical_visibility": r(self.critical_visibility),
            "max_eigenvalue": r(self.max_eigenvalue),
            "settings": [[r(x) for x in row] for row in self.settings],
            "state_tag": self.state_tag,
            "seed": self.seed,
            "restarts": self.restarts,
            "lr_bound": None if self.lr_bound is None else f"{self.lr_bound.numerator}/{self.lr_bound.denominator}",
            "converged": self.converged,
            "sweeps": self.sweeps,
            "global_maximum_certified": self.global_maximum_certified,
        }


def _round12(x):
    if x is None:
        return None
    return float(f"{x:.12g}")


def _coordinate_ascent(ineq, phi0: np.ndarray, max_sweeps: int, tol: float, record: bool):
    """Cyclic exact maximization of sum_t c_t cos(sum_p phi[p, t_p]).

    ``phi0`` has shape (restarts, total settings); all restarts advance
    together.  Returns (phi, values, sweeps, converged per restart, history).
    """
    s = ineq.scenario
    offs = s.offsets()
    keys = list(ineq.terms)
    coef = np.array([float(ineq.terms[t]) for t in keys])
    # term x variable incidence
    cols = np.array([[offs[p] + k for p, k in enumerate(t)] for t in keys], dtype=np.int64).reshape(len(keys), -1)
    phi = phi0.copy()
    R, nvar = phi.shape
    members = [np.flatnonzero((cols == v).any(axis=1)) for v in range(nvar)]
    S = phi[:, cols].sum(axis=2) if cols.shape[1] else np.zeros((R, len(keys)))
    value = (coef * np.cos(S)).sum(axis=1)
    converged = np.zeros(R, dtype=bool)
    history = [value.copy()] if record else []
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        active = ~converged
        for v in range(nvar):
            idx = members[v]
            if idx.size == 0:
                continue
            rest = S[:, idx] - phi[:, v : v + 1]
            a = (coef[idx] * np.cos(rest)).sum(axis=1)
            b = -(coef[idx] * np.sin(rest)).sum(axis=1)
            new = np.where(active, np.arctan2(b, a), phi[:, v])
            S[:, idx] += (new - phi[:, v])[:, None]
            phi[:, v] = new
        new_value = (coef * np.cos(S)).sum(axis=1)
        if record:
            history.append(new_value.copy())
        converged |= (new_value - value) < tol
        value = new_value
        if converged.all():
            break
    return phi, value, sweeps, converged, history


def maximize_ghz_violation(
    ineq: FullCorrelationInequality,
    restarts: int = 32,
    seed: int = 0,
    max_sweeps: int = 10_000,
    tol: float = 1e-12,
    lr: Fraction | None = None,
    record_history: bool = False,
) -> QuantumReport:
    """Multi-start coordinate ascent on the GHZ value over equatorial settings.

    Each angle enters as A cos(phi) + B sin(phi) with the others fixed, so
    every update jumps straight to atan2(B, A).  The best restart wins, ties
    going to the lower restart index.
    """
    s = ineq.scenario
    n = s.n_parties
    rng = np.random.default_rng(seed)
    phi0 = rng.uniform(0.0, 2 * np.pi, size=(restarts, s.total_settings()))
    if lr is None:
        lr = lr_bound(ineq)
    if not ineq.terms:
        phi, values, sweeps, conv, hist = phi0, np.zeros(restarts), 0, np.ones(restarts, bool), []
    else:
        phi, values, sweeps, conv, hist = _coordinate_ascent(ineq, phi0, max_sweeps, tol, record_history)
    best = int(np.flatnonzero(values == values.max())[0])
    offs = s.offsets()
    settings = tuple(
        tuple(float(np.mod(x, 2 * np.pi)) for x in phi[best, o : o + m])
        for o, m in zip(offs, s.settings_per_party)
    )
    q = float(values[best])
    factor = q / float(lr) if lr else None
    try:
        vcrit = critical_visibility(ineq, q, lr)
    except NoViolation:
        vcrit = None
    eig = max_eigenvalue_bound(ineq, settings) if n <= DENSE_MAX_PARTIES else None
    return QuantumReport(
        quantum_value=q,
        violation_factor=factor,
        critical_visibility=vcrit,
        max_eigenvalue=eig,
        settings=settings,
        state_tag=f"GHZ_{n}",
        seed=seed,
        restarts=restarts,
        lr_bound=lr,
        converged=bool(conv[best]),
        sweeps=sweeps,
        history=[float(h[best]) for h in hist],
    )
