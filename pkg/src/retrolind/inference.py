"""Preparation and outcome probabilities from the two inference routes.

The predictive route carries the prepared state forward and pairs it with
backward-evolved outcome operators; the probability of outcome j given
preparation i is Tr[rho_i(t) Pi_j(t)] at any collapse time t in
[t_p, t_m] (the pairing is independent of t, which collapse_time_sweep
checks numerically).

The retrodictive route carries the observed outcome operator backward to
the preparation time, normalizes it into a retrodictive state, and pairs
it with the preparation-device operators Lambda_i = P(i) rho_i.  Both
routes must give the same posterior; the CLI refuses to report when they
disagree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import IntegrationError, evolve_pom_backward, evolve_predictive
from .model import (
    DensityOperator,
    IntegratorConfig,
    LindbladModel,
    PreparationEnsemble,
    Scenario,
)
from .operators import hermitian_deviation, scale_of, trace

__all__ = [
    "NEGATIVE_PROB_TOL",
    "ProbabilityTable",
    "normalize_to_retrodictive",
    "preparation_operators",
    "predict_outcome_probs",
    "retrodict_preparation_probs",
    "bayes_from_predictive",
    "collapse_time_sweep",
]

NEGATIVE_PROB_TOL = 1e-9  # raw values this far below zero are round-off, clamped
RAW_SUM_TOL = 1e-7  # allowed deviation of raw predictive probabilities from total 1

_DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True, eq=False)
class ProbabilityTable:
    """Labeled probabilities: entrywise >= 0 and summing to 1 within 1e-9."""

    labels: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or len(labels) != probs.size:
            raise ValueError("labels and probabilities must align one-to-one")
        if np.any(probs < 0.0):
            raise ValueError(f"negative probability {probs.min():.3e}")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)

    def __getitem__(self, key: str | int) -> float:
        if isinstance(key, str):
            return float(self.probs[self.labels.index(key)])
        return float(self.probs[key])

    def items(self) -> list[tuple[str, float]]:
        return [(label, float(p)) for label, p in zip(self.labels, self.probs)]


def _label_index(labels: tuple[str, ...], key: str | int, what: str) -> int:
    if isinstance(key, str):
        if key not in labels:
            raise ValueError(f"unknown {what} label {key!r}; known labels: {', '.join(labels)}")
        return labels.index(key)
    if not 0 <= key < len(labels):
        raise ValueError(f"{what} index {key} out of range for {len(labels)} entries")
    return int(key)


def _clamp_raw(raw: np.ndarray, what: str) -> np.ndarray:
    low = float(raw.min())
    if low < -NEGATIVE_PROB_TOL:
        raise IntegrationError(f"{what} {low:.3e} is more negative than round-off allows")
    return np.clip(raw, 0.0, None)


def normalize_to_retrodictive(pi, eig_tol: float = 1e-6) -> DensityOperator:
    """Outcome operator divided by its trace: the retrodictive state.

    The trace must be real and positive; eig_tol admits the slight
    negativity a backward-evolved element can carry after division by a
    sub-unit trace.
    """
    pi = np.asarray(pi, dtype=np.complex128)
    scale = scale_of(pi)
    if scale > 0.0 and hermitian_deviation(pi) > 1e-8 * scale:
        raise ValueError("outcome operator must be Hermitian")
    tr = trace(pi).real
    if tr <= 1e-12:
        raise ValueError(f"outcome operator trace {tr:.3e} is too small to normalize")
    return DensityOperator(pi / tr, eig_tol=eig_tol)


def preparation_operators(
    ensemble: PreparationEnsemble,
    model: LindbladModel,
    t_minus_tp: float,
    config: IntegratorConfig = _DEFAULT_CONFIG,
) -> list[np.ndarray]:
    """Prior-weighted predictive states Lambda_i at time t_p + t_minus_tp."""
    if t_minus_tp < 0.0:
        raise ValueError(f"time offset must be >= 0, got {t_minus_tp}")
    ops = []
    for prior, state in zip(ensemble.priors, ensemble.states):
        if t_minus_tp == 0.0:
            ops.append(prior * state.op)
        else:
            ops.append(prior * evolve_predictive(model, state, t_minus_tp, config).final)
    total_trace = math.fsum(trace(op).real for op in ops)
    if abs(total_trace - 1.0) > 1e-8:
        raise IntegrationError(
            f"preparation operators sum to trace {total_trace!r}, off beyond 1e-8"
        )
    return ops


def _forward_state(scenario: Scenario, prep_index: int, collapse_time: float) -> np.ndarray:
    """Prepared state carried forward from t_p to the collapse time."""
    forward = collapse_time - scenario.t_p
    state = scenario.ensemble.states[prep_index]
    if forward == 0.0:
        return state.op
    return evolve_predictive(scenario.model, state, forward, scenario.integrator).final


def _backward_element(scenario: Scenario, outcome_index: int, collapse_time: float) -> np.ndarray:
    """Outcome operator carried backward from t_m to the collapse time."""
    backward = scenario.t_m - collapse_time
    element = scenario.pom.elements[outcome_index]
    if backward == 0.0:
        return element
    return evolve_pom_backward(scenario.model, element, backward, scenario.integrator).final


def _check_collapse_time(scenario: Scenario, collapse_time: float | None) -> float:
    if collapse_time is None:
        return scenario.t_m
    if not scenario.t_p <= collapse_time <= scenario.t_m:
        raise ValueError(
            f"collapse time {collapse_time} outside [{scenario.t_p}, {scenario.t_m}]"
        )
    return collapse_time


def predict_outcome_probs(
    scenario: Scenario,
    preparation: str | int,
    collapse_time: float | None = None,
) -> ProbabilityTable:
    """P(outcome j | preparation i), evaluated at the given collapse time.

    Defaults to collapse at the measurement time t_m.  The raw pairings must
    already sum to 1 within 1e-7 (they are then normalized exactly).
    """
    i = _label_index(scenario.ensemble.labels, preparation, "preparation")
    t = _check_collapse_time(scenario, collapse_time)
    rho_t = _forward_state(scenario, i, t)
    elements = [_backward_element(scenario, j, t) for j in range(len(scenario.pom))]
    raw = np.array([trace(rho_t @ pi).real for pi in elements])
    raw = _clamp_raw(raw, "outcome probability")
    total = raw.sum()
    if abs(total - 1.0) > RAW_SUM_TOL:
        raise IntegrationError(
            f"raw outcome probabilities sum to {total!r}, off beyond {RAW_SUM_TOL:.1e}"
        )
    return ProbabilityTable(scenario.pom.labels, raw / total)


def retrodict_preparation_probs(scenario: Scenario, outcome: str | int) -> ProbabilityTable:
    """P(preparation i | outcome j) by the retrodictive route.

    The observed outcome operator is carried backward over the full window,
    normalized into the retrodictive state at t_p, and paired with the
    prior-weighted preparations.
    """
    j = _label_index(scenario.pom.labels, outcome, "outcome")
    element = scenario.pom.elements[j]
    window = scenario.duration
    if window > 0.0:
        element = evolve_pom_backward(scenario.model, element, window, scenario.integrator).final
    rho_retr = normalize_to_retrodictive(element)
    lambdas = preparation_operators(scenario.ensemble, scenario.model, 0.0, scenario.integrator)
    raw = np.array([trace(rho_retr.op @ lam).real for lam in lambdas])
    raw = _clamp_raw(raw, "preparation weight")
    total = raw.sum()
    if total <= 0.0:
        raise ValueError("outcome is impossible under every preparation in the ensemble")
    return ProbabilityTable(scenario.ensemble.labels, raw / total)


def bayes_from_predictive(
    scenario: Scenario,
    outcome: str | int,
    collapse_time: float | None = None,
) -> ProbabilityTable:
    """P(preparation i | outcome j) from predictive likelihoods and priors."""
    j = _label_index(scenario.pom.labels, outcome, "outcome")
    likelihoods = np.array(
        [
            predict_outcome_probs(scenario, i, collapse_time).probs[j]
            for i in range(len(scenario.ensemble))
        ]
    )
    raw = likelihoods * np.asarray(scenario.ensemble.priors)
    total = raw.sum()
    if total <= 0.0:
        raise ValueError("outcome is impossible under every preparation in the ensemble")
    return ProbabilityTable(scenario.ensemble.labels, raw / total)


def collapse_time_sweep(
    scenario: Scenario,
    preparation: str | int,
    outcome: str | int,
    n_times: int,
) -> list[tuple[float, float]]:
    """The raw pairing Tr[rho_i(t) Pi_j(t)] at n_times points across [t_p, t_m].

    The continuous equations make this constant in t; the spread across the
    returned points measures integration error.
    """
    if n_times < 2:
        raise ValueError(f"need at least 2 collapse times, got {n_times}")
    i = _label_index(scenario.ensemble.labels, preparation, "preparation")
    j = _label_index(scenario.pom.labels, outcome, "outcome")
    points = []
    for t in np.linspace(scenario.t_p, scenario.t_m, n_times):
        rho_t = _forward_state(scenario, i, float(t))
        element = _backward_element(scenario, j, float(t))
        points.append((float(t), trace(rho_t @ element).real))
    return points
