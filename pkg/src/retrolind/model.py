"""Problem descriptions: dissipative models, measurements, priors, scenarios.

A scenario bundles everything one run needs: the open-system model (a
Hamiltonian plus jump operators), the preparation ensemble with its prior
probabilities, the measurement (a complete set of positive outcome
operators), the preparation and measurement times, and integrator settings.

Constructors validate their invariants and raise ValueError listing every
violation.  The same predicates are available as data via
:func:`validate_scenario_data` (used by the CLI on raw parsed input) and
:func:`validate_scenario`.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass

import numpy as np

from .operators import hermitian_deviation, identity, min_eigenvalue, scale_of, trace

__all__ = [
    "HERMITICITY_TOL",
    "TRACE_TOL",
    "EIGENVALUE_TOL",
    "POM_SUM_TOL",
    "PRIOR_SUM_TOL",
    "ValidationIssue",
    "ValidationReport",
    "IntegratorConfig",
    "LindbladModel",
    "DensityOperator",
    "Pom",
    "PreparationEnsemble",
    "Scenario",
    "validate_scenario",
    "validate_scenario_data",
    "two_level_decay_model",
    "plus_minus_ensemble",
]

HERMITICITY_TOL = 1e-10  # relative to the largest entry modulus
TRACE_TOL = 1e-10
EIGENVALUE_TOL = 1e-9  # absolute negativity allowance on eigenvalues
POM_SUM_TOL = 1e-9  # entrywise deviation of the outcome-operator sum from identity
PRIOR_SUM_TOL = 1e-10


@dataclass(frozen=True)
class ValidationIssue:
    """One violated invariant with where it was found and how far off it is."""

    field: str
    message: str
    deviation: float

    def __str__(self) -> str:
        return f"{self.field}: {self.message} (deviation {self.deviation:.6e})"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def lines(self) -> list[str]:
        return [str(issue) for issue in self.issues]


def _raise_if_issues(issues: list[ValidationIssue]) -> None:
    if issues:
        raise ValueError("; ".join(str(issue) for issue in issues))


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=np.complex128)
    out.setflags(write=False)
    return out


def _shape_issues(field: str, a, dim: int | None) -> list[ValidationIssue]:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        return [ValidationIssue(field, f"not a square matrix (shape {a.shape})", math.nan)]
    if dim is not None and a.shape[0] != dim:
        return [
            ValidationIssue(field, f"dimension {a.shape[0]} does not match scenario dimension {dim}", math.nan)
        ]
    if not np.all(np.isfinite(a)):
        return [ValidationIssue(field, "entries are not all finite", math.nan)]
    return []


def _hermitian_issues(field: str, a) -> list[ValidationIssue]:
    scale = scale_of(a)
    dev = hermitian_deviation(a)
    if scale > 0.0 and dev > HERMITICITY_TOL * scale:
        return [ValidationIssue(field, "not Hermitian within tolerance", dev)]
    return []


def _model_issues(dim: int, hamiltonian, jump_ops) -> list[ValidationIssue]:
    issues: list[ValidationIssue] = []
    if not isinstance(dim, int) or dim < 1:
        issues.append(ValidationIssue("model.dim", f"dimension must be a positive integer, got {dim!r}", math.nan))
        return issues
    issues += _shape_issues("model.hamiltonian", hamiltonian, dim)
    if not issues:
        issues += _hermitian_issues("model.hamiltonian", hamiltonian)
    for q, a in enumerate(jump_ops):
        issues += _shape_issues(f"model.jump_ops[{q}]", a, dim)
    return issues


def _density_issues(
    field: str,
    op,
    dim: int | None,
    trace_tol: float = TRACE_TOL,
    eig_tol: float = EIGENVALUE_TOL,
) -> list[ValidationIssue]:
    issues = _shape_issues(field, op, dim)
    if issues:
        return issues
    issues += _hermitian_issues(field, op)
    if issues:
        return issues
    trace_dev = abs(trace(op) - 1.0)
    if trace_dev > trace_tol:
        issues.append(ValidationIssue(field, "trace is not 1 within tolerance", trace_dev))
    low = min_eigenvalue(op)
    if low < -eig_tol:
        issues.append(ValidationIssue(field, "not positive within tolerance", -low))
    return issues


def _pom_issues(elements, labels, dim: int | None) -> list[ValidationIssue]:
    issues: list[ValidationIssue] = []
    if len(elements) < 1:
        issues.append(ValidationIssue("pom", "at least one outcome operator is required", math.nan))
        return issues
    if len(labels) != len(elements):
        issues.append(
            ValidationIssue("pom.labels", f"{len(labels)} labels for {len(elements)} elements", math.nan)
        )
    elif len(set(labels)) != len(labels):
        issues.append(ValidationIssue("pom.labels", "labels are not unique", math.nan))
    shapes_ok = True
    for j, el in enumerate(elements):
        el_issues = _shape_issues(f"pom.elements[{j}]", el, dim)
        if el_issues:
            issues += el_issues
            shapes_ok = False
            continue
        herm_issues = _hermitian_issues(f"pom.elements[{j}]", el)
        issues += herm_issues
        if not herm_issues:
            low = min_eigenvalue(el)
            if low < -EIGENVALUE_TOL:
                issues.append(ValidationIssue(f"pom.elements[{j}]", "not positive within tolerance", -low))
    if shapes_ok:
        total = np.sum(np.asarray(elements, dtype=np.complex128), axis=0)
        dev = float(np.max(np.abs(total - identity(total.shape[0]))))
        if dev > POM_SUM_TOL:
            issues.append(ValidationIssue("pom", "outcome operators do not sum to the identity", dev))
    return issues


def _prior_issues(priors, labels, n_states: int) -> list[ValidationIssue]:
    issues: list[ValidationIssue] = []
    if n_states < 1:
        issues.append(ValidationIssue("ensemble", "at least one preparation is required", math.nan))
        return issues
    if len(priors) != n_states:
        issues.append(
            ValidationIssue("ensemble.priors", f"{len(priors)} priors for {n_states} states", math.nan)
        )
        return issues
    if len(labels) != n_states:
        issues.append(
            ValidationIssue("ensemble.labels", f"{len(labels)} labels for {n_states} states", math.nan)
        )
    elif len(set(labels)) != len(labels):
        issues.append(ValidationIssue("ensemble.labels", "labels are not unique", math.nan))
    for i, p in enumerate(priors):
        if not math.isfinite(p) or p < 0.0:
            issues.append(ValidationIssue(f"ensemble.priors[{i}]", f"prior must be >= 0, got {p}", math.nan))
            return issues
    total_dev = abs(math.fsum(priors) - 1.0)
    if total_dev > PRIOR_SUM_TOL:
        issues.append(ValidationIssue("ensemble.priors", "priors do not sum to 1", total_dev))
    return issues


def _times_issues(t_p: float, t_m: float) -> list[ValidationIssue]:
    if not (math.isfinite(t_p) and math.isfinite(t_m)):
        return [ValidationIssue("scenario", "t_p and t_m must be finite", math.nan)]
    if t_m < t_p:
        return [ValidationIssue("scenario", "measurement time t_m precedes preparation time t_p", t_p - t_m)]
    return []


def _config_issues(steps_per_unit_time: int, record_every: int) -> list[ValidationIssue]:
    issues = []
    if not isinstance(steps_per_unit_time, int) or steps_per_unit_time < 1:
        issues.append(
            ValidationIssue("integrator.steps_per_unit_time", f"must be a positive integer, got {steps_per_unit_time!r}", math.nan)
        )
    if not isinstance(record_every, int) or record_every < 1:
        issues.append(
            ValidationIssue("integrator.record_every", f"must be a positive integer, got {record_every!r}", math.nan)
        )
    return issues


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings: step density and recording cadence."""

    steps_per_unit_time: int = 1000
    record_every: int = 10

    def __post_init__(self) -> None:
        _raise_if_issues(_config_issues(self.steps_per_unit_time, self.record_every))


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Open-system model: Hermitian Hamiltonian plus jump operators.

    Rates are carried inside the jump operators: an operator sqrt(rate/2) * A
    makes the dissipator contribute 2 A rho A^dagger - ... with overall
    prefactor rate.  An empty jump_ops tuple describes a closed system.
    """

    dim: int
    hamiltonian: np.ndarray
    jump_ops: tuple[np.ndarray, ...] = ()

    def __post_init__(self) -> None:
        jump_ops = tuple(self.jump_ops)
        _raise_if_issues(_model_issues(self.dim, self.hamiltonian, jump_ops))
        object.__setattr__(self, "hamiltonian", _frozen(self.hamiltonian))
        object.__setattr__(self, "jump_ops", tuple(_frozen(a) for a in jump_ops))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Unit-trace positive Hermitian operator describing a prepared state."""

    op: np.ndarray
    trace_tol: InitVar[float] = TRACE_TOL
    eig_tol: InitVar[float] = EIGENVALUE_TOL

    def __post_init__(self, trace_tol: float, eig_tol: float) -> None:
        _raise_if_issues(_density_issues("density", self.op, None, trace_tol, eig_tol))
        object.__setattr__(self, "op", _frozen(self.op))

    @property
    def dim(self) -> int:
        return self.op.shape[0]


@dataclass(frozen=True, eq=False)
class Pom:
    """Probability operator measure: positive elements summing to identity."""

    elements: tuple[np.ndarray, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        elements = tuple(self.elements)
        labels = tuple(self.labels)
        _raise_if_issues(_pom_issues(elements, labels, None))
        object.__setattr__(self, "elements", tuple(_frozen(el) for el in elements))
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True, eq=False)
class PreparationEnsemble:
    """Candidate preparations with their prior probabilities.

    Priors are stored exactly as given, never renormalized.
    """

    priors: tuple[float, ...]
    states: tuple[DensityOperator, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        priors = tuple(float(p) for p in self.priors)
        states = tuple(self.states)
        labels = tuple(self.labels)
        _raise_if_issues(_prior_issues(priors, labels, len(states)))
        dims = {st.dim for st in states}
        if len(dims) > 1:
            raise ValueError(f"ensemble states have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True, eq=False)
class Scenario:
    """A complete retrodiction problem over the window [t_p, t_m]."""

    model: LindbladModel
    ensemble: PreparationEnsemble
    pom: Pom
    t_p: float
    t_m: float
    integrator: IntegratorConfig = IntegratorConfig()

    def __post_init__(self) -> None:
        issues = _times_issues(self.t_p, self.t_m)
        for part, name in ((self.ensemble.dim, "ensemble"), (self.pom.dim, "pom")):
            if part != self.model.dim:
                issues.append(
                    ValidationIssue(name, f"dimension {part} does not match model dimension {self.model.dim}", math.nan)
                )
        _raise_if_issues(issues)

    @property
    def duration(self) -> float:
        return self.t_m - self.t_p


def validate_scenario_data(
    dim: int,
    hamiltonian,
    jump_ops,
    priors,
    states,
    state_labels,
    pom_elements,
    pom_labels,
    t_p: float,
    t_m: float,
    steps_per_unit_time: int = 1000,
    record_every: int = 10,
) -> ValidationReport:
    """Check every scenario invariant on raw arrays; violations are data.

    Returns an empty report iff a Scenario built from the same pieces would
    construct successfully.
    """
    issues = _model_issues(dim, hamiltonian, jump_ops)
    issues += _prior_issues(tuple(priors), tuple(state_labels), len(states))
    for i, st in enumerate(states):
        issues += _density_issues(f"ensemble.states[{i}]", st, dim)
    issues += _pom_issues(tuple(pom_elements), tuple(pom_labels), dim)
    issues += _times_issues(t_p, t_m)
    issues += _config_issues(steps_per_unit_time, record_every)
    return ValidationReport(tuple(issues))


def validate_scenario(scenario: Scenario) -> ValidationReport:
    """Re-run every invariant predicate on a constructed scenario."""
    return validate_scenario_data(
        scenario.model.dim,
        scenario.model.hamiltonian,
        scenario.model.jump_ops,
        scenario.ensemble.priors,
        [st.op for st in scenario.ensemble.states],
        scenario.ensemble.labels,
        scenario.pom.elements,
        scenario.pom.labels,
        scenario.t_p,
        scenario.t_m,
        scenario.integrator.steps_per_unit_time,
        scenario.integrator.record_every,
    )


def two_level_decay_model(gamma: float) -> LindbladModel:
    """Two-level atom decaying |e> -> |g| at rate gamma, basis order (|e>, |g>).

    The single jump operator is sqrt(gamma/2) |g><e|, so the excited
    population obeys d(rho_ee)/dt = -gamma rho_ee.
    """
    if not (math.isfinite(gamma) and gamma > 0.0):
        raise ValueError(f"decay rate must be positive, got {gamma}")
    lower = np.zeros((2, 2), dtype=np.complex128)
    lower[1, 0] = math.sqrt(gamma / 2.0)
    return LindbladModel(2, np.zeros((2, 2), dtype=np.complex128), (lower,))


def plus_minus_ensemble() -> PreparationEnsemble:
    """Equal-prior superposition states (|e> +/- |g>)/sqrt(2)."""
    plus = np.full((2, 2), 0.5, dtype=np.complex128)
    minus = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=np.complex128)
    return PreparationEnsemble(
        (0.5, 0.5),
        (DensityOperator(plus), DensityOperator(minus)),
        ("+", "-"),
    )
