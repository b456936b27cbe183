"""Retrodictive master-equation toolkit for open quantum systems.

Evolve prepared states forward, carry measurement outcome operators
backward to the preparation, and answer both inference questions: what
will be measured, and what was prepared.
"""

from .atom import analytic_preparation_probability, analytic_retrodictive_state, demo_scenario
from .dynamics import (
    IntegrationError,
    Trajectory,
    evolve_pom_backward,
    evolve_predictive,
    evolve_retrodictive,
    pom_backward_generator,
    pom_premeasurement_rhs,
    predictive_generator,
    predictive_rhs,
    retrodictive_rhs,
    rk4_integrate,
)
from .inference import (
    ProbabilityTable,
    bayes_from_predictive,
    collapse_time_sweep,
    normalize_to_retrodictive,
    predict_outcome_probs,
    preparation_operators,
    retrodict_preparation_probs,
)
from .model import (
    DensityOperator,
    IntegratorConfig,
    LindbladModel,
    Pom,
    PreparationEnsemble,
    Scenario,
    ValidationIssue,
    ValidationReport,
    plus_minus_ensemble,
    two_level_decay_model,
    validate_scenario,
    validate_scenario_data,
)
from .operators import (
    commutator,
    dagger,
    frobenius_distance,
    hermitian_deviation,
    hermitian_eigenvalues,
    min_eigenvalue,
    trace,
)
from .scenario_io import (
    ScenarioFormatError,
    ScenarioValidationError,
    dump_scenario,
    load_scenario,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "analytic_preparation_probability",
    "analytic_retrodictive_state",
    "bayes_from_predictive",
    "collapse_time_sweep",
    "commutator",
    "dagger",
    "demo_scenario",
    "DensityOperator",
    "dump_scenario",
    "evolve_pom_backward",
    "evolve_predictive",
    "evolve_retrodictive",
    "frobenius_distance",
    "hermitian_deviation",
    "hermitian_eigenvalues",
    "IntegrationError",
    "IntegratorConfig",
    "LindbladModel",
    "load_scenario",
    "min_eigenvalue",
    "normalize_to_retrodictive",
    "plus_minus_ensemble",
    "Pom",
    "pom_backward_generator",
    "pom_premeasurement_rhs",
    "predict_outcome_probs",
    "predictive_generator",
    "predictive_rhs",
    "PreparationEnsemble",
    "preparation_operators",
    "ProbabilityTable",
    "retrodict_preparation_probs",
    "retrodictive_rhs",
    "rk4_integrate",
    "Scenario",
    "ScenarioFormatError",
    "ScenarioValidationError",
    "trace",
    "Trajectory",
    "two_level_decay_model",
    "validate_scenario",
    "validate_scenario_data",
    "ValidationIssue",
    "ValidationReport",
    "write_trajectory_csv",
]
