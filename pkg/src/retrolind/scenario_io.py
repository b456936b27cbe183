"""Scenario JSON files and trajectory CSV output.

Scenario schema (complex entries are [re, im] pairs, matrices are row-major
nested lists):

    {
      "dim": 2,
      "hamiltonian": [[[0.0, 0.0], ...], ...],
      "jump_ops": [ <matrix>, ... ],
      "ensemble": [ {"label": "+", "prior": 0.5, "state": <matrix>}, ... ],
      "pom":      [ {"label": "+", "element": <matrix>}, ... ],
      "t_p": 0.0,
      "t_m": 1.0,
      "integrator": {"steps_per_unit_time": 1000, "record_every": 10}
    }

The integrator block is optional and defaults to 1000/10.  Structural
problems (bad JSON, missing or unknown keys, entries that are not [re, im]
pairs) raise ScenarioFormatError; physics-level violations (priors off,
incomplete measurement, ...) raise ScenarioValidationError carrying the
full ValidationReport.

Trajectory CSV: a comment line stating what the time column means, then a
header row ``time,re_00,im_00,...`` (1 + 2 dim^2 columns), then one row per
recorded state with at least 12 significant digits per value.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dynamics import Trajectory
from .model import (
    DensityOperator,
    IntegratorConfig,
    LindbladModel,
    Pom,
    PreparationEnsemble,
    Scenario,
    ValidationReport,
    validate_scenario_data,
)

__all__ = [
    "ScenarioFormatError",
    "ScenarioValidationError",
    "matrix_to_pairs",
    "matrix_from_pairs",
    "scenario_to_jsonable",
    "dump_scenario",
    "parse_scenario",
    "load_scenario",
    "write_trajectory_csv",
]

_TOP_LEVEL_KEYS = {"dim", "hamiltonian", "jump_ops", "ensemble", "pom", "t_p", "t_m", "integrator"}
_REQUIRED_KEYS = _TOP_LEVEL_KEYS - {"integrator"}


class ScenarioFormatError(ValueError):
    """The document is not a structurally well-formed scenario."""


class ScenarioValidationError(ValueError):
    """The document parsed but violates scenario invariants."""

    def __init__(self, report: ValidationReport):
        super().__init__("; ".join(report.lines()))
        self.report = report


def matrix_to_pairs(a) -> list[list[list[float]]]:
    """Complex matrix as nested lists of [re, im] pairs."""
    a = np.asarray(a, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _entry_from_pair(obj, where: str) -> complex:
    if (
        not isinstance(obj, (list, tuple))
        or len(obj) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj)
    ):
        raise ScenarioFormatError(f"{where}: expected a [re, im] pair, got {obj!r}")
    return complex(float(obj[0]), float(obj[1]))


def matrix_from_pairs(obj, where: str) -> np.ndarray:
    """Parse a nested [re, im] structure into a square complex matrix."""
    if not isinstance(obj, list) or not obj:
        raise ScenarioFormatError(f"{where}: expected a non-empty list of rows")
    dim = len(obj)
    out = np.zeros((dim, dim), dtype=np.complex128)
    for r, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != dim:
            raise ScenarioFormatError(f"{where}: row {r} does not have {dim} entries")
        for c, entry in enumerate(row):
            out[r, c] = _entry_from_pair(entry, f"{where}[{r}][{c}]")
    return out


def _require_number(obj, where: str) -> float:
    if not isinstance(obj, (int, float)) or isinstance(obj, bool):
        raise ScenarioFormatError(f"{where}: expected a number, got {obj!r}")
    return float(obj)


def _require_int(obj, where: str) -> int:
    if not isinstance(obj, int) or isinstance(obj, bool):
        raise ScenarioFormatError(f"{where}: expected an integer, got {obj!r}")
    return obj


def _require_str(obj, where: str) -> str:
    if not isinstance(obj, str):
        raise ScenarioFormatError(f"{where}: expected a string, got {obj!r}")
    return obj


def scenario_to_jsonable(scenario: Scenario) -> dict:
    """Plain-data form of a scenario, inverse of parse_scenario."""
    return {
        "dim": scenario.model.dim,
        "hamiltonian": matrix_to_pairs(scenario.model.hamiltonian),
        "jump_ops": [matrix_to_pairs(a) for a in scenario.model.jump_ops],
        "ensemble": [
            {"label": label, "prior": float(prior), "state": matrix_to_pairs(state.op)}
            for label, prior, state in zip(
                scenario.ensemble.labels, scenario.ensemble.priors, scenario.ensemble.states
            )
        ],
        "pom": [
            {"label": label, "element": matrix_to_pairs(element)}
            for label, element in zip(scenario.pom.labels, scenario.pom.elements)
        ],
        "t_p": float(scenario.t_p),
        "t_m": float(scenario.t_m),
        "integrator": {
            "steps_per_unit_time": scenario.integrator.steps_per_unit_time,
            "record_every": scenario.integrator.record_every,
        },
    }


def _is_numeric_tree(obj) -> bool:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return True
    return isinstance(obj, list) and bool(obj) and all(_is_numeric_tree(x) for x in obj)


def _render(obj, indent: int) -> str:
    """JSON text with purely numeric lists (matrices) kept on one line."""
    pad = "  " * indent
    if isinstance(obj, list):
        if _is_numeric_tree(obj):
            return json.dumps(obj)
        inner = ",\n".join(f"{pad}  {_render(x, indent + 1)}" for x in obj)
        return f"[\n{inner}\n{pad}]"
    if isinstance(obj, dict):
        inner = ",\n".join(f"{pad}  {json.dumps(k)}: {_render(v, indent + 1)}" for k, v in obj.items())
        return f"{{\n{inner}\n{pad}}}"
    return json.dumps(obj)


def dump_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(_render(scenario_to_jsonable(scenario), 0) + "\n")


def parse_scenario(doc: dict) -> Scenario:
    """Build a validated Scenario from parsed JSON data."""
    if not isinstance(doc, dict):
        raise ScenarioFormatError(f"top level must be an object, got {type(doc).__name__}")
    missing = _REQUIRED_KEYS - doc.keys()
    if missing:
        raise ScenarioFormatError(f"missing required keys: {', '.join(sorted(missing))}")
    unknown = doc.keys() - _TOP_LEVEL_KEYS
    if unknown:
        raise ScenarioFormatError(f"unknown keys: {', '.join(sorted(unknown))}")

    dim = _require_int(doc["dim"], "dim")
    hamiltonian = matrix_from_pairs(doc["hamiltonian"], "hamiltonian")
    if not isinstance(doc["jump_ops"], list):
        raise ScenarioFormatError("jump_ops: expected a list of matrices")
    jump_ops = [matrix_from_pairs(a, f"jump_ops[{q}]") for q, a in enumerate(doc["jump_ops"])]

    if not isinstance(doc["ensemble"], list) or not doc["ensemble"]:
        raise ScenarioFormatError("ensemble: expected a non-empty list")
    priors, states, state_labels = [], [], []
    for i, entry in enumerate(doc["ensemble"]):
        if not isinstance(entry, dict) or entry.keys() != {"label", "prior", "state"}:
            raise ScenarioFormatError(f"ensemble[{i}]: expected keys label, prior, state")
        state_labels.append(_require_str(entry["label"], f"ensemble[{i}].label"))
        priors.append(_require_number(entry["prior"], f"ensemble[{i}].prior"))
        states.append(matrix_from_pairs(entry["state"], f"ensemble[{i}].state"))

    if not isinstance(doc["pom"], list) or not doc["pom"]:
        raise ScenarioFormatError("pom: expected a non-empty list")
    pom_elements, pom_labels = [], []
    for j, entry in enumerate(doc["pom"]):
        if not isinstance(entry, dict) or entry.keys() != {"label", "element"}:
            raise ScenarioFormatError(f"pom[{j}]: expected keys label, element")
        pom_labels.append(_require_str(entry["label"], f"pom[{j}].label"))
        pom_elements.append(matrix_from_pairs(entry["element"], f"pom[{j}].element"))

    t_p = _require_number(doc["t_p"], "t_p")
    t_m = _require_number(doc["t_m"], "t_m")

    integrator_doc = doc.get("integrator", {})
    if not isinstance(integrator_doc, dict):
        raise ScenarioFormatError("integrator: expected an object")
    unknown = integrator_doc.keys() - {"steps_per_unit_time", "record_every"}
    if unknown:
        raise ScenarioFormatError(f"integrator: unknown keys: {', '.join(sorted(unknown))}")
    steps = _require_int(integrator_doc.get("steps_per_unit_time", 1000), "integrator.steps_per_unit_time")
    record = _require_int(integrator_doc.get("record_every", 10), "integrator.record_every")

    report = validate_scenario_data(
        dim,
        hamiltonian,
        jump_ops,
        priors,
        states,
        state_labels,
        pom_elements,
        pom_labels,
        t_p,
        t_m,
        steps,
        record,
    )
    if not report.ok:
        raise ScenarioValidationError(report)

    return Scenario(
        model=LindbladModel(dim, hamiltonian, tuple(jump_ops)),
        ensemble=PreparationEnsemble(
            tuple(priors), tuple(DensityOperator(s) for s in states), tuple(state_labels)
        ),
        pom=Pom(tuple(pom_elements), tuple(pom_labels)),
        t_p=t_p,
        t_m=t_m,
        integrator=IntegratorConfig(steps, record),
    )


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario JSON file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioFormatError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_scenario(doc)


def write_trajectory_csv(path: str | Path, trajectory: Trajectory, time_description: str) -> None:
    """Write recorded states as delimited text, one row per time."""
    dim = trajectory.states[0].shape[0]
    header = ["time"]
    for r in range(dim):
        for c in range(dim):
            header += [f"re_{r}{c}", f"im_{r}{c}"]
    lines = [f"# time column: {time_description}", ",".join(header)]
    for t, state in zip(trajectory.times, trajectory.states):
        row = [f"{t:.12e}"]
        for z in state.reshape(-1):
            row += [f"{z.real:.12e}", f"{z.imag:.12e}"]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")
