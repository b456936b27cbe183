"""Master-equation right-hand sides and a fixed-step RK4 integrator.

Sign conventions (hbar = 1).  The predictive equation evolves a prepared
state forward in laboratory time t:

    d(rho)/dt = -i [H, rho] + sum_q (2 A_q rho A_q^dag
                                     - A_q^dag A_q rho - rho A_q^dag A_q).

Outcome operators and retrodictive states evolve backward from the
measurement.  Both are parameterized here by the premeasurement time
tau = t_m - t and integrated forward in tau, so their right-hand sides are
the negatives of the corresponding d/dt forms:

    d(Pi)/d(tau)  = +i [H, Pi] + sum_q (2 A_q^dag Pi A_q
                                        - Pi A_q^dag A_q - A_q^dag A_q Pi)

    d(rho)/d(tau) = +i [H, rho] + sum_q (2 A_q^dag rho A_q
                                         - rho A_q^dag A_q - A_q^dag A_q rho)
                    + 2 rho Tr{rho sum_q [A_q^dag, A_q]}.

The identity is a fixed point of the outcome-operator equation, and the
final nonlinear term keeps the retrodictive state normalized.

For speed the evolution routines integrate the equivalent generator matrix
acting on row-major-flattened operators; the operator-form functions above
are the reference definitions and the two forms are tested against each
other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import EIGENVALUE_TOL, HERMITICITY_TOL, DensityOperator, IntegratorConfig, LindbladModel
from .operators import dagger, min_eigenvalue, scale_of, trace

__all__ = [
    "TRACE_DRIFT_TOL",
    "POSITIVITY_DRIFT_TOL",
    "HERMITICITY_STEP_TOL",
    "IntegrationError",
    "Trajectory",
    "predictive_rhs",
    "pom_premeasurement_rhs",
    "retrodictive_rhs",
    "predictive_generator",
    "pom_backward_generator",
    "rk4_integrate",
    "evolve_predictive",
    "evolve_pom_backward",
    "evolve_retrodictive",
]

TRACE_DRIFT_TOL = 1e-8  # |trace - 1| allowed on recorded evolved states
POSITIVITY_DRIFT_TOL = 1e-7  # eigenvalue negativity allowed on recorded evolved states
HERMITICITY_STEP_TOL = 1e-10  # per-step hermiticity drift, relative to state scale

_DEFAULT_CONFIG = IntegratorConfig()


class IntegrationError(RuntimeError):
    """Numerical integration produced an unusable state."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded states over the evolution's own time variable.

    times start at 0 and increase strictly; states[0] is the initial
    operator and states[-1] the solution at the full duration.
    """

    times: np.ndarray
    states: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have equal length")
        if len(self.times) == 0 or self.times[0] != 0.0:
            raise ValueError("trajectory must start at time 0")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("trajectory times must increase strictly")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.states)


def _check_model_operator(model: LindbladModel, op) -> np.ndarray:
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (model.dim, model.dim):
        raise ValueError(f"operator shape {op.shape} does not match model dimension {model.dim}")
    return op


def predictive_rhs(model: LindbladModel, rho) -> np.ndarray:
    """Forward-in-t derivative of a predictive state."""
    rho = _check_model_operator(model, rho)
    h = model.hamiltonian
    out = -1j * (h @ rho - rho @ h)
    for a in model.jump_ops:
        ad = dagger(a)
        ada = ad @ a
        out = out + 2.0 * (a @ rho @ ad) - ada @ rho - rho @ ada
    return out


def pom_premeasurement_rhs(model: LindbladModel, pi) -> np.ndarray:
    """Derivative of an outcome operator in premeasurement time tau = t_m - t."""
    pi = _check_model_operator(model, pi)
    h = model.hamiltonian
    out = 1j * (h @ pi - pi @ h)
    for a in model.jump_ops:
        ad = dagger(a)
        ada = ad @ a
        out = out + 2.0 * (ad @ pi @ a) - pi @ ada - ada @ pi
    return out


def retrodictive_rhs(model: LindbladModel, rho) -> np.ndarray:
    """Derivative of a retrodictive state in premeasurement time tau.

    The input must be normalized: the trace-preserving nonlinear term
    presumes Tr(rho) = 1 (checked to 1e-8).
    """
    rho = _check_model_operator(model, rho)
    trace_dev = abs(trace(rho) - 1.0)
    if trace_dev > 1e-8:
        raise ValueError(f"retrodictive state must have unit trace, off by {trace_dev:.3e}")
    out = pom_premeasurement_rhs(model, rho)
    gain = 0.0j
    for a in model.jump_ops:
        ad = dagger(a)
        gain += trace(rho @ (ad @ a - a @ ad))
    return out + 2.0 * gain * rho


def predictive_generator(model: LindbladModel) -> np.ndarray:
    """Matrix form of predictive_rhs on row-major-flattened operators."""
    dim = model.dim
    eye = np.eye(dim, dtype=np.complex128)
    h = model.hamiltonian
    gen = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for a in model.jump_ops:
        ada = dagger(a) @ a
        gen += 2.0 * np.kron(a, a.conj()) - np.kron(ada, eye) - np.kron(eye, ada.T)
    return gen


def pom_backward_generator(model: LindbladModel) -> np.ndarray:
    """Matrix form of pom_premeasurement_rhs on row-major-flattened operators."""
    dim = model.dim
    eye = np.eye(dim, dtype=np.complex128)
    h = model.hamiltonian
    gen = 1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for a in model.jump_ops:
        ad = dagger(a)
        ada = ad @ a
        gen += 2.0 * np.kron(ad, ad.conj()) - np.kron(ada, eye) - np.kron(eye, ada.T)
    return gen


def _jump_commutator_sum(model: LindbladModel) -> np.ndarray:
    """sum_q [A_q^dag, A_q], the operator inside the trace-preserving term."""
    total = np.zeros((model.dim, model.dim), dtype=np.complex128)
    for a in model.jump_ops:
        ad = dagger(a)
        total += ad @ a - a @ ad
    return total


def rk4_integrate(
    rhs: Callable[[np.ndarray], np.ndarray],
    x0,
    duration: float,
    config: IntegratorConfig = _DEFAULT_CONFIG,
    post_step: Callable[[np.ndarray, int], np.ndarray] | None = None,
) -> Trajectory:
    """Classical fixed-step RK4 over ceil(duration * steps_per_unit_time) steps.

    Records every record_every-th state plus the final one.  post_step, if
    given, maps (state, step_index) to the state actually kept; evolution
    wrappers use it to re-symmetrize Hermitian states.  Raises
    IntegrationError with the offending step index if the state stops being
    finite.
    """
    if not math.isfinite(duration) or duration < 0.0:
        raise ValueError(f"duration must be finite and >= 0, got {duration}")
    x = np.array(x0, dtype=np.complex128)
    times = [0.0]
    states = [x.copy()]
    if duration == 0.0:
        return Trajectory(np.asarray(times), tuple(states))
    n_steps = math.ceil(duration * config.steps_per_unit_time)
    h = duration / n_steps
    for k in range(1, n_steps + 1):
        k1 = rhs(x)
        k2 = rhs(x + (0.5 * h) * k1)
        k3 = rhs(x + (0.5 * h) * k2)
        k4 = rhs(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if post_step is not None:
            x = post_step(x, k)
        if not np.all(np.isfinite(x)):
            raise IntegrationError(f"non-finite state at step {k} of {n_steps}", step=k)
        if k % config.record_every == 0 or k == n_steps:
            times.append(k * h)
            states.append(x.copy())
    return Trajectory(np.asarray(times), tuple(states))


def _symmetrizing_post_step(dim: int) -> Callable[[np.ndarray, int], np.ndarray]:
    """Absorb per-step hermiticity round-off; loud failure if it is not round-off."""

    def post(v: np.ndarray, step: int) -> np.ndarray:
        m = v.reshape(dim, dim)
        md = m.conj().T
        scale = np.max(np.abs(m))
        drift = np.max(np.abs(m - md))
        if scale > 0.0 and drift > HERMITICITY_STEP_TOL * scale:
            raise IntegrationError(
                f"hermiticity drift {drift:.3e} exceeds {HERMITICITY_STEP_TOL:.1e} * scale at step {step}",
                step=step,
            )
        return ((m + md) * 0.5).reshape(-1)

    return post


def _unflatten(traj: Trajectory, dim: int) -> Trajectory:
    return Trajectory(traj.times, tuple(v.reshape(dim, dim) for v in traj.states))


def _check_recorded_trace(traj: Trajectory) -> None:
    for t, state in zip(traj.times, traj.states):
        dev = abs(trace(state) - 1.0)
        if dev > TRACE_DRIFT_TOL:
            raise IntegrationError(
                f"trace off by {dev:.3e} at time {t:g}; step size too coarse"
            )


def _check_recorded_positivity(traj: Trajectory) -> None:
    for t, state in zip(traj.times, traj.states):
        low = min_eigenvalue(state)
        if low < -POSITIVITY_DRIFT_TOL:
            raise IntegrationError(
                f"eigenvalue {low:.3e} below -{POSITIVITY_DRIFT_TOL:.1e} at time {t:g}; step size too coarse"
            )


def evolve_predictive(
    model: LindbladModel,
    rho_p: DensityOperator,
    duration: float,
    config: IntegratorConfig = _DEFAULT_CONFIG,
) -> Trajectory:
    """Evolve a prepared state forward over [0, duration] in laboratory time."""
    if rho_p.dim != model.dim:
        raise ValueError(f"state dimension {rho_p.dim} does not match model dimension {model.dim}")
    gen = predictive_generator(model)
    flat = rk4_integrate(
        lambda v: gen @ v,
        rho_p.op.reshape(-1),
        duration,
        config,
        post_step=_symmetrizing_post_step(model.dim),
    )
    traj = _unflatten(flat, model.dim)
    _check_recorded_trace(traj)
    _check_recorded_positivity(traj)
    return traj


def evolve_pom_backward(
    model: LindbladModel,
    pi_m,
    duration: float,
    config: IntegratorConfig = _DEFAULT_CONFIG,
) -> Trajectory:
    """Evolve an outcome operator backward from the measurement.

    The trajectory is parameterized by tau = t_m - t, so times run forward
    from 0 (the measurement) to duration (the earliest instant reached).
    """
    pi_m = _check_model_operator(model, pi_m)
    scale = scale_of(pi_m)
    if scale > 0.0 and np.max(np.abs(pi_m - pi_m.conj().T)) > HERMITICITY_TOL * scale:
        raise ValueError("outcome operator must be Hermitian")
    if min_eigenvalue(pi_m) < -EIGENVALUE_TOL:
        raise ValueError("outcome operator must be positive")
    gen = pom_backward_generator(model)
    flat = rk4_integrate(
        lambda v: gen @ v,
        pi_m.reshape(-1),
        duration,
        config,
        post_step=_symmetrizing_post_step(model.dim),
    )
    traj = _unflatten(flat, model.dim)
    _check_recorded_positivity(traj)
    return traj


def evolve_retrodictive(
    model: LindbladModel,
    rho_m: DensityOperator,
    duration: float,
    config: IntegratorConfig = _DEFAULT_CONFIG,
) -> Trajectory:
    """Evolve a retrodictive state backward from the measurement.

    Same parameterization as evolve_pom_backward; the nonlinear term keeps
    every recorded state unit-trace.
    """
    if rho_m.dim != model.dim:
        raise ValueError(f"state dimension {rho_m.dim} does not match model dimension {model.dim}")
    gen = pom_backward_generator(model)
    kvec = _jump_commutator_sum(model).T.reshape(-1)

    def rhs(v: np.ndarray) -> np.ndarray:
        return gen @ v + (2.0 * (kvec @ v)) * v

    flat = rk4_integrate(
        rhs,
        rho_m.op.reshape(-1),
        duration,
        config,
        post_step=_symmetrizing_post_step(model.dim),
    )
    traj = _unflatten(flat, model.dim)
    _check_recorded_trace(traj)
    _check_recorded_positivity(traj)
    return traj
