"""Dense complex operator algebra.

Small helpers shared by every other module: adjoints, commutators, traces,
Hermiticity and distance metrics, and an iterative eigensolver for Hermitian
matrices (cyclic Jacobi rotations).  Everything works on plain numpy arrays
holding complex128 entries; hbar = 1 throughout the package.

Relative tolerances in this package are measured against the largest entry
modulus of the operand (see :func:`scale_of`).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "as_operator",
    "identity",
    "scale_of",
    "dagger",
    "commutator",
    "trace",
    "symmetrize",
    "hermitian_deviation",
    "frobenius_distance",
    "hermitian_eigenvalues",
    "min_eigenvalue",
]

_JACOBI_TOL = 1e-13
_JACOBI_SWEEP_LIMIT = 60


def as_operator(entries) -> np.ndarray:
    """Coerce to a square complex matrix, requiring finite entries."""
    a = np.asarray(entries, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"operator must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("operator entries must be finite")
    return a


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def scale_of(a) -> float:
    """Largest entry modulus; the reference for relative tolerances."""
    return float(np.max(np.abs(a)))


def dagger(a) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def _require_same_dim(a, b, what: str) -> None:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"{what} requires equal dimensions, got {a.shape} and {b.shape}")


def commutator(a, b) -> np.ndarray:
    """A @ B - B @ A for same-dimension operators."""
    _require_same_dim(a, b, "commutator")
    return a @ b - b @ a


def trace(a) -> complex:
    """Sum of diagonal entries, as a Python complex."""
    return complex(np.trace(a))


def symmetrize(a) -> np.ndarray:
    """(A + A^dagger) / 2."""
    return (a + dagger(a)) / 2.0


def hermitian_deviation(a) -> float:
    """Largest entrywise modulus of A - A^dagger; zero iff exactly Hermitian."""
    return float(np.max(np.abs(a - dagger(a))))


def frobenius_distance(a, b) -> float:
    """Square root of the summed squared entry-modulus differences."""
    _require_same_dim(a, b, "frobenius_distance")
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def _jacobi_rotate(m: np.ndarray, p: int, q: int) -> None:
    """Zero the (p, q) entry of Hermitian m with a unitary plane rotation."""
    z = m[p, q]
    r = abs(z)
    if r == 0.0:
        return
    phase = z / r
    theta = 0.5 * math.atan2(2.0 * r, m[p, p].real - m[q, q].real)
    c = math.cos(theta)
    s = math.sin(theta)
    col_p = c * m[:, p] + s * np.conj(phase) * m[:, q]
    col_q = -s * phase * m[:, p] + c * m[:, q]
    m[:, p] = col_p
    m[:, q] = col_q
    row_p = c * m[p, :] + s * phase * m[q, :]
    row_q = -s * np.conj(phase) * m[p, :] + c * m[q, :]
    m[p, :] = row_p
    m[q, :] = row_q
    m[p, q] = 0.0
    m[q, p] = 0.0
    m[p, p] = m[p, p].real
    m[q, q] = m[q, q].real


def hermitian_eigenvalues(a, herm_tol: float = 1e-8) -> np.ndarray:
    """All eigenvalues of a Hermitian operator, ascending.

    Cyclic Jacobi sweeps run until the largest off-diagonal modulus falls
    below 1e-13 relative to the input scale.  The input must be Hermitian to
    within ``herm_tol`` relative to its largest entry modulus; the internal
    symmetrization only absorbs round-off.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    dim = a.shape[0]
    scale = scale_of(a)
    if scale == 0.0:
        return np.zeros(dim)
    if hermitian_deviation(a) > herm_tol * scale:
        raise ValueError(
            f"operator is not Hermitian: deviation {hermitian_deviation(a):.3e} "
            f"exceeds {herm_tol:.1e} * scale"
        )
    m = np.array(symmetrize(a))
    if dim == 1:
        return np.array([m[0, 0].real])
    threshold = _JACOBI_TOL * scale
    off_diag = ~np.eye(dim, dtype=bool)
    for _ in range(_JACOBI_SWEEP_LIMIT):
        if np.max(np.abs(m[off_diag])) <= threshold:
            break
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                _jacobi_rotate(m, p, q)
    else:
        raise RuntimeError("Jacobi eigensolver failed to converge")
    return np.sort(np.diag(m).real)


def min_eigenvalue(a, herm_tol: float = 1e-8) -> float:
    """Smallest eigenvalue of a Hermitian operator (errors if not Hermitian)."""
    return float(hermitian_eigenvalues(a, herm_tol=herm_tol)[0])
