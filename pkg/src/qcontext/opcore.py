"""Dense complex matrix helpers and operator-class predicates.

Every operator is a ``numpy`` array of dtype ``complex128``. Equalities
between operators are decided by Frobenius distance against a tolerance
``tol`` (default ``DEFAULT_TOL``).
"""
from __future__ import annotations

import enum
from typing import Tuple

import numpy as np

from .errors import NonSquare, NotSelfAdjoint, ShapeMismatch

DEFAULT_TOL = 1e-9
MAX_DIM = 256


class OperatorClass(enum.Enum):
    GENERAL = "general"
    SELF_ADJOINT = "self-adjoint"
    POSITIVE = "positive"
    EFFECT = "effect"
    PROJECTION = "projection"
    DENSITY = "density"
    UNITARY = "unitary"
    RANK_ONE_PROJECTION = "rank-one-projection"


def check_tol(tol: float) -> float:
    tol = float(tol)
    if not np.isfinite(tol) or tol < 0:
        raise ValueError(f"tolerance must be a finite nonnegative number, got {tol}")
    return tol


def as_matrix(A) -> np.ndarray:
    """Coerce ``A`` to a finite 2-D complex array."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    return M


def as_square(A) -> np.ndarray:
    M = as_matrix(A)
    if M.shape[0] != M.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {M.shape[0]} exceeds the supported bound {MAX_DIM}")
    return M


def dag(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def ket(vector) -> np.ndarray:
    return np.asarray(vector, dtype=np.complex128).reshape(-1)


def projector(vector) -> np.ndarray:
    """Return |v><v| for a (not necessarily normalized) vector ``v``."""
    v = ket(vector)
    return np.outer(v, v.conj())


def matrix_unit(n: int, r: int, s: int) -> np.ndarray:
    E = np.zeros((n, n), dtype=np.complex128)
    E[r, s] = 1.0
    return E


def matrix_units(n: int):
    for r in range(n):
        for s in range(n):
            yield (r, s), matrix_unit(n, r, s)


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def frobenius_distance(A, B) -> float:
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise ShapeMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    return float(np.linalg.norm(A - B))


def _herm_eigvals(A: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh((A + dag(A)) / 2)


def classify(A, tol: float = DEFAULT_TOL) -> set:
    """Return the set of :class:`OperatorClass` members whose predicate holds.

    The predicates are nested so that the containment chain
    rank-one projection < projection < effect < positive < self-adjoint is
    respected at every tolerance. ``GENERAL`` is reported only when no other
    class applies.
    """
    A = as_square(A)
    tol = check_tol(tol)
    n = A.shape[0]
    I = np.eye(n)
    classes = set()

    self_adjoint = np.linalg.norm(A - dag(A)) <= tol
    if self_adjoint:
        classes.add(OperatorClass.SELF_ADJOINT)
        evals = _herm_eigvals(A)
        trace = np.trace(A)
        positive = evals[0] >= -tol
        if positive:
            classes.add(OperatorClass.POSITIVE)
            if abs(trace - 1) <= tol:
                classes.add(OperatorClass.DENSITY)
            if evals[-1] <= 1 + tol:
                classes.add(OperatorClass.EFFECT)
                if np.linalg.norm(A @ A - A) <= tol:
                    classes.add(OperatorClass.PROJECTION)
                    if abs(trace - 1) <= tol:
                        classes.add(OperatorClass.RANK_ONE_PROJECTION)

    if np.linalg.norm(dag(A) @ A - I) <= tol and np.linalg.norm(A @ dag(A) - I) <= tol:
        classes.add(OperatorClass.UNITARY)

    if not classes:
        classes.add(OperatorClass.GENERAL)
    return classes


def is_self_adjoint(A, tol: float = DEFAULT_TOL) -> bool:
    return OperatorClass.SELF_ADJOINT in classify(A, tol)


def is_effect(A, tol: float = DEFAULT_TOL) -> bool:
    return OperatorClass.EFFECT in classify(A, tol)


def is_projection(A, tol: float = DEFAULT_TOL) -> bool:
    return OperatorClass.PROJECTION in classify(A, tol)


def is_density(A, tol: float = DEFAULT_TOL) -> bool:
    return OperatorClass.DENSITY in classify(A, tol)


def is_unitary(A, tol: float = DEFAULT_TOL) -> bool:
    return OperatorClass.UNITARY in classify(A, tol)


def classification_residuals(A) -> dict:
    """Raw residuals behind each predicate of :func:`classify`."""
    A = as_square(A)
    n = A.shape[0]
    I = np.eye(n)
    evals = _herm_eigvals(A)
    trace = np.trace(A)
    return {
        "self_adjoint": float(np.linalg.norm(A - dag(A))),
        "min_eigenvalue": float(evals[0]),
        "max_eigenvalue": float(evals[-1]),
        "idempotence": float(np.linalg.norm(A @ A - A)),
        "trace_minus_one": float(abs(trace - 1)),
        "unitarity": float(max(np.linalg.norm(dag(A) @ A - I), np.linalg.norm(A @ dag(A) - I))),
    }


def normalize_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude component is real and positive.

    Ties go to the first such component.
    """
    v = ket(v)
    mags = np.abs(v)
    k = int(np.argmax(mags >= mags.max() - 1e-12)) if v.size else 0
    if mags[k] == 0:
        return v.copy()
    return v * (abs(v[k]) / v[k])


def hermitian_eigensystem(A, tol: float = DEFAULT_TOL) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a self-adjoint matrix.

    Returns ``(eigenvalues, V)`` with eigenvalues ascending and the
    eigenvectors as the orthonormal columns of ``V``, each column
    phase-normalized by :func:`normalize_phase`.
    """
    A = as_square(A)
    tol = check_tol(tol)
    if np.linalg.norm(A - dag(A)) > tol:
        raise NotSelfAdjoint("matrix is not self-adjoint within tolerance")
    evals, V = np.linalg.eigh((A + dag(A)) / 2)
    V = np.column_stack([normalize_phase(V[:, k]) for k in range(V.shape[1])])
    return evals, V


def random_unitary(n: int, seed: int = 0) -> np.ndarray:
    """Haar-random unitary from QR of a seeded complex Gaussian matrix."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (Z + dag(Z)) / 2


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = n if rank is None else rank
    Z = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = Z @ dag(Z)
    return rho / np.trace(rho).real
