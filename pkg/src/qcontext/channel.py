"""Unital channels and their channel maps.

A channel is a finite family of nonzero branches ``M_i`` with
``sum M_i^* M_i = sum M_i M_i^* = I``. Its channel map is
``L(A) = sum M_i^* A M_i``. Two channels are considered equal when their
maps agree; branch lists are not unique.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import ShapeMismatch, UnitalityViolation, VerdictMismatch, ZeroBranch
from .opcore import DEFAULT_TOL, as_square, check_tol, dag, matrix_units, random_unitary


def _frozen(A: np.ndarray) -> np.ndarray:
    A = np.array(A, dtype=np.complex128)
    A.setflags(write=False)
    return A


@dataclass(frozen=True, eq=False)
class Channel:
    dim: int
    branches: Tuple[np.ndarray, ...]

    def __len__(self):
        return len(self.branches)

    def map(self, A) -> np.ndarray:
        return apply_map(self, A)

    def unitality_residuals(self) -> Tuple[float, float]:
        return unitality_residuals(self.branches)


def unitality_residuals(branches: Sequence[np.ndarray]) -> Tuple[float, float]:
    n = branches[0].shape[0]
    left = sum(dag(M) @ M for M in branches)
    right = sum(M @ dag(M) for M in branches)
    I = np.eye(n)
    return float(np.linalg.norm(left - I)), float(np.linalg.norm(right - I))


def _check_branches(branches, tol: float) -> list:
    if len(branches) == 0:
        raise ValueError("a channel needs at least one branch")
    mats = [as_square(M) for M in branches]
    n = mats[0].shape[0]
    for M in mats:
        if M.shape != (n, n):
            raise ShapeMismatch(f"branch shape {M.shape} differs from {(n, n)}")
    for i, M in enumerate(mats):
        if np.linalg.norm(M) <= tol:
            raise ZeroBranch(f"branch {i} is zero within tolerance", index=i)
    left, right = unitality_residuals(mats)
    if left > tol or right > tol:
        raise UnitalityViolation(
            f"unitality sums deviate from I: |sum M*M - I| = {left:.3e}, "
            f"|sum MM* - I| = {right:.3e}",
            residual_left=left,
            residual_right=right,
        )
    return mats


def make_channel(branches, tol: float = DEFAULT_TOL) -> Channel:
    """Validate ``branches`` and build a :class:`Channel`."""
    tol = check_tol(tol)
    mats = _check_branches(branches, tol)
    return Channel(mats[0].shape[0], tuple(_frozen(M) for M in mats))


def identity_channel(n: int) -> Channel:
    return make_channel([np.eye(n)])


def _require_dim(channel: Channel, A: np.ndarray) -> None:
    if A.shape != (channel.dim, channel.dim):
        raise ShapeMismatch(f"operator shape {A.shape} does not match channel dim {channel.dim}")


def _same_dim(a: Channel, b: Channel) -> None:
    if a.dim != b.dim:
        raise ShapeMismatch(f"channel dimensions differ: {a.dim} vs {b.dim}")


def apply_map(channel: Channel, A) -> np.ndarray:
    A = as_square(A)
    _require_dim(channel, A)
    out = np.zeros_like(A)
    for M in channel.branches:
        out += dag(M) @ A @ M
    return out


def compose(a: Channel, b: Channel, tol: float = DEFAULT_TOL) -> Channel:
    """Channel whose map is ``L_a`` applied after ``L_b``.

    The branches are the products ``N_j M_i`` (``M_i`` from ``a``, ``N_j``
    from ``b``), because ``(N M)^* A (N M) = M^* (N^* A N) M``. Products
    with Frobenius norm at most ``tol`` are dropped.
    """
    tol = check_tol(tol)
    _same_dim(a, b)
    products = []
    for M in a.branches:
        for N in b.branches:
            P = N @ M
            if np.linalg.norm(P) > tol:
                products.append(P)
    return Channel(a.dim, tuple(_frozen(P) for P in products))


def maps_equal(a: Channel, b: Channel, tol: float = DEFAULT_TOL) -> bool:
    """True when the channel maps agree on every matrix unit ``E_rs``."""
    return map_distance(a, b) <= check_tol(tol)


def map_distance(a: Channel, b: Channel) -> float:
    """Largest Frobenius distance between ``L_a(E_rs)`` and ``L_b(E_rs)``."""
    _same_dim(a, b)
    worst = 0.0
    for _, E in matrix_units(a.dim):
        worst = max(worst, float(np.linalg.norm(apply_map(a, E) - apply_map(b, E))))
    return worst


def commutator_residual(A, channel: Channel) -> float:
    A = as_square(A)
    _require_dim(channel, A)
    return max(float(np.linalg.norm(A @ M - M @ A)) for M in channel.branches)


def is_measurable(A, channel: Channel, tol: float = DEFAULT_TOL) -> bool:
    """True when ``A`` commutes with every branch of ``channel``."""
    return commutator_residual(A, channel) <= check_tol(tol)


def is_sharp_channel(channel: Channel, tol: float = DEFAULT_TOL) -> bool:
    tol = check_tol(tol)
    return all(
        np.linalg.norm(M - dag(M)) <= tol and np.linalg.norm(M @ M - M) <= tol
        for M in channel.branches
    )


def fixed_point_check(A, channel: Channel, tol: float = DEFAULT_TOL) -> dict:
    """Report whether ``A`` is measurable for ``channel`` and whether it is fixed by its map.

    Measurable operators are always fixed points; for sharp channels the
    converse holds as well. Either implication failing raises
    :class:`VerdictMismatch`.
    """
    tol = check_tol(tol)
    A = as_square(A)
    comm = commutator_residual(A, channel)
    fixed_res = float(np.linalg.norm(apply_map(channel, A) - A))
    measurable = comm <= tol
    fixed = fixed_res <= tol
    sharp = is_sharp_channel(channel, tol)
    if measurable and not fixed:
        raise VerdictMismatch(
            "measurable operator is not a fixed point of the channel map",
            witness={"commutator": comm, "fixed_residual": fixed_res},
        )
    if sharp and fixed and not measurable:
        raise VerdictMismatch(
            "fixed point of a sharp channel map is not measurable",
            witness={"commutator": comm, "fixed_residual": fixed_res},
        )
    return {
        "measurable": measurable,
        "fixed": fixed,
        "sharp": sharp,
        "commutator_residual": comm,
        "fixed_residual": fixed_res,
    }


def random_map_apply(A) -> np.ndarray:
    """The completely random map ``A -> tr(A) I / n``."""
    A = as_square(A)
    n = A.shape[0]
    return np.trace(A) * np.eye(n, dtype=np.complex128) / n


def fourier_matrix(n: int) -> np.ndarray:
    """Unitary whose column ``k`` has components ``omega^(jk) / sqrt(n)``."""
    j = np.arange(n)
    return np.exp(2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)


def completely_random_channel(n: int) -> Channel:
    """Channel with branches ``|psi_j><phi_i| / sqrt(n)``.

    ``phi`` is the standard basis and ``psi`` the Fourier basis.
    """
    if n < 1:
        raise ValueError("n must be positive")
    F = fourier_matrix(n)
    branches = []
    for i in range(n):
        for j in range(n):
            B = np.zeros((n, n), dtype=np.complex128)
            B[:, i] = F[:, j]
            branches.append(B / np.sqrt(n))
    return make_channel(branches)


def random_unital_channel(n: int, k: int, seed: int = 0) -> Channel:
    """Seeded mixed-unitary channel ``{sqrt(p_i) U_i}`` with ``k`` branches."""
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(k))
    seeds = rng.integers(0, 2**31, size=k)
    return make_channel([np.sqrt(pi) * random_unitary(n, int(s)) for pi, s in zip(p, seeds)])
