"""Mutually unbiased contexts and unbiased operators."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import (
    Channel,
    apply_map,
    compose,
    fourier_matrix,
    maps_equal,
    random_map_apply,
)
from .errors import InvalidBlockBasis, NotUnitVector, ShapeMismatch, VerdictMismatch
from .opcore import DEFAULT_TOL, as_square, check_tol, dag, ket, matrix_units
from .sharp_order import Context, SharpChannel, as_sharp, context_from_basis, standard_context


def _same_dim(a, b):
    if a.dim != b.dim:
        raise ShapeMismatch(f"dimensions differ: {a.dim} vs {b.dim}")


def overlaps(a: Context, b: Context) -> np.ndarray:
    """``G[i, j] = <phi_i, psi_j>`` for ``a = {phi_i}``, ``b = {psi_j}``."""
    _same_dim(a, b)
    return dag(a.basis) @ b.basis


def transition_matrix(a: Context, b: Context) -> np.ndarray:
    return np.abs(overlaps(a, b)) ** 2


def fourier_context(n: int) -> Context:
    if n < 1:
        raise ValueError("n must be positive")
    return context_from_basis(fourier_matrix(n))


def qubit_mub_triple():
    """The standard, diagonal and circular bases of C^2; pairwise unbiased."""
    s = 1 / np.sqrt(2)
    triple = (
        standard_context(2),
        context_from_basis([[s, s], [-s, s]]),
        context_from_basis([[s, 1j * s], [s, -1j * s]]),
    )
    for x in range(3):
        for y in range(x + 1, 3):
            assert mutually_unbiased(triple[x], triple[y]).mutually_unbiased
    return triple


def is_unbiased_vector(psi, ctx: Context, tol: float = DEFAULT_TOL) -> bool:
    tol = check_tol(tol)
    psi = ket(psi)
    if psi.size != ctx.dim:
        raise ShapeMismatch(f"vector length {psi.size} does not match dim {ctx.dim}")
    if abs(np.linalg.norm(psi) - 1) > tol:
        raise NotUnitVector(f"vector norm is {np.linalg.norm(psi):.12g}")
    probs = np.abs(dag(ctx.basis) @ psi) ** 2
    return bool(np.all(np.abs(probs - 1 / ctx.dim) <= tol))


@dataclass(frozen=True)
class MubVerdict:
    mutually_unbiased: bool
    transition_matrix: np.ndarray
    max_deviation: float

    def to_dict(self) -> dict:
        return {
            "mutually_unbiased": self.mutually_unbiased,
            "max_deviation": self.max_deviation,
            "transition_matrix": self.transition_matrix.tolist(),
        }


def mutually_unbiased(a: Context, b: Context, tol: float = DEFAULT_TOL) -> MubVerdict:
    tol = check_tol(tol)
    T = transition_matrix(a, b)
    n = a.dim
    stochastic = max(np.max(np.abs(T.sum(axis=0) - 1)), np.max(np.abs(T.sum(axis=1) - 1)))
    if stochastic > max(tol, 1e-12):
        raise VerdictMismatch(f"transition matrix is not doubly stochastic ({stochastic:.3e})")
    deviation = float(np.max(np.abs(T - 1 / n)))
    return MubVerdict(deviation <= tol, T, deviation)


@dataclass(frozen=True)
class Eq31Report:
    """Residuals of the commutation criterion for two context maps.

    ``offdiag_terms[i, r, s]`` is ``sum_j |<phi_i,psi_j>|^2 <psi_j,phi_r> <phi_s,psi_j>``;
    it must vanish for ``r != s``. ``diag_lhs[i, r]`` is the ``r == s``
    value, which must equal ``|<psi_k,phi_r>|^2`` for every ``k`` with
    ``<phi_i,psi_k> != 0``.
    """

    holds: bool
    off_diagonal_residual: float
    diagonal_residual: float
    offdiag_terms: np.ndarray = field(repr=False)
    diag_lhs: np.ndarray = field(repr=False)
    transition: np.ndarray = field(repr=False)
    maps_commute: bool = True

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "off_diagonal_residual": self.off_diagonal_residual,
            "diagonal_residual": self.diagonal_residual,
            "maps_commute": self.maps_commute,
        }


def eq31_terms(a: Context, b: Context):
    G = overlaps(a, b)
    T = np.abs(G) ** 2
    # offdiag[i, r, s] = sum_j T[i, j] conj(G[r, j]) G[s, j]
    offdiag = np.einsum("ij,rj,sj->irs", T, G.conj(), G)
    diag_lhs = T @ T.T
    return G, T, offdiag, diag_lhs


def eq31_check(a: Context, b: Context, tol: float = DEFAULT_TOL) -> Eq31Report:
    """Evaluate the index criterion for ``L_a L_b = L_b L_a``.

    The verdict is cross-checked against direct comparison of the composed
    maps on matrix units.
    """
    tol = check_tol(tol)
    _same_dim(a, b)
    n = a.dim
    G, T, offdiag, diag_lhs = eq31_terms(a, b)
    off_mask = ~np.eye(n, dtype=bool)
    off_res = float(np.max(np.abs(offdiag[:, off_mask]))) if n > 1 else 0.0
    diag_res = 0.0
    for i in range(n):
        for k in range(n):
            if abs(G[i, k]) <= tol:
                continue
            diag_res = max(diag_res, float(np.max(np.abs(diag_lhs[i, :] - T[:, k]))))
    holds = off_res <= tol and diag_res <= tol
    commute = maps_equal(compose(a, b, tol), compose(b, a, tol), tol)
    if holds != commute:
        raise VerdictMismatch(
            f"index criterion ({holds}) disagrees with map commutation ({commute})",
            witness={"off_diagonal_residual": off_res, "diagonal_residual": diag_res},
        )
    return Eq31Report(holds, off_res, diag_res, offdiag, diag_lhs, T, commute)


def cor33_equivalences(a: Context, b: Context, tol: float = DEFAULT_TOL) -> dict:
    """Four equivalent characterizations of mutual unbiasedness.

    ``mub``: every ``|<phi_i,psi_j>|^2 = 1/n``. ``map_is_R``: ``L_a L_b``
    is the completely random map. ``sum_condition``:
    ``sum_i P_i Q_k P_i = I/n`` for all ``k``. ``block_condition``:
    ``P_j Q_k P_j = P_j / n`` for all ``j, k``.
    """
    tol = check_tol(tol)
    _same_dim(a, b)
    n = a.dim
    I = np.eye(n)
    mub = mutually_unbiased(a, b, tol).mutually_unbiased
    map_is_R = all(
        np.linalg.norm(apply_map(a, apply_map(b, E)) - random_map_apply(E)) <= tol
        for _, E in matrix_units(n)
    )
    sum_condition = all(
        np.linalg.norm(sum(P @ Q @ P for P in a.branches) - I / n) <= tol for Q in b.branches
    )
    block_condition = all(
        np.linalg.norm(P @ Q @ P - P / n) <= tol for P in a.branches for Q in b.branches
    )
    verdicts = {"mub": mub, "map_is_R": map_is_R, "sum_condition": sum_condition,
                "block_condition": block_condition}
    if len(set(verdicts.values())) != 1:
        raise VerdictMismatch(f"equivalent conditions disagree: {verdicts}", witness=verdicts)
    return verdicts


def unbiased_residual(A, channel: Channel) -> float:
    """``|L(A) - tr(A) I / n|_F``."""
    A = as_square(A)
    return float(np.linalg.norm(apply_map(channel, A) - random_map_apply(A)))


def is_unbiased_operator(A, channel: Channel, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``L(A) = tr(A) I / n`` for the channel's map.

    For a context the diagonal form ``<phi_i, A phi_i> = tr(A)/n`` is
    checked as well and must agree.
    """
    tol = check_tol(tol)
    A = as_square(A)
    if A.shape != (channel.dim, channel.dim):
        raise ShapeMismatch(f"operator shape {A.shape} does not match dim {channel.dim}")
    verdict = unbiased_residual(A, channel) <= tol
    if isinstance(channel, Context):
        d = channel.diagonal(A)
        diag_verdict = bool(np.all(np.abs(d - np.trace(A) / channel.dim) <= tol))
        if diag_verdict != verdict:
            raise VerdictMismatch(
                f"map form ({verdict}) and diagonal form ({diag_verdict}) disagree",
                witness={"diagonal": d},
            )
    return verdict


def default_block_bases(sharp: SharpChannel) -> list:
    """An orthonormal basis of each projection's range (eigenvectors with eigenvalue 1)."""
    bases = []
    for P in sharp.branches:
        evals, V = np.linalg.eigh((P + dag(P)) / 2)
        bases.append(V[:, evals > 0.5])
    return bases


def thm35_block_check(A, sharp: SharpChannel, block_bases=None,
                      tol: float = DEFAULT_TOL) -> dict:
    """Unbiasedness via matrix elements inside each projection's range.

    ``A`` is unbiased in ``sharp`` iff ``<phi_ij, A phi_ik> = tr(A)/n delta_jk``
    for an orthonormal basis ``phi_i1, phi_i2, ...`` of every range. The
    verdict must agree with :func:`is_unbiased_operator`.
    """
    tol = check_tol(tol)
    sharp = as_sharp(sharp, tol)
    A = as_square(A)
    n = sharp.dim
    if A.shape != (n, n):
        raise ShapeMismatch(f"operator shape {A.shape} does not match dim {n}")
    if block_bases is None:
        block_bases = default_block_bases(sharp)
    if len(block_bases) != len(sharp.branches):
        raise InvalidBlockBasis("need one block basis per projection")
    target = np.trace(A) / n
    violating = []
    for i, (P, V) in enumerate(zip(sharp.branches, block_bases)):
        V = np.asarray(V, dtype=np.complex128)
        if V.ndim == 1:
            V = V.reshape(-1, 1)
        if V.shape[0] != n:
            raise InvalidBlockBasis(f"block basis {i} has vectors of length {V.shape[0]}", index=i)
        k = V.shape[1]
        if np.linalg.norm(dag(V) @ V - np.eye(k)) > tol or np.linalg.norm(V @ dag(V) - P) > tol:
            raise InvalidBlockBasis(f"block basis {i} is not an orthonormal basis of the range",
                                    index=i)
        block = dag(V) @ A @ V
        if np.max(np.abs(block - target * np.eye(k))) > tol:
            violating.append(i)
    unbiased = not violating
    direct = is_unbiased_operator(A, sharp, tol)
    if direct != unbiased:
        raise VerdictMismatch(
            f"block criterion ({unbiased}) disagrees with the channel-map test ({direct})",
            witness={"violating_blocks": violating},
        )
    return {"unbiased": unbiased, "violating_blocks": violating}


def _normalized(A: np.ndarray) -> np.ndarray:
    s = np.linalg.norm(A, 2)
    return A / s if s > 0 else A


def is_strongly_unbiased(A, channel: Channel, tol: float = DEFAULT_TOL) -> dict:
    """Decide whether every power ``A^m`` (m >= 1) is unbiased.

    Unbiasedness is linear in the operator and ``I`` is always unbiased, so
    by Cayley-Hamilton it suffices to test ``m = 1, ..., n-1``. Unbiasedness
    is also invariant under scaling, so the powers are taken of ``A``
    divided by its spectral norm.
    """
    tol = check_tol(tol)
    A = as_square(A)
    if A.shape != (channel.dim, channel.dim):
        raise ShapeMismatch(f"operator shape {A.shape} does not match dim {channel.dim}")
    n = channel.dim
    B = _normalized(A)
    power = np.eye(n, dtype=np.complex128)
    for m in range(1, max(1, n - 1) + 1):
        power = power @ B
        if unbiased_residual(power, channel) > tol:
            return {"strongly_unbiased": False, "first_failing_power": m}
    return {"strongly_unbiased": True, "first_failing_power": None}


def strongly_unbiased_bruteforce(A, channel: Channel, max_power: int = 64,
                                 tol: float = DEFAULT_TOL) -> Optional[int]:
    """Oracle: first power up to ``max_power`` that is not unbiased, else ``None``."""
    A = as_square(A)
    B = _normalized(A)
    power = np.eye(channel.dim, dtype=np.complex128)
    for m in range(1, max_power + 1):
        power = power @ B
        if unbiased_residual(power, channel) > tol:
            return m
    return None
