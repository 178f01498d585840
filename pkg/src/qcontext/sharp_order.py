"""Sharp channels, contexts and the refinement order between them.

A sharp channel is a channel whose branches are projections (hence
pairwise orthogonal and summing to I). A context is a sharp channel of
rank-one projections, i.e. an orthonormal basis. ``A <= B`` when every
projection of ``A`` sits under some projection of ``B``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .channel import Channel, _frozen, apply_map, compose, make_channel, maps_equal
from .errors import DecompositionFailure, NotRankOne, NotSharp, ShapeMismatch, VerdictMismatch
from .opcore import (
    DEFAULT_TOL,
    as_square,
    check_tol,
    dag,
    hermitian_eigensystem,
    is_projection,
    ket,
    normalize_phase,
    projector,
    random_unit_vector,
)


@dataclass(frozen=True, eq=False)
class SharpChannel(Channel):
    @property
    def projections(self):
        return self.branches


@dataclass(frozen=True, eq=False)
class Context(SharpChannel):
    # columns are the basis vectors phi_i
    basis: np.ndarray = None

    def vector(self, i: int) -> np.ndarray:
        return self.basis[:, i]

    def diagonal(self, A) -> np.ndarray:
        """The expectations ``<phi_i, A phi_i>``."""
        A = as_square(A)
        return np.einsum("ji,jk,ki->i", self.basis.conj(), A, self.basis)


def context_from_basis(vectors, tol: float = DEFAULT_TOL) -> Context:
    """Build a context from an orthonormal basis.

    ``vectors`` is either a square matrix whose columns are the basis
    vectors or a sequence of vectors.
    """
    tol = check_tol(tol)
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        V = np.asarray(vectors, dtype=np.complex128)
    else:
        V = np.column_stack([ket(v) for v in vectors])
    n = V.shape[0]
    if V.shape != (n, n):
        raise ShapeMismatch(f"a context on C^{n} needs exactly {n} vectors, got {V.shape[1]}")
    gram_res = float(np.linalg.norm(dag(V) @ V - np.eye(n)))
    if gram_res > tol:
        raise ValueError(f"basis is not orthonormal (Gram residual {gram_res:.3e})")
    projections = [projector(V[:, i]) for i in range(n)]
    return Context(n, tuple(_frozen(P) for P in projections), _frozen(V))


def standard_context(n: int) -> Context:
    return context_from_basis(np.eye(n))


def as_sharp(channel: Channel, tol: float = DEFAULT_TOL) -> SharpChannel:
    """Reinterpret ``channel`` as a sharp channel, or raise :class:`NotSharp`."""
    tol = check_tol(tol)
    if isinstance(channel, SharpChannel):
        return channel
    for i, M in enumerate(channel.branches):
        if not is_projection(M, tol):
            raise NotSharp(f"branch {i} is not a projection", index=i)
    S = SharpChannel(channel.dim, channel.branches)
    for i, P in enumerate(S.branches):
        for j, Q in enumerate(S.branches[i + 1:], start=i + 1):
            if np.linalg.norm(P @ Q) > tol:
                raise NotSharp(f"projections {i} and {j} are not orthogonal", index=j)
    if not maps_equal(compose(S, S, tol), S, tol):
        raise VerdictMismatch("sharp channel map is not idempotent")
    return S


def make_sharp(projections, tol: float = DEFAULT_TOL) -> SharpChannel:
    return as_sharp(make_channel(projections, tol), tol)


def as_context(sharp: SharpChannel, tol: float = DEFAULT_TOL) -> Context:
    """Extract the orthonormal basis of a sharp channel of rank-one projections."""
    tol = check_tol(tol)
    if isinstance(sharp, Context):
        return sharp
    sharp = as_sharp(sharp, tol)
    vectors = []
    for i, P in enumerate(sharp.branches):
        if abs(np.trace(P) - 1) > tol:
            raise NotRankOne(f"projection {i} has trace {np.trace(P).real:.6g}, not 1", index=i)
        evals, V = hermitian_eigensystem(P, tol)
        vectors.append(normalize_phase(V[:, -1]))
    return context_from_basis(vectors, tol)


def is_context(sharp: SharpChannel, tol: float = DEFAULT_TOL) -> bool:
    return all(abs(np.trace(P) - 1) <= tol for P in sharp.branches)


def _range_basis(P: np.ndarray) -> np.ndarray:
    evals, V = np.linalg.eigh((P + dag(P)) / 2)
    return V[:, evals > 0.5]


def context_via_commutation(sharp: SharpChannel, trials: int = 64, seed: int = 0,
                            tol: float = DEFAULT_TOL) -> bool:
    """Decide whether ``sharp`` is a context, two ways.

    The direct route checks that every projection has rank one. The
    sampled route draws ``trials`` pairs of rank-one projections ``P, Q``
    and looks for ``L(P) L(Q) != L(Q) L(P)``. Even trials draw vectors
    from the whole space, odd trials draw both vectors from the range of
    one branch. The routes must agree.
    """
    tol = check_tol(tol)
    sharp = as_sharp(sharp, tol)
    direct = is_context(sharp, tol)
    rng = np.random.default_rng(seed)
    n = sharp.dim
    witness = None
    for t in range(trials):
        if t % 2 == 0:
            u, v = random_unit_vector(n, rng), random_unit_vector(n, rng)
        else:
            R = _range_basis(sharp.branches[rng.integers(len(sharp.branches))])
            k = R.shape[1]
            u = R @ random_unit_vector(k, rng)
            v = R @ random_unit_vector(k, rng)
        LP = apply_map(sharp, projector(u))
        LQ = apply_map(sharp, projector(v))
        residual = float(np.linalg.norm(LP @ LQ - LQ @ LP))
        if residual > tol:
            witness = {"u": u, "v": v, "commutator": residual, "trial": t}
            break
    sampled = witness is None
    if sampled != direct:
        raise VerdictMismatch(
            f"rank-one test says context={direct} but sampled commutation says {sampled}",
            witness=witness,
        )
    return direct


def _orthonormal_completion(phi: np.ndarray) -> np.ndarray:
    """Unitary matrix whose first column is ``phi``."""
    phi = ket(phi) / np.linalg.norm(phi)
    _, _, vh = np.linalg.svd(phi.conj()[None, :])
    complement = vh[1:].conj().T
    return np.column_stack([phi, complement])


def find_distinguishing_context(A, B, tol: float = DEFAULT_TOL):
    """Find a context whose map separates ``A`` from ``B``, or ``None``.

    Looks for a unit ``phi`` with ``<phi, (A-B) phi> != 0`` among the
    eigenvectors of the Hermitian and anti-Hermitian parts of ``A - B``,
    then completes it to an orthonormal basis. Returns ``None`` when
    ``A`` and ``B`` agree within ``tol`` or when no candidate context
    separates them by more than ``tol``.
    """
    tol = check_tol(tol)
    A = as_square(A)
    B = as_square(B)
    if A.shape != B.shape:
        raise ShapeMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    D = A - B
    if np.linalg.norm(D) <= tol:
        return None
    best = None
    for H in ((D + dag(D)) / 2, (D - dag(D)) / 2j):
        evals, V = np.linalg.eigh(H)
        # prefer the last index among ties so the positive eigenvalue wins
        k = len(evals) - 1 - int(np.argmax(np.abs(evals[::-1])))
        phi = normalize_phase(V[:, k])
        ctx = context_from_basis(_orthonormal_completion(phi))
        gap = float(np.linalg.norm(apply_map(ctx, A) - apply_map(ctx, B)))
        if best is None or gap > best[0] + 1e-15:
            best = (gap, ctx)
    if best[0] <= tol:
        return None
    return best[1]


def context_maps_equal_on(a: Context, b: Context, A, tol: float = DEFAULT_TOL) -> dict:
    """Compare ``L_a(A)`` with ``L_b(A)`` directly and through the diagonal criterion.

    The criterion: ``<phi_j, A phi_j> = <psi_k, A psi_k>`` whenever
    ``<psi_k, phi_j> != 0``. Pairs violating it are listed as witnesses.
    """
    tol = check_tol(tol)
    if a.dim != b.dim:
        raise ShapeMismatch(f"context dimensions differ: {a.dim} vs {b.dim}")
    A = as_square(A)
    distance = float(np.linalg.norm(apply_map(a, A) - apply_map(b, A)))
    equal = distance <= tol
    da, db = a.diagonal(A), b.diagonal(A)
    overlap = dag(b.basis) @ a.basis  # overlap[k, j] = <psi_k, phi_j>
    witnesses = []
    for j in range(a.dim):
        for k in range(b.dim):
            if abs(overlap[k, j]) > tol and abs(da[j] - db[k]) > tol:
                witnesses.append((j, k))
    condition = not witnesses
    if condition != equal:
        raise VerdictMismatch(
            f"map equality ({equal}) disagrees with the diagonal criterion ({condition})",
            witness={"distance": distance, "pairs": witnesses},
        )
    return {"equal": equal, "condition_holds": condition, "witnesses": witnesses,
            "distance": distance}


def projection_le(P: np.ndarray, Q: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """``P <= Q`` for projections, tested as ``QP = P``."""
    return float(np.linalg.norm(Q @ P - P)) <= tol


def sharp_le(a: SharpChannel, b: SharpChannel, tol: float = DEFAULT_TOL) -> dict:
    """Refinement order ``a <= b``.

    When it holds, ``decomposition[q]`` lists the indices of the
    projections of ``a`` that sum to projection ``q`` of ``b``.
    """
    tol = check_tol(tol)
    if a.dim != b.dim:
        raise ShapeMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    below = [[projection_le(P, Q, tol) for Q in b.branches] for P in a.branches]
    le = all(any(row) for row in below)
    if not le:
        return {"le": False, "decomposition": None}
    decomposition = {}
    for q, Q in enumerate(b.branches):
        members = [i for i in range(len(a.branches)) if below[i][q]]
        total = sum((a.branches[i] for i in members), np.zeros_like(Q))
        residual = float(np.linalg.norm(total - Q))
        if residual > tol:
            raise DecompositionFailure(
                f"projection {q} of the coarser channel is not the sum of {members} "
                f"(residual {residual:.3e})"
            )
        decomposition[q] = members
    return {"le": True, "decomposition": decomposition}


def branch_sets_equal(a: Channel, b: Channel, tol: float = DEFAULT_TOL) -> bool:
    """Equality of branch sets up to ordering (optimal bipartite matching)."""
    if a.dim != b.dim or len(a.branches) != len(b.branches):
        return False
    cost = np.array([[np.linalg.norm(M - N) for N in b.branches] for M in a.branches])
    rows, cols = linear_sum_assignment(cost)
    return bool(np.all(cost[rows, cols] <= tol))


def products_commute(a: SharpChannel, b: SharpChannel, tol: float = DEFAULT_TOL) -> dict:
    """Three equivalent tests of commutation for two sharp channels.

    ``channels_commute``: the branch sets of ``ab`` and ``ba`` coincide.
    ``pairwise``: every projection of ``a`` commutes with every one of ``b``.
    ``product_sharp``: the product channel consists of projections.
    """
    tol = check_tol(tol)
    if a.dim != b.dim:
        raise ShapeMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    ab = compose(a, b, tol)
    ba = compose(b, a, tol)
    channels_commute = branch_sets_equal(ab, ba, tol)
    pairwise = all(np.linalg.norm(P @ Q - Q @ P) <= tol for P in a.branches for Q in b.branches)
    product_sharp = all(is_projection(M, tol) for M in ab.branches)
    verdicts = {"channels_commute": channels_commute, "pairwise": pairwise,
                "product_sharp": product_sharp}
    if len(set(verdicts.values())) != 1:
        raise VerdictMismatch(f"commutation verdicts disagree: {verdicts}", witness=verdicts)
    return verdicts


def context_minimal_check(ctx: Context, b: SharpChannel, tol: float = DEFAULT_TOL) -> bool:
    """``b <= ctx`` must force ``b == ctx``; returns whether that holds."""
    if not sharp_le(b, ctx, tol)["le"]:
        return True
    return branch_sets_equal(b, ctx, tol) and maps_equal(b, ctx, tol)


def coarse_grain(ctx: Context, partition) -> SharpChannel:
    """Sharp channel whose projections sum the context projections in each block."""
    blocks = [sum(ctx.branches[i] for i in block) for block in partition]
    return make_sharp(blocks)
