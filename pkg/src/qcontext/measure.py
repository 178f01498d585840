"""Finite-outcome POVMs, measurement probabilities and ontological-model export.

Probabilities are never clamped: a value outside ``[-tol, 1 + tol]``
raises :class:`ProbabilityOutOfRange`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .channel import Channel, _frozen, apply_map
from .errors import (
    LabelMismatch,
    PovmInvalid,
    ProbabilityOutOfRange,
    ShapeMismatch,
    UnknownOutcome,
    VerdictMismatch,
)
from .opcore import DEFAULT_TOL, as_square, check_tol, dag, is_effect
from .sharp_order import Context

# agreement band for the alternative trace formulas of one probability
FORMULA_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Povm:
    dim: int
    outcomes: Tuple[str, ...]
    effects: Tuple[np.ndarray, ...]

    def effect(self, outcome) -> np.ndarray:
        try:
            return self.effects[self.outcomes.index(outcome)]
        except ValueError:
            raise UnknownOutcome(f"unknown outcome {outcome!r}") from None

    def items(self):
        return zip(self.outcomes, self.effects)


def make_povm(outcomes: Sequence, effects: Sequence, tol: float = DEFAULT_TOL) -> Povm:
    tol = check_tol(tol)
    outcomes = tuple(str(o) for o in outcomes)
    if len(outcomes) != len(effects) or not effects:
        raise PovmInvalid("need one effect per outcome and at least one outcome")
    if len(set(outcomes)) != len(outcomes):
        raise PovmInvalid("outcome labels must be distinct")
    mats = [as_square(E) for E in effects]
    n = mats[0].shape[0]
    for label, E in zip(outcomes, mats):
        if E.shape != (n, n):
            raise PovmInvalid(f"effect {label!r} has shape {E.shape}, expected {(n, n)}")
        if not is_effect(E, tol):
            raise PovmInvalid(f"operator for outcome {label!r} is not an effect")
    residual = float(np.linalg.norm(sum(mats) - np.eye(n)))
    if residual > tol:
        raise PovmInvalid(f"effects sum to I only within {residual:.3e}")
    return Povm(n, outcomes, tuple(_frozen(E) for E in mats))


def sharp_povm(projections: Sequence[np.ndarray], labels: Optional[Sequence] = None) -> Povm:
    labels = [str(i) for i in range(len(projections))] if labels is None else labels
    return make_povm(labels, projections)


@dataclass(frozen=True, eq=False)
class JointPovm:
    """Effects ``Z(x, y)`` indexed by pairs of outcome labels."""

    dim: int
    outcomes_x: Tuple[str, ...]
    outcomes_y: Tuple[str, ...]
    grid: Dict[Tuple[str, str], np.ndarray]

    def marginal_x(self, tol: float = DEFAULT_TOL) -> Povm:
        return make_povm(self.outcomes_x,
                         [sum(self.grid[(x, y)] for y in self.outcomes_y) for x in self.outcomes_x],
                         tol)

    def marginal_y(self, tol: float = DEFAULT_TOL) -> Povm:
        return make_povm(self.outcomes_y,
                         [sum(self.grid[(x, y)] for x in self.outcomes_x) for y in self.outcomes_y],
                         tol)


def make_joint(outcomes_x, outcomes_y, grid, tol: float = DEFAULT_TOL) -> JointPovm:
    xs = tuple(str(x) for x in outcomes_x)
    ys = tuple(str(y) for y in outcomes_y)
    cells = {}
    for x in xs:
        for y in ys:
            try:
                cells[(x, y)] = _frozen(as_square(grid[(x, y)]))
            except KeyError:
                raise PovmInvalid(f"joint grid lacks cell {(x, y)!r}") from None
    n = next(iter(cells.values())).shape[0]
    joint = JointPovm(n, xs, ys, cells)
    make_povm([f"{x}|{y}" for x, y in cells], list(cells.values()), tol)
    joint.marginal_x(tol)
    joint.marginal_y(tol)
    return joint


def _check_dims(n: int, *ops) -> None:
    for op in ops:
        if op.shape != (n, n):
            raise ShapeMismatch(f"operator shape {op.shape} does not match dim {n}")


def _in_band(p: float, tol: float, what: str) -> float:
    if p < -tol or p > 1 + tol:
        raise ProbabilityOutOfRange(f"{what} = {p!r} lies outside [0, 1]")
    return p


def prob(rho, povm: Povm, outcome, tol: float = DEFAULT_TOL) -> float:
    """``tr(rho X(outcome))``."""
    rho = as_square(rho)
    E = povm.effect(outcome)
    _check_dims(povm.dim, rho)
    return _in_band(float(np.trace(rho @ E).real), tol, "probability")


def prob_transformed(rho, channel: Channel, povm: Povm, outcome,
                     tol: float = DEFAULT_TOL) -> float:
    """``tr(Phi(rho) X(outcome))`` with ``Phi`` the channel map.

    Recomputed branch by branch as ``sum_j tr(M_j^* rho M_j X)`` and as
    the double sum of diagonal matrix elements in the standard basis; the
    three must agree within ``FORMULA_TOL``.
    """
    rho = as_square(rho)
    E = povm.effect(outcome)
    _check_dims(povm.dim, rho)
    _check_dims(channel.dim, rho)
    value = complex(np.trace(apply_map(channel, rho) @ E))
    per_branch = sum(complex(np.trace(dag(M) @ rho @ M @ E)) for M in channel.branches)
    elementwise = sum(
        complex((dag(M) @ rho @ M @ E)[i, i]) for M in channel.branches for i in range(rho.shape[0])
    )
    spread = max(abs(value - per_branch), abs(value - elementwise))
    if spread > FORMULA_TOL:
        raise VerdictMismatch(f"expansions of the transformed probability differ by {spread:.3e}")
    return _in_band(value.real, tol, "probability")


def prob_in_context(ctx: Context, rho, povm: Povm, outcome, tol: float = DEFAULT_TOL) -> float:
    """Probability of ``outcome`` as seen from context ``ctx``.

    ``sum_i <phi_i, rho phi_i> <phi_i, X phi_i>``, checked against
    ``tr(L(rho) X)``, ``tr(rho L(X))`` and ``tr(L(rho) L(X))``.
    """
    rho = as_square(rho)
    E = povm.effect(outcome)
    _check_dims(ctx.dim, rho, E)
    value = complex(np.sum(ctx.diagonal(rho) * ctx.diagonal(E)))
    L_rho, L_E = apply_map(ctx, rho), apply_map(ctx, E)
    forms = [np.trace(L_rho @ E), np.trace(rho @ L_E), np.trace(L_rho @ L_E)]
    spread = max(abs(value - form) for form in forms)
    if spread > FORMULA_TOL:
        raise VerdictMismatch(f"trace forms of the context probability differ by {spread:.3e}")
    return _in_band(value.real, tol, "context probability")


def random_matrix(ctx: Context, rho, channel: Channel) -> np.ndarray:
    """``M[i, j] = <phi_i, M_j^* rho M_j phi_i>``: basis index by branch index."""
    rho = as_square(rho)
    _check_dims(ctx.dim, rho)
    cols = [ctx.diagonal(dag(M) @ rho @ M).real for M in channel.branches]
    return np.column_stack(cols)


def prob_in_context_transformed(ctx: Context, rho, channel: Channel, povm: Povm, outcome,
                                tol: float = DEFAULT_TOL) -> float:
    """Context probability of ``outcome`` after the state passes through ``channel``.

    Computed from the branch-traversal matrix and checked against
    ``tr(L(X) Phi(rho))``, ``tr(X L(Phi(rho)))`` and ``tr(L(X) L(Phi(rho)))``.
    """
    rho = as_square(rho)
    E = povm.effect(outcome)
    _check_dims(ctx.dim, rho, E)
    _check_dims(channel.dim, rho)
    M = random_matrix(ctx, rho, channel)
    f = ctx.diagonal(E).real
    value = float(np.sum(M * f[:, None]))
    out = apply_map(channel, rho)
    L_E, L_out = apply_map(ctx, E), apply_map(ctx, out)
    forms = [np.trace(L_E @ out), np.trace(E @ L_out), np.trace(L_E @ L_out)]
    spread = max(abs(value - form) for form in forms)
    if spread > FORMULA_TOL:
        raise VerdictMismatch(f"trace forms of the transformed context probability differ "
                              f"by {spread:.3e}")
    return _in_band(value, tol, "context probability")


def transform_povm(channel: Channel, povm: Povm, tol: float = DEFAULT_TOL) -> Povm:
    if channel.dim != povm.dim:
        raise ShapeMismatch(f"dimensions differ: {channel.dim} vs {povm.dim}")
    return make_povm(povm.outcomes, [apply_map(channel, E) for E in povm.effects], tol)


def transform_joint(channel: Channel, joint: JointPovm, tol: float = DEFAULT_TOL) -> JointPovm:
    if channel.dim != joint.dim:
        raise ShapeMismatch(f"dimensions differ: {channel.dim} vs {joint.dim}")
    grid = {key: apply_map(channel, E) for key, E in joint.grid.items()}
    return make_joint(joint.outcomes_x, joint.outcomes_y, grid, tol)


def _marginals_match(joint: JointPovm, X: Povm, Y: Povm, tol: float) -> bool:
    if set(joint.outcomes_x) != set(X.outcomes) or set(joint.outcomes_y) != set(Y.outcomes):
        raise LabelMismatch("joint outcome labels do not match the marginal POVMs")
    if not (joint.dim == X.dim == Y.dim):
        raise ShapeMismatch("joint and marginal POVMs differ in dimension")
    for x in joint.outcomes_x:
        s = sum(joint.grid[(x, y)] for y in joint.outcomes_y)
        if np.linalg.norm(s - X.effect(x)) > tol:
            return False
    for y in joint.outcomes_y:
        s = sum(joint.grid[(x, y)] for x in joint.outcomes_x)
        if np.linalg.norm(s - Y.effect(y)) > tol:
            return False
    return True


def verify_joint(joint: JointPovm, X: Povm, Y: Povm, tol: float = DEFAULT_TOL,
                 channel: Optional[Channel] = None) -> bool:
    """Check that ``X`` and ``Y`` are the marginals of ``joint``.

    With a ``channel``, also confirms that the transformed joint has the
    transformed POVMs as marginals.
    """
    tol = check_tol(tol)
    ok = _marginals_match(joint, X, Y, tol)
    if channel is not None and ok:
        tX, tY = transform_povm(channel, X, tol), transform_povm(channel, Y, tol)
        if not _marginals_match(transform_joint(channel, joint, tol), tX, tY, tol):
            raise VerdictMismatch("channel map failed to carry the joint onto the marginals")
    return ok


@dataclass(frozen=True)
class OntologicalModel:
    context_id: str
    mu: np.ndarray
    fuzzy_events: Dict[str, np.ndarray]
    random_matrix: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        return {
            "context_id": self.context_id,
            "mu": self.mu.tolist(),
            "fuzzy_events": {k: v.tolist() for k, v in self.fuzzy_events.items()},
            "random_matrix": None if self.random_matrix is None else self.random_matrix.tolist(),
        }


def build_ontological_model(contexts: Sequence[Context], rho, povm: Povm,
                            channel: Optional[Channel] = None, tol: float = DEFAULT_TOL,
                            context_ids: Optional[Sequence[str]] = None) -> list:
    """Per-context classical data: ``mu``, fuzzy events and branch-traversal matrix.

    ``mu[i] = <phi_i, rho phi_i>``, ``f_x[i] = <phi_i, X(x) phi_i>`` and,
    with a channel, ``M[i, j] = <phi_i, M_j^* rho M_j phi_i>``. Both
    marginals of ``M`` are asserted.
    """
    tol = check_tol(tol)
    rho = as_square(rho)
    ids = [str(k) for k in range(len(contexts))] if context_ids is None else list(context_ids)
    models = []
    for cid, ctx in zip(ids, contexts):
        _check_dims(ctx.dim, rho)
        if povm.dim != ctx.dim:
            raise ShapeMismatch(f"POVM dim {povm.dim} does not match context dim {ctx.dim}")
        mu = ctx.diagonal(rho).real
        fuzzy = {label: ctx.diagonal(E).real for label, E in povm.items()}
        M = None
        if channel is not None:
            M = random_matrix(ctx, rho, channel)
            branch_mass = np.array([np.trace(dag(B) @ rho @ B).real for B in channel.branches])
            out_mu = ctx.diagonal(apply_map(channel, rho)).real
            col_err = float(np.max(np.abs(M.sum(axis=0) - branch_mass)))
            row_err = float(np.max(np.abs(M.sum(axis=1) - out_mu)))
            if col_err > tol or row_err > tol:
                raise VerdictMismatch(
                    f"random-matrix marginals off by {col_err:.3e} (branches) "
                    f"and {row_err:.3e} (basis)"
                )
        if abs(mu.sum() - 1) > tol or np.any(mu < -tol):
            raise ValueError(f"rho is not a density: mu sums to {mu.sum():.12g}")
        models.append(OntologicalModel(cid, mu, fuzzy, M))
    return models
