import numpy as np
import pytest

from _oracles import random_povm
from qcontext.channel import (
    apply_map,
    completely_random_channel,
    identity_channel,
    is_measurable,
    make_channel,
    random_unital_channel,
)
from qcontext.errors import LabelMismatch, PovmInvalid, ProbabilityOutOfRange, UnknownOutcome
from qcontext.measure import (
    build_ontological_model,
    make_joint,
    make_povm,
    prob,
    prob_in_context,
    prob_in_context_transformed,
    prob_transformed,
    random_matrix,
    sharp_povm,
    transform_joint,
    transform_povm,
    verify_joint,
)
from qcontext.opcore import projector, random_density, random_unitary
from qcontext.sharp_order import context_from_basis, standard_context

R2 = 1 / np.sqrt(2)
R3 = np.sqrt(3)
PSI1 = np.array([R3 / 2, 0.5])
STD2 = standard_context(2)


def _two_outcome(E):
    return make_povm(["yes", "no"], [E, np.eye(E.shape[0]) - E])


class TestPovm:
    def test_invalid_sum(self):
        with pytest.raises(PovmInvalid):
            make_povm(["a", "b"], [np.diag([0.5, 0.5]), np.diag([0.25, 0.5])])

    def test_non_effect(self):
        with pytest.raises(PovmInvalid):
            make_povm(["a", "b"], [np.diag([1.5, 0]), np.diag([-0.5, 1])])

    def test_unknown_outcome(self):
        X = sharp_povm(STD2.branches)
        with pytest.raises(UnknownOutcome):
            X.effect("nope")
        with pytest.raises(UnknownOutcome):
            prob(np.eye(2) / 2, X, "nope")


class TestProb:
    def test_identity_effect(self):
        rho = random_density(3, np.random.default_rng(0))
        assert prob(rho, make_povm(["all"], [np.eye(3)]), "all") == pytest.approx(1)

    def test_pure_state(self):
        P = projector([1, 0])
        assert prob(P, _two_outcome(P), "yes") == pytest.approx(1)

    def test_maximally_mixed(self):
        P = projector(random_unitary(2, 1)[:, 0])
        assert prob(np.eye(2) / 2, _two_outcome(P), "yes") == pytest.approx(0.5)

    def test_out_of_band(self):
        bad = np.diag([2.0, -1.0])
        with pytest.raises(ProbabilityOutOfRange):
            prob(bad, _two_outcome(np.diag([1.0, 0.0])), "yes")

    def test_outcomes_sum_to_one(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n, k = int(rng.integers(1, 5)), int(rng.integers(1, 5))
            X = make_povm(list("abcd"[:k]), random_povm(n, k, rng))
            rho = random_density(n, rng)
            assert sum(prob(rho, X, o) for o in X.outcomes) == pytest.approx(1, abs=1e-12)


class TestProbTransformed:
    def test_identity_channel(self):
        rng = np.random.default_rng(2)
        X = make_povm(list("abc"), random_povm(3, 3, rng))
        rho = random_density(3, rng)
        for o in X.outcomes:
            assert prob_transformed(rho, identity_channel(3), X, o) == pytest.approx(prob(rho, X, o), abs=1e-14)

    def test_random_channel(self):
        rng = np.random.default_rng(3)
        X = make_povm(list("ab"), random_povm(3, 2, rng))
        rho = random_density(3, rng)
        for o in X.outcomes:
            expected = np.trace(X.effect(o)).real / 3
            assert prob_transformed(rho, completely_random_channel(3), X, o) == pytest.approx(expected, abs=1e-12)

    def test_unitary_channel(self):
        rng = np.random.default_rng(4)
        U = random_unitary(3, 4)
        X = make_povm(list("ab"), random_povm(3, 2, rng))
        rho = random_density(3, rng)
        for o in X.outcomes:
            assert prob_transformed(rho, make_channel([U]), X, o) == \
                pytest.approx(prob(U.conj().T @ rho @ U, X, o), abs=1e-12)


class TestProbInContext:
    def test_measurable_state(self):
        rng = np.random.default_rng(5)
        X = make_povm(list("ab"), random_povm(2, 2, rng))
        rho = np.diag([0.3, 0.7])
        for o in X.outcomes:
            assert prob_in_context(STD2, rho, X, o) == pytest.approx(prob(rho, X, o), abs=1e-12)

    def test_rotated_vector(self):
        rho = projector(PSI1)
        X = _two_outcome(projector([1, 0]))
        assert prob_in_context(STD2, rho, X, "yes") == pytest.approx(0.75)
        assert prob(rho, X, "yes") == pytest.approx(0.75)
        Y = _two_outcome(projector([R2, R2]))
        # oracle: (3/4)(1/2) + (1/4)(1/2) against |<(1,1)/sqrt2, psi_1>|^2
        assert prob_in_context(STD2, rho, Y, "yes") == pytest.approx(0.5, abs=1e-12)
        assert prob(rho, Y, "yes") == pytest.approx((2 + R3) / 4, abs=1e-12)
        assert abs(np.vdot([R2, R2], PSI1)) ** 2 == pytest.approx((2 + R3) / 4)

    def test_identity_effect(self):
        ctx = context_from_basis(random_unitary(3, 6))
        rho = random_density(3, np.random.default_rng(6))
        assert prob_in_context(ctx, rho, make_povm(["all"], [np.eye(3)]), "all") == pytest.approx(1)

    def test_agreement_property(self):
        rng = np.random.default_rng(7)
        differ = 0
        for k in range(60):
            n = 2 + k % 3
            ctx = context_from_basis(random_unitary(n, k))
            X = make_povm(list("abc"), random_povm(n, 3, rng))
            if k % 3 == 0:
                rho = apply_map(ctx, random_density(n, rng))
            else:
                rho = random_density(n, rng)
            for o in X.outcomes:
                pc, p = prob_in_context(ctx, rho, X, o), prob(rho, X, o)
                if is_measurable(rho, ctx) or is_measurable(X.effect(o), ctx):
                    assert abs(pc - p) <= 1e-10
                elif abs(pc - p) > 1e-3:
                    differ += 1
        assert differ > 60


class TestProbInContextTransformed:
    def test_identity_reduces(self):
        rng = np.random.default_rng(8)
        ctx = context_from_basis(random_unitary(3, 8))
        X = make_povm(list("ab"), random_povm(3, 2, rng))
        rho = random_density(3, rng)
        for o in X.outcomes:
            assert prob_in_context_transformed(ctx, rho, identity_channel(3), X, o) == \
                pytest.approx(prob_in_context(ctx, rho, X, o), abs=1e-12)

    def test_measurable_effect(self):
        rng = np.random.default_rng(9)
        C = random_unital_channel(3, 3, seed=9)
        X = make_povm(["a", "b"], [np.diag([0.2, 0.5, 0.9]), np.diag([0.8, 0.5, 0.1])])
        rho = random_density(3, rng)
        for o in X.outcomes:
            assert prob_in_context_transformed(standard_context(3), rho, C, X, o) == \
                pytest.approx(prob_transformed(rho, C, X, o), abs=1e-12)

    def test_random_channel(self):
        rng = np.random.default_rng(10)
        ctx = context_from_basis(random_unitary(3, 10))
        X = make_povm(list("ab"), random_povm(3, 2, rng))
        rho = random_density(3, rng)
        for o in X.outcomes:
            assert prob_in_context_transformed(ctx, rho, completely_random_channel(3), X, o) == \
                pytest.approx(np.trace(X.effect(o)).real / 3, abs=1e-12)


class TestTransformPovm:
    def test_identity(self):
        X = make_povm(list("ab"), random_povm(2, 2, np.random.default_rng(0)))
        tX = transform_povm(identity_channel(2), X)
        for E, F in zip(X.effects, tX.effects):
            np.testing.assert_allclose(E, F, atol=1e-15)

    def test_complement(self):
        rng = np.random.default_rng(1)
        C = random_unital_channel(3, 2, seed=1)
        E = random_povm(3, 2, rng)[0]
        tX = transform_povm(C, _two_outcome(E))
        np.testing.assert_allclose(tX.effect("no"), np.eye(3) - apply_map(C, E), atol=1e-12)

    def test_context_outputs_commute(self):
        rng = np.random.default_rng(2)
        ctx = context_from_basis(random_unitary(3, 2))
        tX = transform_povm(ctx, make_povm(list("abcd"), random_povm(3, 4, rng)))
        for E in tX.effects:
            for F in tX.effects:
                assert np.linalg.norm(E @ F - F @ E) <= 1e-12


def _product_joint():
    P = [np.diag([1, 0, 0]), np.diag([0, 1, 0]), np.diag([0, 0, 1])]
    Q = [np.diag([1, 1, 0]), np.diag([0, 0, 1])]
    grid = {(f"p{j}", f"q{k}"): P[j] @ Q[k] for j in range(3) for k in range(2)}
    return make_joint(["p0", "p1", "p2"], ["q0", "q1"], grid), P, Q


class TestJoint:
    def test_trivial_second_marginal(self):
        rng = np.random.default_rng(3)
        effects = random_povm(2, 3, rng)
        X = make_povm(list("abc"), effects)
        Y = make_povm(["all"], [np.eye(2)])
        Z = make_joint(list("abc"), ["all"], {(x, "all"): E for x, E in zip("abc", effects)})
        assert verify_joint(Z, X, Y)

    def test_product_of_commuting_projections(self):
        Z, P, Q = _product_joint()
        X = make_povm(["p0", "p1", "p2"], P)
        Y = make_povm(["q0", "q1"], Q)
        assert verify_joint(Z, X, Y)

    def test_perturbed_entry(self):
        Z, P, Q = _product_joint()
        X = make_povm(["p0", "p1", "p2"], P)
        Y = make_povm(["q0", "q1"], Q)
        shifted = [P[0] * 0.9 + P[1] * 0.1, P[1] * 0.9 + P[0] * 0.1, P[2]]
        assert not verify_joint(Z, make_povm(["p0", "p1", "p2"], shifted), Y)
        assert not verify_joint(Z, X, make_povm(["q0", "q1"], [Q[1], Q[0]]))

    def test_label_mismatch(self):
        Z, P, Q = _product_joint()
        with pytest.raises(LabelMismatch):
            verify_joint(Z, make_povm(["a", "b", "c"], P), make_povm(["q0", "q1"], Q))

    def test_coexistence_preserved(self):
        rng = np.random.default_rng(4)
        for k in range(30):
            n = 2 + k % 3
            cells = random_povm(n, 6, rng)
            grid = {(f"x{a}", f"y{b}"): cells[3 * b + a] for a in range(3) for b in range(2)}
            Z = make_joint(["x0", "x1", "x2"], ["y0", "y1"], grid)
            X, Y = Z.marginal_x(), Z.marginal_y()
            C = random_unital_channel(n, 1 + k % 3, seed=k)
            assert verify_joint(Z, X, Y, channel=C)
            tZ = transform_joint(C, Z)
            assert verify_joint(tZ, transform_povm(C, X), transform_povm(C, Y))


class TestOntologicalModel:
    def test_mixed_state(self):
        X = sharp_povm(STD2.branches)
        (m,) = build_ontological_model([context_from_basis(random_unitary(2, 0))], np.eye(2) / 2, X)
        np.testing.assert_allclose(m.mu, [0.5, 0.5], atol=1e-15)

    def test_rotated_vector(self):
        X = sharp_povm(STD2.branches)
        (m,) = build_ontological_model([STD2], projector(PSI1), X)
        np.testing.assert_allclose(m.mu, [0.75, 0.25], atol=1e-15)
        assert m.random_matrix is None

    def test_identity_channel_single_column(self):
        rng = np.random.default_rng(5)
        rho = random_density(3, rng)
        X = make_povm(list("ab"), random_povm(3, 2, rng))
        ctx = context_from_basis(random_unitary(3, 5))
        (m,) = build_ontological_model([ctx], rho, X, identity_channel(3))
        assert m.random_matrix.shape == (3, 1)
        np.testing.assert_allclose(m.random_matrix[:, 0], m.mu, atol=1e-14)

    def test_marginals_and_bounds(self):
        rng = np.random.default_rng(6)
        for k in range(30):
            n = 2 + k % 3
            rho = random_density(n, rng)
            X = make_povm(list("abc"), random_povm(n, 3, rng))
            C = random_unital_channel(n, 1 + k % 4, seed=k)
            ctxs = [context_from_basis(random_unitary(n, k + s)) for s in range(2)]
            for ctx, m in zip(ctxs, build_ontological_model(ctxs, rho, X, C)):
                assert m.mu.sum() == pytest.approx(1, abs=1e-12)
                for f in m.fuzzy_events.values():
                    assert np.all(f >= -1e-9) and np.all(f <= 1 + 1e-9)
                M = random_matrix(ctx, rho, C)
                np.testing.assert_allclose(M, m.random_matrix)
                for j, B in enumerate(C.branches):
                    assert M[:, j].sum() == pytest.approx(np.trace(B.conj().T @ rho @ B).real, abs=1e-12)
                out = apply_map(C, rho)
                np.testing.assert_allclose(M.sum(axis=1), ctx.diagonal(out).real, atol=1e-12)

    def test_to_dict(self):
        (m,) = build_ontological_model([STD2], np.eye(2) / 2, sharp_povm(STD2.branches), context_ids=["std"])
        d = m.to_dict()
        assert d["context_id"] == "std" and d["mu"] == [0.5, 0.5] and d["random_matrix"] is None

    def test_rejects_non_density(self):
        with pytest.raises(ValueError):
            build_ontological_model([STD2], np.eye(2), sharp_povm(STD2.branches))
