import itertools

import numpy as np
import pytest

from _oracles import set_partitions
from qcontext.channel import apply_map, compose, identity_channel, make_channel, maps_equal
from qcontext.errors import NotRankOne, NotSharp, ShapeMismatch
from qcontext.opcore import (
    hermitian_eigensystem,
    matrix_unit,
    projector,
    random_hermitian,
    random_unitary,
)
from qcontext.sharp_order import (
    as_context,
    as_sharp,
    branch_sets_equal,
    coarse_grain,
    context_from_basis,
    context_maps_equal_on,
    context_minimal_check,
    context_via_commutation,
    find_distinguishing_context,
    make_sharp,
    products_commute,
    sharp_le,
    standard_context,
)

R2 = 1 / np.sqrt(2)
R3 = np.sqrt(3)
PSI1 = np.array([R3 / 2, 0.5])
PSI2 = np.array([-0.5, R3 / 2])
DIAG_B = context_from_basis([[R2, R2], [-R2, R2]])
ROT_B = context_from_basis([PSI1, PSI2])
COARSE3 = [np.diag([1, 1, 0]), np.diag([0, 0, 1])]


class TestAsSharp:
    def test_standard_context_branches(self):
        S = as_sharp(make_channel([np.diag([1, 0]), np.diag([0, 1])]))
        assert len(S.projections) == 2

    def test_unitary_is_not_sharp(self):
        with pytest.raises(NotSharp) as info:
            as_sharp(make_channel([np.array([[0, 1], [1, 0]])]))
        assert info.value.index == 0

    def test_offending_index_reported(self):
        half = make_channel([np.eye(2) * R2, np.eye(2) * R2])
        with pytest.raises(NotSharp) as info:
            as_sharp(half)
        assert info.value.index == 0

    def test_identity_is_sharp(self):
        S = as_sharp(identity_channel(3))
        assert maps_equal(compose(S, S), S)


class TestAsContext:
    def test_standard(self):
        ctx = as_context(make_sharp([np.diag([1, 0]), np.diag([0, 1])]))
        np.testing.assert_allclose(ctx.basis, np.eye(2), atol=1e-15)

    def test_identity_not_rank_one(self):
        with pytest.raises(NotRankOne) as info:
            as_context(as_sharp(identity_channel(2)))
        assert info.value.index == 0

    def test_rotated_vectors(self):
        ctx = as_context(make_sharp([projector(PSI1), projector(PSI2)]))
        np.testing.assert_allclose(ctx.vector(0), PSI1, atol=1e-12)
        # the largest component of psi_2 is positive after phase normalization
        np.testing.assert_allclose(ctx.vector(1), PSI2, atol=1e-12)

    def test_projectors_reproduced(self):
        U = random_unitary(4, 5)
        ctx = as_context(make_sharp([projector(U[:, i]) for i in range(4)]))
        for i in range(4):
            np.testing.assert_allclose(projector(ctx.vector(i)), projector(U[:, i]), atol=1e-12)

    def test_context_from_basis_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            context_from_basis([[1, 0], [1, 1]])
        with pytest.raises(ShapeMismatch):
            context_from_basis(np.ones((3, 2)))


class TestContextViaCommutation:
    @pytest.mark.parametrize("seed", range(5))
    def test_contexts(self, seed):
        ctx = context_from_basis(random_unitary(2 + seed, seed))
        assert context_via_commutation(ctx, seed=seed)

    def test_identity_is_not_a_context(self):
        # oracle: P_(1,0) and P_(1,-1)/sqrt2 do not commute
        P, Q = projector([1, 0]), projector([R2, -R2])
        assert np.linalg.norm(P @ Q - Q @ P) > 0.1
        assert not context_via_commutation(as_sharp(identity_channel(2)))

    def test_rank_two_block_in_c3(self):
        S = make_sharp(COARSE3)
        assert not context_via_commutation(S, seed=1)
        # explicit witness inside ran P: two non-orthogonal vectors
        u = np.array([1, 0, 0])
        v = np.array([R2, R2, 0])
        LP, LQ = apply_map(S, projector(u)), apply_map(S, projector(v))
        assert np.linalg.norm(LP @ LQ - LQ @ LP) > 0.1


class TestFindDistinguishingContext:
    def test_equal_inputs(self):
        A = random_hermitian(3, np.random.default_rng(0))
        assert find_distinguishing_context(A, A) is None

    def test_diagonal_case(self):
        ctx = find_distinguishing_context(np.diag([1, 0]), np.diag([0, 1]))
        diff = apply_map(ctx, np.diag([1, 0])) - apply_map(ctx, np.diag([0, 1]))
        assert np.linalg.norm(diff) > 1

    def test_e12_against_zero(self):
        E12 = matrix_unit(2, 0, 1)
        ctx = find_distinguishing_context(E12, np.zeros((2, 2)))
        phi = ctx.vector(0)
        np.testing.assert_allclose(phi, [R2, R2], atol=1e-12)
        assert np.vdot(phi, E12 @ phi) == pytest.approx(0.5)
        assert np.linalg.norm(apply_map(ctx, E12)) > 1e-9

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            find_distinguishing_context(np.eye(2), np.eye(3))

    def test_random_pairs_always_separated(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(1, 6))
            A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            B = A + 1e-3 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            ctx = find_distinguishing_context(A, B)
            assert ctx is not None
            assert np.linalg.norm(apply_map(ctx, A) - apply_map(ctx, B)) > 1e-9


class TestContextMapsEqualOn:
    def test_scalar(self):
        r = context_maps_equal_on(standard_context(2), ROT_B, 2.5 * np.eye(2))
        assert r["equal"] and r["condition_holds"] and not r["witnesses"]

    def test_rotated_pair_witness(self):
        A = np.diag([1.0, 0.0])
        r = context_maps_equal_on(standard_context(2), ROT_B, A)
        assert not r["equal"] and not r["condition_holds"]
        assert (0, 0) in r["witnesses"]
        # oracle values: <phi_1, A phi_1> = 1, <psi_1, A psi_1> = 3/4, <psi_1, phi_1> = sqrt(3)/2
        assert np.vdot(PSI1, A @ PSI1) == pytest.approx(0.75)
        assert PSI1[0] == pytest.approx(R3 / 2)

    def test_identical_contexts(self):
        rng = np.random.default_rng(1)
        ctx = context_from_basis(random_unitary(3, 1))
        for _ in range(20):
            r = context_maps_equal_on(ctx, ctx, rng.standard_normal((3, 3)))
            assert r["equal"] and r["condition_holds"]

    def test_random_operators_agree_both_ways(self):
        rng = np.random.default_rng(2)
        for k in range(100):
            n = 2 + k % 3
            a = context_from_basis(random_unitary(n, k))
            b = context_from_basis(random_unitary(n, 1000 + k))
            context_maps_equal_on(a, b, random_hermitian(n, rng))


class TestSharpLe:
    def test_below_identity(self):
        ctx = context_from_basis(random_unitary(3, 0))
        r = sharp_le(ctx, as_sharp(identity_channel(3)))
        assert r["le"] and r["decomposition"] == {0: [0, 1, 2]}

    def test_reflexive_decomposition(self):
        ctx = standard_context(3)
        assert sharp_le(ctx, ctx)["decomposition"] == {0: [0], 1: [1], 2: [2]}

    def test_coarse_graining(self):
        r = sharp_le(standard_context(3), make_sharp(COARSE3))
        assert r["le"] and r["decomposition"] == {0: [0, 1], 1: [2]}

    def test_not_le(self):
        assert not sharp_le(make_sharp(COARSE3), standard_context(3))["le"]

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            sharp_le(standard_context(2), standard_context(3))


class TestProductsCommute:
    def test_diagonal_pair(self):
        r = products_commute(standard_context(2), DIAG_B)
        assert r == {"channels_commute": False, "pairwise": False, "product_sharp": False}

    def test_self(self):
        ctx = context_from_basis(random_unitary(3, 4))
        assert all(products_commute(ctx, ctx).values())

    def test_diagonal_coarse(self):
        assert all(products_commute(standard_context(3), make_sharp(COARSE3)).values())

    def test_contexts_commute_iff_equal(self):
        for seed in range(30):
            a = context_from_basis(random_unitary(3, seed))
            b = context_from_basis(random_unitary(3, seed + 100))
            assert not any(products_commute(a, b).values())
            perm = context_from_basis(a.basis[:, ::-1] * np.exp(1j * np.arange(3)))
            assert all(products_commute(a, perm).values())


class TestMinimality:
    def test_same_context(self):
        ctx = standard_context(2)
        assert context_minimal_check(ctx, ctx)

    def test_identity_not_below(self):
        ctx = context_from_basis(random_unitary(2, 3))
        assert not sharp_le(as_sharp(identity_channel(2)), ctx)["le"]
        assert context_minimal_check(ctx, as_sharp(identity_channel(2)))

    def test_distinct_contexts_incomparable(self):
        for seed in range(20):
            a = context_from_basis(random_unitary(3, seed))
            b = context_from_basis(random_unitary(3, seed + 50))
            assert not sharp_le(a, b)["le"] and not sharp_le(b, a)["le"]
            assert context_minimal_check(a, b)


def _coarse_family(ctx):
    return [coarse_grain(ctx, p) for p in set_partitions(range(ctx.dim))]


@pytest.fixture(scope="module")
def family():
    a = context_from_basis(random_unitary(4, 21))
    b = context_from_basis(random_unitary(4, 22))
    return _coarse_family(a) + _coarse_family(b)


class TestOrderProperties:
    def test_family_size(self, family):
        assert len(family) == 30

    def test_axioms(self, family):
        le = [[sharp_le(x, y)["le"] for y in family] for x in family]
        top = as_sharp(identity_channel(4))
        for i, x in enumerate(family):
            assert le[i][i]
            assert sharp_le(x, top)["le"]
            for j, y in enumerate(family):
                if le[i][j] and le[j][i]:
                    assert branch_sets_equal(x, y)
                for k in range(len(family)):
                    if le[i][j] and le[j][k]:
                        assert le[i][k]

    def test_product_absorbs(self, family):
        for x, y in itertools.product(family, repeat=2):
            if sharp_le(x, y)["le"]:
                xy = compose(x, y)
                assert branch_sets_equal(xy, x, 1e-9)
                assert maps_equal(xy, x, 1e-9)
            elif branch_sets_equal(compose(x, y), x, 1e-9):
                pytest.fail("absorption without order")


def test_context_determined_by_its_projections():
    """If L_a(P) = L_b(P) for all P in a, the contexts coincide."""
    rng = np.random.default_rng(3)
    for k in range(100):
        n = 2 + k % 3
        a = context_from_basis(random_unitary(n, k))
        if k % 2:
            b = context_from_basis(a.basis[:, rng.permutation(n)] * np.exp(2j * np.pi * rng.random(n)))
        else:
            b = context_from_basis(random_unitary(n, 500 + k))
        agree = all(np.linalg.norm(apply_map(a, P) - apply_map(b, P)) <= 1e-9 for P in a.branches)
        assert agree == branch_sets_equal(a, b)
        assert agree == bool(k % 2)


def _grid_sharp_channels():
    """{I} and every context spanned by a grid of real and complex unit vectors in C^2."""
    out = [as_sharp(identity_channel(2))]
    for t in np.linspace(0, np.pi, 12, endpoint=False):
        for ph in np.linspace(0, 2 * np.pi, 6, endpoint=False):
            v = np.array([np.cos(t / 2), np.exp(1j * ph) * np.sin(t / 2)])
            w = np.array([-np.exp(-1j * ph) * np.sin(t / 2), np.cos(t / 2)])
            out.append(make_sharp([projector(v), projector(w)]))
    return out


def test_no_common_lower_bound_for_distinct_contexts():
    family = _grid_sharp_channels()
    a, b = standard_context(2), DIAG_B
    lower = [s for s in family if sharp_le(s, a)["le"] and sharp_le(s, b)["le"]]
    assert lower == []
    # the family does contain lower bounds of each one separately
    assert any(sharp_le(s, a)["le"] for s in family)


def test_context_map_spectrum():
    rng = np.random.default_rng(4)
    for k in range(100):
        n = 1 + k % 5
        ctx = context_from_basis(random_unitary(n, k))
        A = random_hermitian(n, rng)
        w, _ = hermitian_eigensystem(apply_map(ctx, A))
        expected = np.sort(ctx.diagonal(A).real)
        np.testing.assert_allclose(w, expected, atol=1e-8)


def test_context_map_formula():
    A = np.array([[1.0, 2 - 1j], [3j, -4.0]])
    np.testing.assert_allclose(apply_map(standard_context(2), A), np.diag([1.0, -4.0]))
    ctx = context_from_basis(random_unitary(3, 8))
    B = random_hermitian(3, np.random.default_rng(8))
    expected = sum(np.vdot(ctx.vector(i), B @ ctx.vector(i)) * projector(ctx.vector(i))
                   for i in range(3))
    np.testing.assert_allclose(apply_map(ctx, B), expected, atol=1e-12)
