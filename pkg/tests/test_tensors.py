import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tensorank import catalog
from tensorank.loglinear import CapExceeded, tensor_from_loglinear
from tensorank.tensors import (
    CTucker,
    Parafac,
    SchemeMismatch,
    Tucker,
    add,
    check_probability,
    condition,
    construct_2d_expansion,
    eval_ctucker,
    eval_parafac,
    eval_tucker,
    hadamard,
    join_independent,
    marginal,
    product_tensor,
)


def simplex(rng, *shape):
    x = rng.random(shape) + 0.05
    return x / x.sum(axis=-1, keepdims=True)


def random_parafac(rng, m, shape):
    return Parafac(simplex(rng, m), tuple(simplex(rng, m, d) for d in shape))


def loop_parafac(exp):
    out = np.zeros(exp.shape)
    for cell in itertools.product(*(range(d) for d in exp.shape)):
        out[cell] = sum(
            exp.weights[h] * np.prod([a[h, c] for a, c in zip(exp.arms, cell)]) for h in range(exp.n_terms)
        )
    return out


def loop_ctucker(groups, core, arms):
    shape = tuple(a.shape[1] for a in arms)
    out = np.zeros(shape)
    for cell in itertools.product(*(range(d) for d in shape)):
        total = 0.0
        for idx in itertools.product(*(range(n) for n in core.shape)):
            term = core[idx]
            for j, c in enumerate(cell):
                term *= arms[j][idx[groups[j]], c]
            total += term
        out[cell] = total
    return out


class TestParafac:
    def test_single_term_is_product(self, rng):
        arms = [simplex(rng, 3), simplex(rng, 2)]
        exp = Parafac([1.0], tuple(a[None] for a in arms))
        assert np.allclose(eval_parafac(exp), np.outer(*arms), atol=1e-15)

    def test_degenerate_diagonal(self):
        exp = Parafac([0.5, 0.5], (np.eye(2), np.eye(2)))
        assert np.array_equal(eval_parafac(exp), np.array([[0.5, 0], [0, 0.5]]))

    def test_matches_loop(self, rng):
        exp = random_parafac(rng, 4, (3, 3, 3))
        assert np.allclose(eval_parafac(exp), loop_parafac(exp), atol=1e-15)
        check_probability(eval_parafac(exp))

    def test_normalized_absorbs_scales(self, rng):
        raw = Parafac.from_terms([rng.random((3, 2)) * 5, rng.random((3, 4))])
        norm = raw.normalized()
        assert np.allclose(eval_parafac(norm), eval_parafac(raw), atol=1e-14)
        for a in norm.arms:
            assert np.allclose(a.sum(axis=1), 1.0, atol=1e-14)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            Parafac([1.0], (np.array([[-0.1, 1.1]]),))

    def test_cap(self):
        exp = Parafac([1.0], tuple(np.ones((1, 2)) / 2 for _ in range(25)))
        with pytest.raises(CapExceeded):
            eval_parafac(exp)


class TestTucker:
    def test_concentrated_core_is_product(self, rng):
        core = np.zeros((2, 3))
        core[1, 2] = 1.0
        arms = (simplex(rng, 2, 3), simplex(rng, 3, 4))
        assert np.allclose(eval_tucker(Tucker(core, arms)), np.outer(arms[0][1], arms[1][2]), atol=1e-15)

    def test_diagonal_core_is_parafac(self, rng):
        nu = simplex(rng, 3)
        core = np.zeros((3, 3, 3))
        core[np.arange(3), np.arange(3), np.arange(3)] = nu
        arms = tuple(simplex(rng, 3, d) for d in (2, 3, 2))
        assert np.allclose(eval_tucker(Tucker(core, arms)), eval_parafac(Parafac(nu, arms)), atol=1e-15)

    def test_matches_loop(self, rng):
        core = simplex(rng, 8).reshape(2, 2, 2)
        arms = tuple(simplex(rng, 2, 3) for _ in range(3))
        expect = loop_ctucker((0, 1, 2), core, arms)
        assert np.allclose(eval_tucker(Tucker(core, arms)), expect, atol=1e-15)


class TestCTucker:
    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_one_group_is_parafac(self, seed):
        rng = np.random.default_rng(seed)
        p, m = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        shape = tuple(int(d) for d in rng.integers(2, 4, size=p))
        exp = random_parafac(rng, m, shape)
        ct = CTucker((0,) * p, exp.weights, exp.arms)
        assert np.abs(eval_ctucker(ct) - eval_parafac(exp)).max() <= 1e-14

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_identity_groups_is_tucker(self, seed):
        rng = np.random.default_rng(seed)
        p, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        core = simplex(rng, m**p).reshape((m,) * p)
        arms = tuple(simplex(rng, m, int(rng.integers(2, 4))) for _ in range(p))
        ct = CTucker(tuple(range(p)), core, arms)
        assert np.abs(eval_ctucker(ct) - eval_tucker(Tucker(core, arms))).max() <= 1e-14

    def test_rank_one_groups_are_independent(self, rng):
        arms = tuple(simplex(rng, 1, 3) for _ in range(4))
        ct = CTucker((0, 1, 0, 1), np.ones((1, 1)), arms)
        pi = eval_ctucker(ct)
        a = marginal(pi, [0, 2])
        b = marginal(pi, [1, 3])
        assert np.allclose(pi, np.einsum("ac,bd->abcd", a, b), atol=1e-15)

    def test_matches_loop(self, rng):
        core = simplex(rng, 4).reshape(2, 2)
        arms = tuple(simplex(rng, 2, 3) for _ in range(3))
        groups = (1, 0, 1)
        assert np.allclose(eval_ctucker(CTucker(groups, core, arms)), loop_ctucker(groups, core, arms), atol=1e-15)

    def test_bad_group(self):
        with pytest.raises(ValueError):
            CTucker((0, 2), np.ones((1, 1)), (np.ones((1, 2)), np.ones((1, 2))))


class TestComposition:
    def test_rank_one_product(self, rng):
        a, b = random_parafac(rng, 1, (2, 3)), random_parafac(rng, 1, (2, 3))
        assert hadamard(a, b).n_terms == 1

    def test_times_all_ones(self, rng):
        a = random_parafac(rng, 3, (2, 3))
        ones = Parafac.from_terms([np.ones((1, 2)), np.ones((1, 3))])
        out = hadamard(a, ones)
        assert out.n_terms == 3
        assert np.allclose(eval_parafac(out), eval_parafac(a), atol=1e-15)

    @given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 4), k=st.integers(1, 4))
    @settings(max_examples=40, deadline=None)
    def test_term_counts_and_values(self, seed, m, k):
        rng = np.random.default_rng(seed)
        shape = tuple(int(d) for d in rng.integers(2, 4, size=int(rng.integers(1, 4))))
        a, b = random_parafac(rng, m, shape), random_parafac(rng, k, shape)
        prod, total = hadamard(a, b), add(a, b)
        assert prod.n_terms == m * k and total.n_terms == m + k
        assert np.abs(eval_parafac(prod) - eval_parafac(a) * eval_parafac(b)).max() <= 1e-12
        assert np.abs(eval_parafac(total) - eval_parafac(a) - eval_parafac(b)).max() <= 1e-12

    def test_dense_fallback_and_mismatch(self, rng):
        x, y = rng.random((2, 2)), rng.random((2, 2))
        assert np.array_equal(hadamard(x, y), x * y)
        assert np.array_equal(add(x, y), x + y)
        with pytest.raises(SchemeMismatch):
            hadamard(random_parafac(rng, 1, (2, 2)), random_parafac(rng, 1, (2, 3)))

    def test_join_single_group(self, rng):
        exp = random_parafac(rng, 3, (2, 3))
        out = join_independent([((0, 1), exp)])
        assert np.allclose(eval_parafac(out), eval_parafac(exp), atol=1e-15)

    def test_join_rank_one_groups(self, rng):
        out = join_independent([((0,), random_parafac(rng, 1, (3,))), ((1,), random_parafac(rng, 1, (2,)))])
        assert out.n_terms == 1

    def test_join_ranks_two_and_three(self, rng):
        a = random_parafac(rng, 2, (2, 2))
        b = random_parafac(rng, 3, (2, 2, 2))
        out = join_independent([((3, 0), a), ((1, 4, 2), b)])
        assert out.n_terms == 6
        ta, tb = eval_parafac(a), eval_parafac(b)
        expect = np.zeros((2,) * 5)
        for cell in itertools.product(range(2), repeat=5):
            expect[cell] = ta[cell[3], cell[0]] * tb[cell[1], cell[4], cell[2]]
        assert np.allclose(eval_parafac(out), expect, atol=1e-15)

    def test_join_requires_partition(self, rng):
        with pytest.raises(ValueError):
            join_independent([((0,), random_parafac(rng, 1, (2,))), ((0,), random_parafac(rng, 1, (2,)))])


class TestTwoDimensional:
    def test_rank_one_baseline(self, rng):
        u, v = rng.random(3), rng.random(4)
        exp = construct_2d_expansion(np.outer(u, v), u, v, ((), ()))
        assert exp.n_terms == 1
        assert np.allclose(eval_parafac(exp), np.outer(u, v), atol=1e-15)

    def test_one_row_replaced(self, rng):
        u, v = rng.random(3), rng.random(4)
        M = np.outer(u, v)
        M[1] = rng.random(4)
        exp = construct_2d_expansion(M, u, v, ((1,), ()))
        assert exp.n_terms == 2
        assert np.abs(eval_parafac(exp) - M).max() <= 1e-12

    @pytest.mark.parametrize("d", [3, 6])
    def test_cross_example(self, d):
        m = catalog.cross_model(d, np.random.default_rng(d), main_effects=False)
        pi = tensor_from_loglinear(m)
        base = np.full(d, np.sqrt(pi[0, 0]))
        exp = construct_2d_expansion(pi, base, base, ((1,), (1,)))
        assert exp.n_terms == 3
        assert np.abs(eval_parafac(exp) - pi).max() <= 1e-12

    def test_uncovered_cells_rejected(self, rng):
        u, v = rng.random(3), rng.random(3)
        M = np.outer(u, v)
        M[2, 2] += 1
        with pytest.raises(ValueError):
            construct_2d_expansion(M, u, v, ((1,), (1,)))

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_reconstructs_when_covered(self, seed):
        rng = np.random.default_rng(seed)
        d1, d2 = (int(x) for x in rng.integers(2, 6, size=2))
        u, v = rng.random(d1), rng.random(d2)
        H1 = [r for r in range(d1) if rng.random() < 0.4]
        H2 = [c for c in range(d2) if rng.random() < 0.4]
        M = np.outer(u, v)
        M[H1, :] = rng.random((len(H1), d2))
        M[:, H2] = rng.random((d1, len(H2)))
        exp = construct_2d_expansion(M, u, v, (H1, H2))
        assert exp.n_terms == 1 + len(H1) + len(H2)
        assert np.abs(eval_parafac(exp) - M).max() <= 1e-12


class TestPlumbing:
    def test_marginal_identity(self, rng):
        pi = simplex(rng, 12).reshape(2, 3, 2)
        assert np.array_equal(marginal(pi, [0, 1, 2]), pi)

    def test_marginal_row_sums(self, rng):
        pi = simplex(rng, 12).reshape(3, 4)
        assert np.allclose(marginal(pi, [0]), [pi[i].sum() for i in range(3)], atol=1e-15)

    def test_condition_uniform(self):
        pi = np.full((3, 3), 1 / 9)
        out = condition(pi, [[0, 2], None])
        assert np.allclose(out[[0, 2]], 1 / 6) and np.all(out[1] == 0)

    def test_condition_zero_mass(self):
        with pytest.raises(ZeroDivisionError):
            condition(np.array([[1.0, 0.0], [0.0, 0.0]]), [[1], None])

    def test_check_probability(self):
        with pytest.raises(ValueError):
            check_probability(np.array([0.6, 0.6]))
        with pytest.raises(ValueError):
            check_probability(np.array([1.1, -0.1]))

    def test_product_tensor(self, rng):
        a, b = simplex(rng, 2), simplex(rng, 3)
        assert np.allclose(product_tensor([a, b]), np.outer(a, b))
