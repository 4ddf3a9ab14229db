import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tensorank import catalog
from tensorank.loglinear import (
    CapExceeded,
    LogLinearModel,
    ModelError,
    all_keys,
    canonical_key,
    clique_support,
    is_hierarchical,
    is_weakly_hierarchical,
    log_tensor,
    random_model_from_graph,
    random_weakly_hierarchical,
    support_summary,
    tensor_from_loglinear,
    theta_from_tensor,
)


def per_cell_log(model, cell):
    """Direct evaluation of theta0 + sum of every key that matches the cell."""
    total = model.theta0
    for (E, lv), value in model.theta.items():
        if all(cell[j] == c for j, c in zip(E, lv)):
            total += value
    return total


def brute_inversion(pi):
    """Inclusion-exclusion over corner cells, one cell at a time."""
    p = pi.ndim
    logpi = np.log(pi)
    out = {}
    for cell in itertools.product(*(range(d) for d in pi.shape)):
        E = [j for j in range(p) if cell[j]]
        total = 0.0
        for r in range(len(E) + 1):
            for F in itertools.combinations(E, r):
                corner = tuple(cell[j] if j in F else 0 for j in range(p))
                total += (-1) ** (len(E) - r) * logpi[corner]
        out[cell] = total
    return out


class TestModel:
    def test_keys_are_canonicalized(self):
        m = LogLinearModel((3, 2), {((1, 0), (1, 2)): 0.5})
        assert m.theta == {((0, 1), (2, 1)): 0.5}
        assert m[((1, 0), (1, 2))] == 0.5

    def test_zero_values_dropped(self):
        m = LogLinearModel((2, 2), {((0,), (1,)): 0.0, ((1,), (1,)): 1.0})
        assert list(m.theta) == [((1,), (1,))]

    @pytest.mark.parametrize(
        "theta",
        [
            {((0,), (0,)): 1.0},  # corner level
            {((0,), (2,)): 1.0},  # out of range
            {((3,), (1,)): 1.0},  # no such variable
            {((0, 0), (1, 1)): 1.0},  # repeated variable
            {((0, 1), (1,)): 1.0},  # length mismatch
        ],
    )
    def test_bad_keys_rejected(self, theta):
        with pytest.raises(ModelError):
            LogLinearModel((2, 2), theta)

    def test_duplicate_after_canonicalization(self):
        with pytest.raises(ModelError):
            LogLinearModel((2, 2), {((0, 1), (1, 1)): 1.0, ((1, 0), (1, 1)): 2.0})

    def test_degenerate_scheme_rejected(self):
        with pytest.raises(ModelError):
            LogLinearModel((2, 1))

    def test_all_keys_count(self):
        scheme = (2, 3, 4)
        assert len(all_keys(scheme)) == math.prod(scheme) - 1
        assert len(set(all_keys(scheme))) == len(all_keys(scheme))


class TestHierarchy:
    def test_empty(self):
        m = LogLinearModel((3, 3))
        assert is_weakly_hierarchical(m) and is_hierarchical(m)

    def test_level_two_example(self):
        m = catalog.level_two_model(4)
        assert is_weakly_hierarchical(m)
        assert not is_hierarchical(m)

    def test_missing_main_effect(self):
        m = catalog.level_two_model(4)
        theta = dict(m.theta)
        del theta[((0,), (1,))]
        assert not is_weakly_hierarchical(LogLinearModel(m.scheme, theta))
        assert is_weakly_hierarchical(LogLinearModel(m.scheme, theta), ignore_main_effects=True)

    def test_cross_model_without_main_effects_needs_flag(self):
        m = catalog.cross_model(4, np.random.default_rng(0), main_effects=False)
        assert not is_weakly_hierarchical(m)
        assert is_weakly_hierarchical(m, ignore_main_effects=True)

    @given(seed=st.integers(0, 10**6), p=st.integers(1, 4))
    @settings(max_examples=60, deadline=None)
    def test_binary_notions_agree(self, seed, p):
        rng = np.random.default_rng(seed)
        scheme = (2,) * p
        keys = [k for k in all_keys(scheme) if rng.random() < 0.5]
        m = LogLinearModel(scheme, {k: 1.0 for k in keys})
        assert is_hierarchical(m) == is_weakly_hierarchical(m)

    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_hierarchical_implies_weak(self, seed):
        rng = np.random.default_rng(seed)
        p = int(rng.integers(2, 5))
        edges = [e for e in itertools.combinations(range(p), 2) if rng.random() < 0.5]
        scheme = tuple(int(d) for d in rng.integers(2, 4, size=p))
        m = random_model_from_graph(scheme, edges, 1.0, rng)
        assert is_hierarchical(m)
        assert is_weakly_hierarchical(m)


class TestSupport:
    def test_empty(self):
        s = support_summary(LogLinearModel((2, 3, 2)))
        assert all(not c for c in s.C_j)
        assert s.U == frozenset({0, 1, 2})
        assert not s.C_theta

    @pytest.mark.parametrize("d", [3, 5])
    def test_cross_example(self, d):
        s = support_summary(catalog.cross_model(d, np.random.default_rng(1)))
        assert s.C_j == (frozenset(range(1, d)),) * 2

    def test_triangle_example(self):
        d = 5
        s = support_summary(catalog.triangle_model(d, np.random.default_rng(1)))
        assert s.C_j[0] == frozenset(range(1, d))
        assert s.C_j[1] == frozenset(range(1, d))
        assert s.C_j[2] == frozenset(range(1, d))
        assert s.C_theta2 <= s.C_theta


class TestTensor:
    def test_uniform(self):
        pi = tensor_from_loglinear(LogLinearModel((2, 3, 4)))
        assert np.allclose(pi, 1 / 24, atol=1e-15)

    def test_cross_structure(self):
        d = 5
        m = catalog.cross_model(d, np.random.default_rng(3), main_effects=False)
        pi = tensor_from_loglinear(m)
        base = pi[0, 0]
        off = ~np.isclose(pi, base, rtol=1e-13, atol=0)
        assert not off[2:, 2:].any()
        assert off[1, 1:].all() and off[1:, 1].all()

    def test_per_cell_oracle(self):
        m = random_weakly_hierarchical((3, 3, 3), np.random.default_rng(7))
        logt = log_tensor(m)
        for cell in itertools.product(range(3), repeat=3):
            assert logt[cell] == pytest.approx(per_cell_log(m, cell), abs=1e-12)
        assert tensor_from_loglinear(m).sum() == pytest.approx(1.0, abs=1e-12)

    def test_zero_keys_do_not_change_tensor(self):
        m = random_weakly_hierarchical((2, 3), np.random.default_rng(2))
        theta = dict(m.theta)
        theta[((0, 1), (1, 2))] = theta.get(((0, 1), (1, 2)), 0.0)
        same = LogLinearModel(m.scheme, {**theta, ((0, 1), (1, 1)): 0.0} if ((0, 1), (1, 1)) not in theta else theta)
        assert np.array_equal(tensor_from_loglinear(m), tensor_from_loglinear(same))

    def test_overflow(self):
        m = LogLinearModel((2, 2), {((0,), (1,)): 1e4})
        with pytest.raises(OverflowError):
            tensor_from_loglinear(m, normalize=False)

    def test_cell_cap(self):
        with pytest.raises(CapExceeded):
            log_tensor(LogLinearModel((2,) * 5), cap=16)


class TestInversion:
    def test_uniform(self):
        m = theta_from_tensor(np.full((2, 3, 4), 1 / 24))
        assert m.theta0 == pytest.approx(-math.log(24), abs=1e-14)
        assert all(abs(v) < 1e-14 for v in m.theta.values())

    def test_two_by_two_by_hand(self):
        pi = np.array([[0.2, 0.25], [0.25, 0.3]])
        m = theta_from_tensor(pi)
        assert m[((0, 1), (1, 1))] == pytest.approx(math.log(0.3 * 0.2 / (0.25 * 0.25)), abs=1e-14)

    def test_matches_cellwise_inclusion_exclusion(self):
        pi = np.random.default_rng(4).dirichlet(np.ones(18)).reshape(2, 3, 3)
        m = theta_from_tensor(pi)
        ref = brute_inversion(pi)
        for cell, value in ref.items():
            E = tuple(j for j, c in enumerate(cell) if c)
            got = m.theta0 if not E else m[(E, tuple(cell[j] for j in E))]
            assert got == pytest.approx(value, abs=1e-12)

    def test_requires_positive(self):
        with pytest.raises(ValueError):
            theta_from_tensor(np.array([[0.5, 0.5], [0.0, 0.0]]))

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        p = int(rng.integers(1, 5))
        scheme = tuple(int(d) for d in rng.integers(2, 5, size=p))
        m = random_weakly_hierarchical(scheme, rng)
        back = theta_from_tensor(tensor_from_loglinear(m))
        for key in all_keys(scheme):
            assert back[key] == pytest.approx(m[key], abs=1e-10)
        assert back.theta0 == pytest.approx(m.theta0, abs=1e-10)


class TestCliques:
    def test_empty_graph_is_main_effects(self):
        keys = clique_support((2, 3), [])
        assert all(len(E) == 1 for E, _ in keys)
        assert len(keys) == 1 + 2

    @staticmethod
    def complete_subsets(p, edges):
        adj = {frozenset(e) for e in edges}
        out = []
        for r in range(1, p + 1):
            for S in itertools.combinations(range(p), r):
                if all(frozenset(pair) in adj for pair in itertools.combinations(S, 2)):
                    out.append(S)
        return out

    @pytest.mark.parametrize("name", ["two-cliques", "simulation", "star", "one-separator"])
    def test_binary_support_is_complete_subsets(self, name):
        p, edges = catalog.GRAPHS[name]
        keys = clique_support((2,) * p, edges)
        assert sorted(E for E, _ in keys) == sorted(self.complete_subsets(p, edges))

    def test_two_cliques_count(self):
        p, edges = catalog.GRAPHS["two-cliques"]
        # 15 nonempty subsets of the 4-clique plus 7 of the triangle
        assert len(clique_support((2,) * p, edges)) == 22

    def test_simulation_maximal_cliques(self):
        p, edges = catalog.GRAPHS["simulation"]
        E = {E for E, _ in clique_support((2,) * p, edges)}
        maximal = {S for S in E if not any(set(S) < set(T) for T in E)}
        assert maximal == {(0, 1, 2, 3), (3, 4, 5), (4, 5, 6, 7)}

    def test_bad_edges(self):
        with pytest.raises(ModelError):
            clique_support((2, 2), [(0, 0)])
        with pytest.raises(ModelError):
            clique_support((2, 2), [(0, 2)])


def test_canonical_key_sorts():
    assert canonical_key((2, 0), (3, 1)) == ((0, 2), (1, 3))
