import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leximin_approx.order import (
    EXACT,
    ApproxFactors,
    factor_transform,
    is_approx_leximin_optimal,
    is_leximin_preferred,
    leximin_key,
    leximin_maximum,
    relation_set,
    sort_outcomes,
)

from conftest import X, Y, Z

VECTORS = [X, Y, Z]
NAMES = {0: "x", 1: "y", 2: "z"}

# (alpha, eps) -> pairs "ab" meaning a is preferred over b
TABLE = {
    (1.0, 0): {"zx", "zy", "yx"},
    (1.0, 1): {"zx", "yx"},
    (1.0, 15): {"yx"},
    (1.0, 45): set(),
    (0.75, 0): {"zx", "zy", "yx"},
    (0.75, 1): {"zx", "yx"},
    (0.75, 15): {"yx"},
    (0.75, 45): set(),
    (0.5, 0): {"yx"},
    (0.5, 1): {"yx"},
    (0.5, 15): set(),
    (0.5, 45): set(),
    (0.25, 0): set(),
    (0.25, 1): set(),
    (0.25, 15): set(),
    (0.25, 45): set(),
}


def named(pairs):
    return {NAMES[i] + NAMES[j] for i, j in pairs}


class TestRelationTable:
    @pytest.mark.parametrize("alpha,eps", sorted(TABLE))
    def test_cell(self, alpha, eps):
        assert named(relation_set(VECTORS, ApproxFactors(alpha, eps))) == TABLE[(alpha, eps)]

    def test_witness_index(self):
        w = is_leximin_preferred(Z, X)
        assert w.k == 1 and w.margin == pytest.approx(1.0)
        w = is_leximin_preferred(Y, X, ApproxFactors(1.0, 15))
        assert w.k == 2 and w.margin == pytest.approx(15.0)

    def test_equal_vectors_not_preferred(self):
        assert is_leximin_preferred([3, 1, 2], [1, 2, 3]) is None

    def test_order_of_entries_is_irrelevant(self):
        assert is_leximin_preferred([20, 30, 2], [15, 1, 10]).k == 1

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            is_leximin_preferred([1, 2], [1, 2, 3])

    def test_prefix_must_hold(self):
        # the second entry is much larger but the first is smaller
        assert is_leximin_preferred([0, 100], [1, 1]) is None


class TestFactors:
    def test_range_checks(self):
        with pytest.raises(ValueError):
            ApproxFactors(0.0, 0.0)
        with pytest.raises(ValueError):
            ApproxFactors(1.5, 0.0)
        with pytest.raises(ValueError):
            ApproxFactors(0.5, -1.0)

    def test_transform_values(self):
        assert factor_transform(ApproxFactors(0.5, 0)).alpha == pytest.approx(1 / 3, abs=1e-12)
        a = 1 - 1 / math.e
        expected = (math.e - 1) ** 2 / (math.e**2 - math.e + 1)
        assert abs(factor_transform(ApproxFactors(a, 0)).alpha - expected) < 1e-12
        assert factor_transform(ApproxFactors(0.9, 0)).alpha == pytest.approx(81 / 91, abs=1e-12)
        assert factor_transform(EXACT) == EXACT

    def test_transform_epsilon(self):
        assert factor_transform(ApproxFactors(0.5, 3.0)).epsilon == pytest.approx(4.0)

    @given(st.floats(0.01, 1.0), st.floats(0.0, 10.0))
    def test_transform_weakens(self, alpha, eps):
        out = factor_transform(ApproxFactors(alpha, eps))
        assert out.alpha <= alpha + 1e-12
        assert out.epsilon >= eps - 1e-12


small_ints = st.lists(st.integers(0, 6), min_size=3, max_size=3)


class TestOrderProperties:
    @given(small_ints)
    def test_irreflexive(self, u):
        assert is_leximin_preferred(u, u) is None

    @given(small_ints, small_ints)
    def test_asymmetric(self, u, v):
        assert not (is_leximin_preferred(u, v) and is_leximin_preferred(v, u))

    @given(small_ints, small_ints, small_ints)
    @settings(max_examples=300, deadline=None)
    def test_transitive_exact(self, u, v, w):
        if is_leximin_preferred(u, v) and is_leximin_preferred(v, w):
            assert is_leximin_preferred(u, w)

    @given(small_ints, small_ints)
    def test_exact_order_matches_sorted_tuples(self, u, v):
        assert (is_leximin_preferred(u, v) is not None) == (leximin_key(u) > leximin_key(v))

    @given(small_ints, small_ints, st.permutations(range(3)))
    def test_permutation_invariant(self, u, v, perm):
        pu = [u[i] for i in perm]
        assert (is_leximin_preferred(pu, v) is None) == (is_leximin_preferred(u, v) is None)

    @given(small_ints, small_ints, st.floats(0.1, 1.0), st.floats(0.0, 5.0))
    def test_approx_implies_weaker(self, u, v, alpha, eps):
        # a preference at given factors persists when the factors are relaxed
        if is_leximin_preferred(u, v, ApproxFactors(alpha, eps)):
            assert is_leximin_preferred(u, v, ApproxFactors(min(1.0, alpha * 1.2), eps / 2))
            assert is_leximin_preferred(u, v, EXACT)

    @given(st.lists(small_ints, min_size=1, max_size=8))
    def test_maximum_is_undominated(self, cands):
        best = leximin_maximum(cands)
        assert is_approx_leximin_optimal(cands[best], cands)

    def test_maximum_smallest_index_on_ties(self):
        assert leximin_maximum([[1, 2], [2, 1], [0, 5]]) == 0

    def test_sort_is_ascending(self):
        assert np.array_equal(sort_outcomes([3, 1, 2]), [1, 2, 3])
