"""Shifted dyadic grids: nesting, enlargement, sparsification, layering."""

from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxavg.dyadic import (
    DyadicInterval,
    a_enlargement,
    children,
    grid_interval,
    layer_intervals,
    parent,
    sparse_family_violations,
    sparsify,
)

interval_strategy = st.builds(
    DyadicInterval,
    d=st.sampled_from([0, 1, 2]),
    i=st.integers(-4, 6),
    l=st.integers(-30, 30),
)


class TestEndpoints:
    def test_standard(self):
        iv = grid_interval(0, 0, 5)
        assert (iv.lo, iv.hi) == (F(5), F(6))

    def test_shifted_plus(self):
        iv = grid_interval(1, 0, 0)
        assert (iv.lo, iv.hi) == (F(1, 3), F(4, 3))

    def test_shifted_alternates_with_scale(self):
        assert grid_interval(1, 1, 0).lo == F(1, 2) * (0 - F(1, 3))
        assert grid_interval(2, 1, 0).lo == F(1, 2) * (0 + F(1, 3))

    def test_bad_grid_id(self):
        with pytest.raises(ValueError):
            grid_interval(3, 0, 0)


class TestNesting:
    @given(interval_strategy, interval_strategy)
    def test_same_grid_overlap_implies_containment(self, a, b):
        if a.d != b.d:
            return
        if a.overlaps(b):
            assert a.contains(b) or b.contains(a)

    @given(interval_strategy)
    def test_parent_contains(self, iv):
        p = parent(iv)
        assert p.d == iv.d and p.i == iv.i - 1 and p.contains(iv)

    @given(interval_strategy)
    def test_children_partition(self, iv):
        left, right = children(iv)
        assert left.hi == right.lo
        assert left.lo == iv.lo and right.hi == iv.hi
        assert parent(left) == iv and parent(right) == iv


class TestEnlargement:
    def test_factor_one_is_identity_compatible(self):
        iv = grid_interval(0, 0, 0)
        j = a_enlargement(iv, 1)
        assert j.lo <= iv.lo and iv.hi <= j.hi

    def test_unit_interval_a4(self):
        j = a_enlargement(grid_interval(0, 0, 0), 4)
        assert (j.lo, j.hi) == (F(-8, 3), F(16, 3)) and j.d == 1

    @given(
        st.integers(-3, 5), st.integers(-50, 50), st.integers(1, 6)
    )
    def test_inclusions(self, i, l, factor):
        iv = DyadicInterval(0, i, l)
        j = a_enlargement(iv, factor)
        inner_lo, inner_hi = iv.dilate(F(factor))
        outer_lo, outer_hi = iv.dilate(F(5 * factor))
        assert j.lo <= inner_lo and inner_hi <= j.hi
        assert outer_lo <= j.lo and j.hi <= outer_hi

    def test_ratio_three_not_always_attainable(self):
        # no grid interval J satisfies 6I <= J <= 18I for I = [80, 88]
        iv = DyadicInterval(0, -3, 10)
        j = a_enlargement(iv, 6)
        outer_lo, outer_hi = iv.dilate(F(18))
        assert not (outer_lo <= j.lo and j.hi <= outer_hi)


class TestSparsify:
    def test_single_interval(self):
        fams = sparsify([grid_interval(0, 0, 0)], 2)
        assert len(fams) == 1 and len(fams[0]) == 1

    @given(st.integers(0, 50), st.integers(1, 3))
    def test_families_verify_and_partition(self, seed, factor):
        import numpy as np

        rng = np.random.default_rng(seed)
        intervals = list(
            {
                DyadicInterval(0, int(rng.integers(0, 4)), int(rng.integers(0, 40)))
                for _ in range(20)
            }
        )
        fams = sparsify(intervals, factor)
        assert sum(len(f) for f in fams) == len(intervals)
        assert len(fams) <= 3 * (100 * factor) * (100 * factor + 1)
        for fam in fams:
            assert sparse_family_violations(fam, factor) == []


class TestLayering:
    def test_disjoint_single_layer(self):
        ivs = [DyadicInterval(0, 2, l) for l in range(6)]
        assert len(layer_intervals(ivs)) == 1

    def test_chain_depth(self):
        chain = [DyadicInterval(0, i, 0) for i in range(5)]
        assert len(layer_intervals(chain)) == 5

    @given(st.integers(0, 50))
    def test_partition_disjointness_and_parents(self, seed):
        import numpy as np

        rng = np.random.default_rng(seed)
        ivs = list(
            {
                DyadicInterval(0, int(rng.integers(0, 5)), int(rng.integers(0, 40)))
                for _ in range(25)
            }
        )
        layers = layer_intervals(ivs)
        assert sum(len(layer) for layer in layers) == len(ivs)
        for depth, layer in enumerate(layers):
            for a in layer:
                for b in layer:
                    if a != b:
                        assert not (a.contains(b) or b.contains(a))
            if depth:
                for a in layer:
                    assert sum(1 for b in layers[depth - 1] if b.contains(a)) == 1

    def test_mixed_grids_rejected(self):
        with pytest.raises(ValueError):
            layer_intervals([grid_interval(0, 0, 0), grid_interval(1, 0, 0)])
