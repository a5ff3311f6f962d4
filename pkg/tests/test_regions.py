"""Exponent-region calculus: ranks, vertex sets, hull membership."""

import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxavg.regions import (
    AveragingMatrix,
    ExponentTuple,
    complexity,
    complexity_region_contains,
    complexity_threshold,
    dual_exponent,
    exact_rank,
    extend_matrix,
    halfspace_vertices,
    hull_contains,
    is_independence_set,
    nondegeneracy_rank,
    region_contains,
    verify_certificate,
    vertex_set,
)

BILINEAR = AveragingMatrix.from_lists([[1], [2]])
FURSTENBERG = AveragingMatrix.from_lists([[1], [2], [3]])
SQUARES = AveragingMatrix.from_lists([[0, 1], [1, 0], [1, 1]])


def xt(*values):
    return ExponentTuple.from_values(list(values))


class TestExtendMatrix:
    def test_furstenberg(self):
        assert extend_matrix(FURSTENBERG) == (
            (F(1), F(1)),
            (F(2), F(1)),
            (F(3), F(1)),
            (F(0), F(1)),
        )

    def test_squares_shape(self):
        e = extend_matrix(SQUARES)
        assert len(e) == 4 and len(e[0]) == 3
        assert e[-1] == (F(0), F(0), F(1))

    def test_single_zero_row(self):
        e = extend_matrix(AveragingMatrix.from_lists([[0]]))
        assert e == ((F(0), F(1)), (F(0), F(1)))


class TestIndependence:
    def test_extended_pair(self):
        assert is_independence_set(extend_matrix(FURSTENBERG), [0, 1])

    def test_one_column_pair_dependent(self):
        assert not is_independence_set(FURSTENBERG, [0, 1])

    def test_empty_is_vacuous(self):
        assert is_independence_set(FURSTENBERG, [])

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            is_independence_set(BILINEAR, [5])


class TestRanks:
    def test_paper_examples(self):
        assert nondegeneracy_rank(FURSTENBERG) == 1
        assert nondegeneracy_rank(extend_matrix(SQUARES)) == 3
        assert nondegeneracy_rank(SQUARES) == 2

    def test_zero_row_gives_zero(self):
        assert nondegeneracy_rank([[F(0), F(0)], [F(1), F(0)]]) == 0

    def test_complexity(self):
        assert complexity(SQUARES) == 1
        assert complexity(FURSTENBERG) == 2
        assert complexity(BILINEAR) == 1

    @given(
        st.lists(
            st.lists(st.integers(-3, 3), min_size=2, max_size=2),
            min_size=1,
            max_size=4,
        )
    )
    def test_rank_sandwich_and_monotonicity(self, rows):
        a = AveragingMatrix.from_lists(rows)
        extended = extend_matrix(a)
        r_a = nondegeneracy_rank(a)
        r_e = nondegeneracy_rank(extended)
        assert r_a <= r_e <= r_a + 1
        assert r_a <= exact_rank(a)
        assert r_e <= exact_rank(extended)


class TestVertexSet:
    def test_bilinear_seven_tuples(self):
        eps = F(1, 20)
        mid, hi = F(1, 2) + eps, 1 - eps
        expected = {
            (F(0), F(0)),
            (F(0), mid),
            (mid, F(0)),
            (F(0), hi),
            (hi, F(0)),
            (mid, hi),
            (hi, mid),
        }
        assert vertex_set(BILINEAR, eps).vertices == expected

    def test_furstenberg_no_two_highs(self):
        eps = F(1, 8)
        hi = 1 - eps
        for v in vertex_set(FURSTENBERG, eps).vertices:
            assert sum(1 for c in v if c == hi) <= 1

    @given(st.integers(1, 40))
    def test_vertex_validity(self, k):
        eps = F(k, 4 * 41)
        mid, hi = F(1, 2) + eps, 1 - eps
        extended = extend_matrix(SQUARES)
        for v in vertex_set(SQUARES, eps).vertices:
            assert all(c in (F(0), mid, hi) for c in v)
            assert sum(1 for c in v if c == mid) <= 1
            highs = [i for i, c in enumerate(v) if c == hi]
            both = [i for i, c in enumerate(v) if c in (mid, hi)]
            assert is_independence_set(SQUARES, highs)
            assert is_independence_set(extended, both)

    def test_epsilon_range(self):
        with pytest.raises(ValueError):
            vertex_set(BILINEAR, F(1, 4))
        with pytest.raises(ValueError):
            vertex_set(BILINEAR, F(0))


class TestHullContains:
    def test_zero_vertex(self):
        v = hull_contains(BILINEAR, F(1, 20), xt(0, 0))
        assert v.inside and verify_certificate(BILINEAR, xt(0, 0), v)

    def test_interior_point(self):
        x = xt("7/10", "7/10")
        v = hull_contains(BILINEAR, F(1, 20), x)
        assert v.inside and verify_certificate(BILINEAR, x, v)

    def test_outside_point(self):
        for eps in (F(1, 20), F(1, 8), F(1, 5)):
            assert not hull_contains(BILINEAR, eps, xt("9/10", "7/10")).inside

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            hull_contains(BILINEAR, F(1, 20), xt("1/2", "1/2", "1/2"))


class TestRegionContains:
    def test_bilinear_center(self):
        v = region_contains(BILINEAR, xt("1/2", "1/2"), 64)
        assert v.inside and v.witness_epsilon == F(1, 256)

    def test_bilinear_outside_every_resolution(self):
        for resolution in (4, 64, 256):
            assert not region_contains(BILINEAR, xt("4/5", "4/5"), resolution).inside

    def test_zero_point_any_matrix(self):
        for a in (BILINEAR, FURSTENBERG, SQUARES):
            x = ExponentTuple.from_values(["0"] * a.rows)
            assert region_contains(a, x, 8).inside

    def test_resolution_validation(self):
        with pytest.raises(ValueError):
            region_contains(BILINEAR, xt(0, 0), 1)


class TestComplexityRegion:
    def test_squares_threshold(self):
        assert complexity_threshold(SQUARES) == F(5, 2)
        assert complexity_region_contains(SQUARES, xt("3/4", "3/4", "3/4"))
        assert not complexity_region_contains(SQUARES, xt("9/10", "9/10", "9/10"))

    def test_zero_tuple(self):
        assert complexity_region_contains(BILINEAR, xt(0, 0))

    @given(st.integers(0, 10**6))
    def test_corollary_implies_region(self, draw):
        # random rational points with denominator 16 inside the half-space
        matrices = (BILINEAR, FURSTENBERG, SQUARES)
        a = matrices[draw % 3]
        rest = draw // 3
        coords = []
        for _ in range(a.rows):
            coords.append(F(rest % 16, 16))
            rest //= 16
        x = ExponentTuple(tuple(coords))
        extended = extend_matrix(a)
        if nondegeneracy_rank(extended) != exact_rank(extended):
            return
        if complexity_region_contains(a, x):
            assert region_contains(a, x, 1024).inside


class TestDualExponent:
    def test_values(self):
        assert dual_exponent(xt("1/2", "1/2")) == 1
        assert dual_exponent(xt("1/2", "1/2", "1/2")) == F(3, 2)
        assert dual_exponent(xt(0, 0, 0)) == 0

    def test_reject_one(self):
        with pytest.raises(ValueError):
            xt(1, 0)


class TestExtremalStructure:
    @pytest.mark.parametrize("dim", [2, 3, 4])
    def test_halfspace_vertices(self, dim):
        threshold = F(2 * dim - 1, 2)  # a half-integer like the region uses
        threshold = min(threshold, F(dim) - F(1, 2))
        for v in halfspace_vertices(dim, threshold):
            fractional = [c for c in v if c not in (F(0), F(1))]
            assert len(fractional) <= 1
            if fractional:
                assert fractional[0] == F(1, 2)


class TestMatrixJson:
    def test_round_trip(self):
        obj = SQUARES.to_json()
        assert AveragingMatrix.from_json(obj) == SQUARES

    def test_rational_strings(self):
        a = AveragingMatrix.from_json({"entries": [["1/2", 1], ["-3/4", "2"]]})
        assert a.entries[0][0] == F(1, 2)
        assert a.entries[1][0] == F(-3, 4)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            AveragingMatrix.from_json({"rows": 3, "entries": [[1], [2]]})
