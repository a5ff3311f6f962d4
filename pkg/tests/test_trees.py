"""Multitile trees: sizes, the single-tree bound, selection postconditions."""

import math
from collections import defaultdict

import numpy as np
import pytest

from maxavg.tiles import generate_rank_one, standard_direction, standard_offsets
from maxavg.trees import (
    MapCoefficients,
    MultitileTree,
    TileCollection,
    is_j_separated,
    maximal_tree,
    naive_size,
    single_tree_bound_check,
    size,
    split_by_size,
    split_layers,
    strongly_disjoint,
    tree_geometry_check,
    tree_pair_sign_check,
    tree_size_sq,
)

PARAMS = dict(
    n=3, C0=32, C1=33, direction=standard_direction(3), offsets=standard_offsets(3, 32)
)


def build_instance(seed, count=120):
    inst = generate_rank_one(count=count, seed=seed, **PARAMS)
    collection = TileCollection(inst.multitiles, inst.params)
    coeffs = MapCoefficients.random(collection, seed=seed + 1000)
    return collection, coeffs


class TestSize:
    def test_zero_coefficients(self):
        collection, _ = build_instance(1, count=40)
        zero = MapCoefficients(collection, {})
        assert size(collection, 2, zero) == 0.0

    def test_singleton_value(self):
        collection, coeffs = build_instance(2, count=1)
        mt = collection.multitiles[0]
        expected = abs(coeffs.array(2)[0]) / math.sqrt(float(mt.time.length))
        assert size(collection, 2, coeffs) == pytest.approx(expected)

    def test_monotone_under_subsets(self):
        collection, coeffs = build_instance(3, count=60)
        full = size(collection, 2, coeffs)
        mask = np.zeros(len(collection), dtype=bool)
        mask[: len(collection) // 2] = True
        assert size(collection, 2, coeffs, within=mask) <= full + 1e-12

    @pytest.mark.parametrize("seed", [4, 5, 6])
    def test_fast_matches_naive(self, seed):
        collection, coeffs = build_instance(seed, count=50)
        for j in range(3):
            assert size(collection, j, coeffs) == pytest.approx(
                naive_size(collection, j, coeffs), rel=1e-12
            )


class TestSeparation:
    def test_index_labels(self):
        collection, _ = build_instance(7, count=10)
        tree = maximal_tree(collection, 0, 1)
        pair = {jj for jj, _ in collection.params.pair(1)}
        for j in range(3):
            assert is_j_separated(tree, j) == (j in pair)


class TestSingleTreeBound:
    def test_zero_functions(self):
        collection, _ = build_instance(8, count=20)
        zero = MapCoefficients(collection, {})
        tree = maximal_tree(collection, 0, 0)
        assert single_tree_bound_check(tree, zero) == (0.0, 0.0)

    def test_singleton_equality(self):
        collection, coeffs = build_instance(9, count=1)
        tree = maximal_tree(collection, 0, 0)
        lhs, rhs = single_tree_bound_check(tree, coeffs)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    @pytest.mark.parametrize("seed", [10, 11, 12, 13])
    def test_random_trees(self, seed):
        collection, coeffs = build_instance(seed, count=100)
        le = collection.le_matrix(1)
        top = int(np.argmax(le.sum(axis=0)))
        tree = maximal_tree(collection, top, 1)
        assert len(tree.member_indices) >= 2
        lhs, rhs = single_tree_bound_check(tree, coeffs)
        assert lhs <= rhs * (1 + 1e-9)


class TestGeometry:
    def test_singleton_tree_passes(self):
        collection, _ = build_instance(14, count=1)
        tree = maximal_tree(collection, 0, 0)
        assert tree_geometry_check(tree) == []

    def test_generated_trees_pass(self):
        collection, _ = build_instance(15, count=120)
        for i in range(3):
            le = collection.le_matrix(i)
            top = int(np.argmax(le.sum(axis=0)))
            if le[:, top].sum() < 2:
                continue
            assert tree_geometry_check(maximal_tree(collection, top, i)) == []

    def test_adjacent_frequency_pair_flagged(self):
        # hand-built pair: same time interval, frequency vectors one unit
        # apart, both under a coarse top whose tiny frequency sits at the
        # shared endpoint -- per-scale rigidity must flag it
        from maxavg.dyadic import DyadicInterval
        from maxavg.tiles import Multitile, Tile

        inst = generate_rank_one(count=1, seed=0, **PARAMS)
        params = inst.params
        exp = params.C1
        top = Multitile(
            tuple(
                Tile(DyadicInterval(0, -exp, 0), DyadicInterval(0, exp, k))
                for k in range(3)
            )
        )
        fine_a = Multitile(
            tuple(
                Tile(DyadicInterval(0, 0, 0), DyadicInterval(0, 0, -1))
                for _ in range(3)
            )
        )
        fine_b = Multitile(
            tuple(
                Tile(DyadicInterval(0, 0, 1), DyadicInterval(0, 0, 0))
                for _ in range(3)
            )
        )
        collection = TileCollection((top, fine_a, fine_b), params)
        tree = MultitileTree(collection, (0, 1, 2), 0, 0)
        issues = tree_geometry_check(tree)
        assert any("equal scale" in msg for msg in issues)


class TestSplit:
    def test_small_size_terminates_immediately(self):
        collection, coeffs = build_instance(17, count=60)
        current = size(collection, 2, coeffs)
        m = math.ceil(math.log2(current)) + 1  # 2^m above the size already
        result = split_by_size(collection, 2, m, coeffs)
        assert result.selected == [] and result.remainder.all()

    @pytest.mark.parametrize("seed", [20, 21])
    def test_postconditions(self, seed):
        collection, coeffs = build_instance(seed, count=150)
        j = 2
        current = size(collection, j, coeffs)
        m = math.ceil(math.log2(current)) - 1
        result = split_by_size(collection, j, m, coeffs)
        # partition
        counts = np.zeros(len(collection), dtype=int)
        for tree in result.selected + result.companions:
            counts[list(tree.member_indices)] += 1
        counts[result.remainder] += 1
        assert (counts == 1).all()
        # remainder size via the independent enumerator
        assert naive_size(collection, j, coeffs, within=result.remainder) <= 2.0**m * (
            1 + 1e-9
        )
        # strong disjointness per class and ordered extremality
        by_class = defaultdict(list)
        for tree, eps, trace in zip(
            result.selected, result.selected_signs, result.selection_trace
        ):
            by_class[(tree.index, eps)].append((tree, trace["extremal"]))
        for (i, eps), items in by_class.items():
            extremals = [e for _, e in items]
            assert all(a >= b - 1e-9 for a, b in zip(extremals, extremals[1:]))
            for a_idx in range(len(items)):
                for b_idx in range(a_idx + 1, len(items)):
                    assert strongly_disjoint(items[a_idx][0], items[b_idx][0], j)
                    assert (
                        tree_pair_sign_check(
                            items[a_idx][0], items[b_idx][0], j, eps
                        )
                        == []
                    )

    def test_precondition_enforced(self):
        collection, coeffs = build_instance(22, count=60)
        current = size(collection, 2, coeffs)
        too_small = math.ceil(math.log2(current)) - 4
        with pytest.raises(ValueError):
            split_by_size(collection, 2, too_small, coeffs)

    def test_layered_split_partitions(self):
        collection, coeffs = build_instance(23, count=80)
        layers = split_layers(collection, 2, coeffs)
        assert layers
        seen = np.zeros(len(collection), dtype=int)
        for _m, result in layers:
            for tree in result.selected + result.companions:
                seen[list(tree.member_indices)] += 1
        # every removed tile appears exactly once across layers
        assert seen.max() <= 1
        for m, result in layers:
            assert naive_size(
                collection, 2, coeffs, within=result.remainder
            ) <= 2.0**m * (1 + 1e-9)
