"""Cyclic-system averages: exactness, cube/matrix agreement, probes."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxavg.ergodic import (
    CubeSpec,
    FiniteSystem,
    convergence_probe,
    cube_average,
    ergodic_average,
    periodic_mean,
    residue_counts,
)
from maxavg.regions import AveragingMatrix

BILINEAR = AveragingMatrix.from_lists([[1], [2]])
SQUARES = CubeSpec(2).matrix()


def random_functions(seed, size, count):
    rng = np.random.default_rng(seed)
    return [rng.standard_normal(size).tolist() for _ in range(count)]


class TestResidueCounts:
    @given(st.integers(0, 500), st.integers(1, 40))
    def test_counts_sum(self, L, n):
        counts = residue_counts(L, n)
        assert sum(counts) == 2 * L + 1
        oracle = [0] * n
        for l in range(-L, L + 1):
            oracle[l % n] += 1
        assert counts == oracle


class TestErgodicAverage:
    def test_window_covering_period_exactly(self):
        system = FiniteSystem(5)
        fs = random_functions(0, 5, 2)
        for x in range(5):
            assert ergodic_average(BILINEAR, system, fs, 2, x) == pytest.approx(
                periodic_mean(BILINEAR, system, fs, x), abs=1e-14
            )

    def test_ones(self):
        system = FiniteSystem(7)
        ones = [[1.0] * 7] * 2
        assert ergodic_average(BILINEAR, system, ones, 3, 0) == pytest.approx(1.0)

    def test_grouped_equals_direct(self):
        system = FiniteSystem(5)
        fs = random_functions(1, 5, 3)
        for L in (2, 4, 9):
            direct = ergodic_average(SQUARES, system, fs, L, 1, absolute=False)
            # force the grouped path by recomputing through residue counts
            from maxavg.ergodic import _DIRECT_TERM_LIMIT

            grouped = ergodic_average.__wrapped__ if hasattr(ergodic_average, "__wrapped__") else None
            assert grouped is None
            counts = residue_counts(L, 5)
            total = math.fsum(
                counts[r1] * counts[r2] * fs[0][(1 + r2) % 5] * fs[1][(1 + r1) % 5] * fs[2][(1 + r1 + r2) % 5]
                for r1 in range(5)
                for r2 in range(5)
            )
            assert direct == pytest.approx(total / (2 * L + 1) ** 2, abs=1e-12)

    def test_large_L_multiple_of_period(self):
        system = FiniteSystem(31)
        fs = random_functions(2, 31, 3)
        for L in (15, 170, 1565):
            avg = ergodic_average(SQUARES, system, fs, L, 4, absolute=False)
            assert avg == pytest.approx(
                periodic_mean(SQUARES, system, fs, 4, absolute=False), abs=1e-12
            )


class TestCubeAverage:
    def test_matches_squares_matrix(self):
        spec = CubeSpec(2)
        system = FiniteSystem(5)
        rng = np.random.default_rng(3)
        table = {eps: rng.standard_normal(5).tolist() for eps in spec.index_set}
        ordered = [table[eps] for eps in spec.index_set]
        for L in (1, 3):
            for x in range(5):
                assert cube_average(spec, system, table, L, x) == pytest.approx(
                    ergodic_average(spec.matrix(), system, ordered, L, x), abs=1e-14
                )

    def test_ones(self):
        spec = CubeSpec(2)
        system = FiniteSystem(5)
        table = {eps: [1.0] * 5 for eps in spec.index_set}
        assert cube_average(spec, system, table, 2, 0) == pytest.approx(1.0)

    def test_m1_is_linear_average(self):
        spec = CubeSpec(1)
        assert spec.index_set == ((1,),)
        system = FiniteSystem(5)
        f = random_functions(4, 5, 1)[0]
        value = cube_average(spec, system, {(1,): f}, 2, 0, absolute=False)
        assert value == pytest.approx(math.fsum(f) / 5)

    def test_missing_function(self):
        spec = CubeSpec(2)
        with pytest.raises(KeyError):
            cube_average(spec, FiniteSystem(3), {(0, 1): [1, 1, 1]}, 1, 0)


class TestConvergenceProbe:
    def test_constants_zero(self):
        system = FiniteSystem(7)
        ones = [[1.0] * 7] * 3
        devs = convergence_probe(system, ones, SQUARES, [1, 3, 9])
        assert all(d <= 1e-14 for d in devs)

    def test_period_multiple_exact(self):
        system = FiniteSystem(31)
        fs = random_functions(5, 31, 3)
        devs = convergence_probe(system, fs, SQUARES, [15, 170])
        assert all(d <= 1e-12 for d in devs)

    def test_deviations_shrink_off_covering_schedule(self):
        # schedule chosen so no window is an exact period covering
        system = FiniteSystem(31)
        shrinking = 0
        for seed in range(10):
            fs = random_functions(seed, 31, 3)
            devs = convergence_probe(system, fs, SQUARES, [10, 100, 1000])
            if devs[0] >= devs[1] >= devs[2]:
                shrinking += 1
        assert shrinking >= 9

    def test_covering_start_is_exactly_zero(self):
        # 2*15+1 = 31 covers the period, so the first deviation vanishes and
        # the sequence starting at L=15 cannot decrease
        system = FiniteSystem(31)
        fs = random_functions(11, 31, 3)
        devs = convergence_probe(system, fs, SQUARES, [15, 155])
        assert devs[0] <= 1e-14
        assert devs[1] > devs[0]

    def test_schedule_must_increase(self):
        with pytest.raises(ValueError):
            convergence_probe(FiniteSystem(5), [[1.0] * 5] * 2, BILINEAR, [3, 1])
