"""Discrete averages, maximal operators, majorants, transference."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxavg.averaging import (
    average_at,
    hl_maximal,
    hl_maximal_at,
    holder_baseline,
    maximal_at,
    maximal_operator,
    operator_ratio,
    reachable_window,
    transference_check,
)
from maxavg.regions import AveragingMatrix, ExponentTuple
from maxavg.signals import Signal, lp_norm

BILINEAR = AveragingMatrix.from_lists([[1], [2]])
SQUARES = AveragingMatrix.from_lists([[0, 1], [1, 0], [1, 1]])
DIAGONAL = AveragingMatrix.from_lists([[1, 0], [0, 1]])

DELTA = Signal.delta(0)


def brute_force_maximal(a, signals, x, n_max):
    """Independent oracle: direct nested sums over every N up to n_max."""
    rows = [[int(e) for e in row] for row in a.entries]
    m = a.cols
    best, best_n = -1.0, 1
    for N in range(1, n_max + 1):
        total = math.fsum(
            math.prod(
                abs(s(x + sum(r * t for r, t in zip(row, combo))))
                for row, s in zip(rows, signals)
            )
            for combo in itertools.product(range(-N, N + 1), repeat=m)
        )
        value = total / (2 * N + 1) ** m
        if value > best:
            best, best_n = value, N
    return best, best_n


class TestAverageAt:
    def test_all_ones(self):
        ones = Signal.constant(-100, 100)
        assert average_at(BILINEAR, [ones, ones], 5, 0) == pytest.approx(1.0)

    def test_delta_center(self):
        assert average_at(BILINEAR, [DELTA, DELTA], 1, 0) == pytest.approx(1 / 3)

    def test_delta_off_center(self):
        assert average_at(BILINEAR, [DELTA, DELTA], 1, 1) == 0.0

    def test_non_integer_matrix_rejected(self):
        bad = AveragingMatrix.from_lists([["1/2"], [2]])
        with pytest.raises(ValueError):
            average_at(bad, [DELTA, DELTA], 1, 0)


class TestMaximalAt:
    def test_delta_value_and_argmax(self):
        assert maximal_at(BILINEAR, [DELTA, DELTA], 0) == (pytest.approx(1 / 3), 1)

    def test_constant_center_ties_to_smallest(self):
        const = Signal.constant(-50, 50)
        value, n = maximal_at(BILINEAR, [const, const], 0)
        assert value == pytest.approx(1.0) and n == 1

    def test_zero_signals(self):
        zero = Signal(0, (0.0,))
        assert maximal_at(BILINEAR, [zero, DELTA], 0) == (0.0, 1)

    @given(st.integers(0, 2**32 - 1))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        signals = [
            Signal.from_pairs(
                [
                    (int(p), float(v))
                    for p, v in zip(
                        rng.integers(-8, 9, size=4), rng.standard_normal(4)
                    )
                ]
            )
            for _ in range(2)
        ]
        x = int(rng.integers(-10, 11))
        value, arg_n = maximal_at(BILINEAR, signals, x)
        oracle_value, oracle_n = brute_force_maximal(BILINEAR, signals, x, 80)
        assert value == pytest.approx(oracle_value, abs=1e-12)
        if value > 0:
            assert arg_n == oracle_n

    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 5.0))
    def test_homogeneity(self, seed, c):
        rng = np.random.default_rng(seed)
        signals = [
            Signal.from_pairs(
                [(int(p), float(v)) for p, v in zip(rng.integers(-6, 7, 3), rng.standard_normal(3))]
            )
            for _ in range(2)
        ]
        v1, n1 = maximal_at(BILINEAR, signals, 1)
        v2, n2 = maximal_at(BILINEAR, [s.scale(c) for s in signals], 1)
        assert v2 == pytest.approx(v1 * c**2, rel=1e-12)
        assert n1 == n2

    def test_squares_matrix_delta(self):
        value, n = maximal_at(SQUARES, [DELTA, DELTA, DELTA], 0)
        assert value == pytest.approx(1 / 9) and n == 1


class TestMaximalOperator:
    def test_delta_window(self):
        out = maximal_operator(BILINEAR, [DELTA, DELTA], (-3, 3))
        assert out.values == (0.0, 0.0, 0.0, pytest.approx(1 / 3), 0.0, 0.0, 0.0)

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError):
            maximal_operator(BILINEAR, [DELTA, DELTA], (2, 1))

    @given(st.integers(0, 2**32 - 1), st.integers(-5, 5))
    def test_translation_equivariance(self, seed, shift):
        rng = np.random.default_rng(seed)
        signals = [
            Signal.from_pairs(
                [(int(p), float(v)) for p, v in zip(rng.integers(-6, 7, 3), rng.standard_normal(3))]
            )
            for _ in range(2)
        ]
        base = maximal_operator(BILINEAR, signals, (-20, 20))
        moved = maximal_operator(
            BILINEAR, [s.translate(shift) for s in signals], (-20 + shift, 20 + shift)
        )
        assert np.allclose(base.values, moved.values)

    @given(st.integers(0, 2**32 - 1))
    def test_monotone_in_magnitude(self, seed):
        rng = np.random.default_rng(seed)
        positions = rng.integers(-6, 7, 4)
        small = [
            Signal.from_pairs([(int(p), float(v)) for p, v in zip(positions, rng.uniform(0, 1, 4))])
            for _ in range(2)
        ]
        big = [
            Signal(s.support_start, tuple(v * 2 for v in s.values)) for s in small
        ]
        out_small = maximal_operator(BILINEAR, small, (-15, 15))
        out_big = maximal_operator(BILINEAR, big, (-15, 15))
        assert all(a <= b + 1e-12 for a, b in zip(out_small.values, out_big.values))

    def test_nonnegative(self):
        out = maximal_operator(BILINEAR, [Signal.delta(0, -2.0), DELTA], (-5, 5))
        assert all(v >= 0 for v in out.values)


class TestHardyLittlewood:
    def test_delta(self):
        assert hl_maximal_at(DELTA, 0) == pytest.approx(1 / 3)

    def test_constant_window(self):
        const = Signal.constant(-30, 30)
        assert hl_maximal_at(const, 0) == pytest.approx(1.0)

    def test_dominates_fixed_n_averages(self):
        rng = np.random.default_rng(5)
        s = Signal(-5, tuple(rng.uniform(0, 1, 11)))
        m_val = hl_maximal_at(s, 2)
        for N in range(1, 12):
            avg = math.fsum(s(2 + t) for t in range(-N, N + 1)) / (2 * N + 1)
            assert avg <= m_val + 1e-12


class TestDiagonalDomination:
    @given(st.integers(0, 2**32 - 1))
    def test_product_bound(self, seed):
        rng = np.random.default_rng(seed)
        signals = [
            Signal.from_pairs(
                [(int(p), float(v)) for p, v in zip(rng.integers(-8, 9, 4), rng.standard_normal(4))]
            )
            for _ in range(2)
        ]
        out = maximal_operator(DIAGONAL, signals, (-12, 12))
        m1 = hl_maximal(signals[0], (-12, 12))
        m2 = hl_maximal(signals[1], (-12, 12))
        for t, m_a, m_b in zip(out.values, m1.values, m2.values):
            assert t <= m_a * m_b * (1 + 1e-12) + 1e-15


class TestHolderBaseline:
    def test_constants(self):
        ones = Signal.constant(-64, 64)
        exps = ExponentTuple.from_values(["1/3", "1/3"])
        assert holder_baseline(BILINEAR, [ones, ones], exps, 0) == pytest.approx(
            1.0, rel=1e-9
        )

    def test_dominates_delta_value(self):
        exps = ExponentTuple.from_values(["1/3", "1/3"])
        base = holder_baseline(BILINEAR, [DELTA, DELTA], exps, 0)
        value, _ = maximal_at(BILINEAR, [DELTA, DELTA], 0)
        assert base >= value - 1e-12

    def test_rejects_infinite_exponent(self):
        with pytest.raises(ValueError):
            holder_baseline(
                BILINEAR, [DELTA, DELTA], ExponentTuple.from_values(["0", "1/2"]), 0
            )


class TestReachableWindow:
    def test_bilinear_delta(self):
        lo, hi = reachable_window(BILINEAR, [DELTA, DELTA])
        out = maximal_operator(BILINEAR, [DELTA, DELTA], (lo - 3, hi + 3))
        values = np.array(out.values)
        assert values[0] == 0.0 and values[-1] == 0.0
        nz = np.flatnonzero(values)
        assert nz.size > 0
        assert lo <= nz[0] + lo - 3 and nz[-1] + lo - 3 <= hi


class TestTransference:
    def test_constants_ratio_one(self):
        const = Signal.constant(-93, 92)  # window of width 186 = 6 * 31
        rep = transference_check(BILINEAR, [const, const], 31, L=5)
        assert rep["finitary_ratio"] == pytest.approx(1.0, rel=1e-12)
        assert rep["integer_ratio"] >= rep["finitary_ratio"] - 1e-12
        assert rep["holds"]

    def test_delta_inequality(self):
        rep = transference_check(BILINEAR, [DELTA, DELTA], 31)
        assert rep["holds"] and rep["left_sum"] <= rep["right_sum"] * (1 + 1e-9)

    def test_ratios_agree_for_growing_system(self):
        rng = np.random.default_rng(3)
        sig = Signal.from_pairs(
            [(int(p), float(v)) for p, v in zip(rng.integers(-6, 7, 8), rng.standard_normal(8))]
        )
        exps = ExponentTuple.from_values(["1/4", "1/4"])
        gaps = []
        for n_sys in (17, 61, 201):
            rep = transference_check(BILINEAR, [sig, sig], n_sys, exponents=exps)
            assert rep["holds"]
            gaps.append(abs(rep["finitary_ratio"] - rep["integer_ratio"]))
        assert gaps[-1] < 0.02


class TestSamplingConsistency:
    def test_riemann_trend(self):
        # smooth compactly supported profile, sampled at three spacings:
        # eps^(1/q') * discrete norm settles (Richardson-style difference decay)
        exps = ExponentTuple.from_values(["1/2", "1/2"])
        q = 1.0  # dual exponent sum = 1

        def discrete_norm(eps):
            xs = np.arange(-int(4 / eps), int(4 / eps) + 1)
            profile = np.maximum(0.0, 1 - np.abs(xs * eps) / 2) ** 2
            sig = Signal(int(xs[0]), tuple(profile.tolist()))
            lo, hi = reachable_window(BILINEAR, [sig, sig])
            out = maximal_operator(BILINEAR, [sig, sig], (lo, hi))
            return eps ** (1 / q) * lp_norm(out, q)

        d1, d2, d3 = (discrete_norm(e) for e in (1 / 8, 1 / 16, 1 / 32))
        assert abs(d3 - d2) < 0.75 * abs(d2 - d1)


class TestOperatorRatio:
    def test_bounded_exponent_ratio_below_one(self):
        exps = ExponentTuple.from_values(["0", "0"])
        rng = np.random.default_rng(2)
        signals = [
            Signal.from_pairs(
                [(int(p), float(v)) for p, v in zip(rng.integers(-6, 7, 5), rng.standard_normal(5))]
            )
            for _ in range(2)
        ]
        assert operator_ratio(BILINEAR, signals, exps) <= 1.0 + 1e-12
