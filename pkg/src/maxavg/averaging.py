"""Discrete multilinear averages on the integers and their maximal operators.

The basic object is the box average

    (2N+1)^{-m} * sum_{|n_1|,...,|n_m| <= N} prod_i |f_i(x + A_i . n)|

for an integer matrix A, together with its supremum over N >= 1.  Signals
have finite support, so each average has only finitely many contributing
lattice points; once the box contains all of them the numerator is constant
and the average strictly decreases in N, which truncates the supremum to a
finite, exactly computable search range.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .regions import AveragingMatrix, ExponentTuple
from .signals import Signal, lp_norm

_INF = math.inf


def _integer_rows(a: AveragingMatrix) -> list[list[int]]:
    rows = []
    for row in a.entries:
        out = []
        for e in row:
            if e.denominator != 1:
                raise ValueError(f"integer matrix required, got entry {e}")
            out.append(int(e))
        rows.append(out)
    return rows


def _propagate_bounds(
    rows: Sequence[Sequence[int]],
    lows: Sequence[float],
    highs: Sequence[float],
    m: int,
    sweeps: int = 4,
) -> Optional[list[tuple[float, float]]]:
    """Interval bounds on lattice points n with A_i . n in [lows_i, highs_i].

    Iterated constraint propagation; returns None when the constraint set is
    provably empty.  Bounds may stay infinite when the rows do not pin down
    every coordinate.
    """
    bounds = [(-_INF, _INF)] * m
    for _ in range(sweeps):
        changed = False
        for row, lo_c, hi_c in zip(rows, lows, highs):
            for j in range(m):
                if row[j] == 0:
                    continue
                rest_lo, rest_hi = 0.0, 0.0
                for jj in range(m):
                    if jj == j or row[jj] == 0:
                        continue
                    b_lo, b_hi = bounds[jj]
                    term_lo = min(row[jj] * b_lo, row[jj] * b_hi)
                    term_hi = max(row[jj] * b_lo, row[jj] * b_hi)
                    rest_lo += term_lo
                    rest_hi += term_hi
                num_lo, num_hi = lo_c - rest_hi, hi_c - rest_lo
                if row[j] > 0:
                    new_lo, new_hi = num_lo / row[j], num_hi / row[j]
                else:
                    new_lo, new_hi = num_hi / row[j], num_lo / row[j]
                cur_lo, cur_hi = bounds[j]
                new_lo = max(cur_lo, new_lo if new_lo == -_INF else math.ceil(new_lo - 1e-9))
                new_hi = min(cur_hi, new_hi if new_hi == _INF else math.floor(new_hi + 1e-9))
                if new_lo > new_hi:
                    return None
                if (new_lo, new_hi) != (cur_lo, cur_hi):
                    bounds[j] = (new_lo, new_hi)
                    changed = True
        if not changed:
            break
    return bounds


def _search_radius_for_x(a: AveragingMatrix, signals: Sequence[Signal], x_lo, x_hi) -> int:
    """Smallest box radius guaranteed to contain every contributing lattice
    point for every evaluation point in [x_lo, x_hi].

    Raises when the matrix leaves some lattice direction unconstrained (the
    numerator would then grow without bound and the supremum is not attained
    in any finite window).
    """
    rows = _integer_rows(a)
    m = a.cols
    active = [
        (row, s.support_start - x_hi, s.support_end - x_lo)
        for row, s in zip(rows, signals)
        if any(e != 0 for e in row)
    ]
    if not active:
        return 1
    bounds = _propagate_bounds(
        [r for r, _, _ in active], [lo for _, lo, _ in active], [hi for _, _, hi in active], m
    )
    if bounds is None:
        return 1  # empty constraint set: every average is zero
    radius = 1
    for lo, hi in bounds:
        if lo == -_INF or hi == _INF:
            raise ValueError(
                "matrix leaves an averaging direction unconstrained by the signal "
                "supports; the maximal value is not attained in a finite window"
            )
        radius = max(radius, int(abs(lo)), int(abs(hi)))
    return radius


def average_at(
    a: AveragingMatrix, signals: Sequence[Signal], N: int, x: int
) -> float:
    """Box average of the magnitude product at radius N."""
    rows = _integer_rows(a)
    if len(signals) != a.rows:
        raise ValueError(f"expected {a.rows} signals, got {len(signals)}")
    if N < 1:
        raise ValueError("N must be a positive integer")
    m = a.cols
    total = _box_sums(rows, signals, x, N)[N]
    return total / (2 * N + 1) ** m


def _box_sums(
    rows: Sequence[Sequence[int]], signals: Sequence[Signal], x: int, radius: int
) -> np.ndarray:
    """Numerators S(N) for N = 0..radius via dense cumulative sums.

    S(N) sums the magnitude product over the box [-N, N]^m.
    """
    m = len(rows[0])
    side = 2 * radius + 1
    offsets = np.arange(-radius, radius + 1)
    grid = np.ones([side] * m)
    for row, s in zip(rows, signals):
        idx = np.zeros([side] * m, dtype=np.int64)
        for j in range(m):
            if row[j] != 0:
                shape = [1] * m
                shape[j] = side
                idx = idx + row[j] * offsets.reshape(shape)
        lo = int(idx.min()) + x
        hi = int(idx.max()) + x
        dense = s.array(lo, hi)
        grid = grid * dense[idx + (x - lo)]
    summed = grid
    for axis in range(m):
        summed = np.cumsum(summed, axis=axis)
    # box sum over [-N, N]^m by inclusion-exclusion on the cumulative grid
    out = np.empty(radius + 1)
    for N in range(radius + 1):
        total = 0.0
        for corner in range(1 << m):
            idx = []
            sign = 1
            skip = False
            for axis in range(m):
                if corner >> axis & 1:
                    pos = radius - N - 1
                    if pos < 0:
                        skip = True
                        break
                    idx.append(pos)
                    sign = -sign
                else:
                    idx.append(radius + N)
            if skip:
                continue  # cumulative sum before the start of an axis is zero
            total += sign * summed[tuple(idx)]
        out[N] = total
    return out


def maximal_at(
    a: AveragingMatrix, signals: Sequence[Signal], x: int
) -> tuple[float, int]:
    """Supremum over N >= 1 of the box average, with its (smallest) argmax.

    The search stops at the radius beyond which the numerator is constant;
    past that point the average strictly decreases, so the supremum is
    attained inside the scanned range.
    """
    rows = _integer_rows(a)
    if len(signals) != a.rows:
        raise ValueError(f"expected {a.rows} signals, got {len(signals)}")
    if all(s.is_zero() for s in signals):
        return 0.0, 1
    factor = 1.0
    active_rows, active_signals = [], []
    for row, s in zip(rows, signals):
        if any(e != 0 for e in row):
            active_rows.append(row)
            active_signals.append(s)
        else:
            factor *= abs(s(x))
    if factor == 0.0:
        return 0.0, 1
    if not active_rows:
        return factor, 1
    sub = AveragingMatrix.from_lists(active_rows)
    radius = _search_radius_for_x(sub, active_signals, x, x)
    sums = _box_sums(active_rows, active_signals, x, radius)
    m = a.cols
    best_val, best_n = -1.0, 1
    for N in range(1, radius + 1):
        val = sums[N] / (2 * N + 1) ** m
        if val > best_val:
            best_val, best_n = val, N
    value = factor * best_val
    if value == 0.0:
        return 0.0, 1
    return value, best_n


def maximal_operator(
    a: AveragingMatrix, signals: Sequence[Signal], window: tuple[int, int]
) -> Signal:
    """Pointwise maximal values over an integer window [lo, hi]."""
    lo, hi = int(window[0]), int(window[1])
    if hi < lo:
        raise ValueError("empty window")
    if len(signals) != a.rows:
        raise ValueError(f"expected {a.rows} signals, got {len(signals)}")
    if a.cols == 1:
        # chunked so the per-chunk search radius tracks the local geometry
        chunk = 1024
        parts = []
        for start in range(lo, hi + 1, chunk):
            stop = min(start + chunk - 1, hi)
            parts.append(_maximal_profile_1d(a, signals, start, stop)[0])
        values = np.concatenate(parts)
    else:
        values = np.array([maximal_at(a, signals, x)[0] for x in range(lo, hi + 1)])
    return Signal(lo, tuple(float(v) for v in values))


def _maximal_profile_1d(
    a: AveragingMatrix, signals: Sequence[Signal], lo: int, hi: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized m=1 maximal values and argmax radii over a window."""
    rows = _integer_rows(a)
    xs = np.arange(lo, hi + 1)
    width = xs.size
    factor = np.ones(width)
    active = []
    for row, s in zip(rows, signals):
        if row[0] == 0:
            factor *= s.array(lo, hi)
        else:
            active.append((row[0], s))
    if not active:
        return factor, np.ones(width, dtype=np.int64)
    sub = AveragingMatrix.from_lists([[c] for c, _ in active])
    try:
        radius = _search_radius_for_x(sub, [s for _, s in active], lo, hi)
    except ValueError:
        radius = 1  # unreachable for m=1 with a nonzero coefficient
    ts = np.arange(-radius, radius + 1)
    grid = np.ones((width, ts.size))
    for coeff, s in active:
        idx = xs[:, None] + coeff * ts[None, :]
        glo, ghi = int(idx.min()), int(idx.max())
        dense = s.array(glo, ghi)
        grid *= dense[idx - glo]
    csum = np.cumsum(grid, axis=1)
    center = radius
    best = np.zeros(width)
    best_n = np.ones(width, dtype=np.int64)
    for N in range(1, radius + 1):
        upper = csum[:, center + N]
        lower = csum[:, center - N - 1] if center - N - 1 >= 0 else 0.0
        avg = (upper - lower) / (2 * N + 1)
        improve = avg > best
        best = np.where(improve, avg, best)
        best_n = np.where(improve, N, best_n)
    values = factor * best
    best_n = np.where(values == 0.0, 1, best_n)
    return values, best_n


def hl_maximal(signal: Signal, window: tuple[int, int]) -> Signal:
    """Discrete Hardy-Littlewood maximal function: sup_N centered averages of |f|."""
    return maximal_operator(AveragingMatrix.from_lists([[1]]), [signal], window)


def hl_maximal_at(signal: Signal, x: int) -> float:
    return maximal_at(AveragingMatrix.from_lists([[1]]), [signal], x)[0]


def holder_baseline(
    a: AveragingMatrix,
    signals: Sequence[Signal],
    exponents: ExponentTuple,
    x: int,
) -> float:
    """Pointwise product majorant prod_i (M |f_i|^(p_i/q'))^(q'/p_i) at x,
    where 1/q' is the sum of the reciprocal exponents.

    Needs every p_i finite and 1 < q < infinity, i.e. all reciprocals
    positive with sum strictly between 0 and 1.
    """
    if len(exponents) != a.rows:
        raise ValueError("exponent tuple does not match the matrix")
    dual = exponents.dual
    if not (0 < dual < 1) or any(r == 0 for r in exponents.reciprocals):
        raise ValueError(
            "majorant requires finite exponents with reciprocal sum in (0, 1)"
        )
    result = 1.0
    for s, rec in zip(signals, exponents.reciprocals):
        inner = float(dual / rec)  # p_i / q'
        powered = Signal(s.support_start, tuple(abs(v) ** inner for v in s.values))
        result *= hl_maximal_at(powered, x) ** (float(rec / dual))
    return result


def reachable_window(a: AveragingMatrix, signals: Sequence[Signal]) -> tuple[int, int]:
    """Integer window outside which the maximal operator vanishes.

    Joint constraint propagation over (x, n): a nonzero term needs
    x + A_i . n inside the i-th support for every row.
    """
    rows = _integer_rows(a)
    m = a.cols
    joint_rows = [[1] + row for row in rows]
    lows = [float(s.support_start) for s in signals]
    highs = [float(s.support_end) for s in signals]
    # Row differences cancel x and let interval propagation pin down n.
    for i in range(len(rows)):
        for k in range(i + 1, len(rows)):
            diff = [ri - rk for ri, rk in zip(rows[i], rows[k])]
            if any(diff):
                joint_rows.append([0] + diff)
                lows.append(lows[i] - highs[k])
                highs.append(highs[i] - lows[k])
    bounds = _propagate_bounds(joint_rows, lows, highs, m + 1)
    if bounds is None:
        return 0, 0
    x_lo, x_hi = bounds[0]
    if x_lo == -_INF or x_hi == _INF:
        raise ValueError("maximal operator support is unbounded for this matrix")
    return int(x_lo), int(x_hi)


def operator_ratio(
    a: AveragingMatrix,
    signals: Sequence[Signal],
    exponents: ExponentTuple,
) -> float:
    """||T* f||_{q'} / prod ||f_i||_{p_i} over the reachable window."""
    denom = 1.0
    for s, rec in zip(signals, exponents.reciprocals):
        p = math.inf if rec == 0 else 1 / float(rec)
        norm = lp_norm(s, p)
        if norm == 0.0:
            return 0.0
        denom *= norm
    lo, hi = reachable_window(a, signals)
    if hi < lo:
        return 0.0
    out = maximal_operator(a, signals, (lo, hi))
    dual = exponents.dual
    q = math.inf if dual == 0 else 1 / float(dual)
    return lp_norm(out, q) / denom


def transference_check(
    a: AveragingMatrix,
    signals: Sequence[Signal],
    system_size: int,
    exponents: Optional[ExponentTuple] = None,
    L: Optional[int] = None,
) -> dict:
    """Compare the cyclic-system maximal mass with its integer-line majorant.

    The signals are periodized onto Z/NZ; the system functions are then
    unrolled back onto the window |l| <= (M+1)L, where M bounds the row sums
    of |A|.  For |l| <= L and box radius N' <= L the cyclic average at step l
    equals the integer-line average of the unrolled functions at l, so the
    truncated cyclic maximal mass is dominated, with constant one, by the
    integer-line maximal mass.  Both sides are reported, along with
    window-normalized ratio forms whose value is exactly 1 on constants.
    """
    rows = _integer_rows(a)
    if len(signals) != a.rows:
        raise ValueError(f"expected {a.rows} signals, got {len(signals)}")
    n_sys = int(system_size)
    if n_sys < 1:
        raise ValueError("system size must be >= 1")
    if exponents is None:
        exponents = ExponentTuple.from_values(["1/2"] * a.rows)
    if len(exponents) != a.rows:
        raise ValueError("exponent tuple does not match the matrix")
    big_m = max(sum(abs(e) for e in row) for row in rows)
    if L is None:
        L = n_sys
    L = int(L)

    periodized = []
    for s in signals:
        vals = [0.0] * n_sys
        for t in range(s.support_start, s.support_end + 1):
            vals[t % n_sys] += s(t)
        periodized.append(vals)

    half = (big_m + 1) * L
    unrolled = [
        Signal(-half, tuple(vals[l % n_sys] for l in range(-half, half + 1)))
        for vals in periodized
    ]

    # Truncated cyclic maximal operator at every orbit point.
    m = a.cols
    if m == 1:
        coeffs = [row[0] for row in rows]
        ys = np.arange(n_sys)
        ts = np.arange(-L, L + 1)
        grid = np.ones((n_sys, ts.size))
        for c, vals in zip(coeffs, periodized):
            dense = np.abs(np.asarray(vals))
            grid *= dense[(ys[:, None] + c * ts[None, :]) % n_sys]
        csum = np.cumsum(grid, axis=1)
        best = np.zeros(n_sys)
        for N in range(1, L + 1):
            upper = csum[:, L + N]
            lower = csum[:, L - N - 1] if L - N - 1 >= 0 else 0.0
            np.maximum(best, (upper - lower) / (2 * N + 1), out=best)
        cyc_max = best.tolist()
    else:
        cyc_max = [0.0] * n_sys
        for point in range(n_sys):
            best = 0.0
            for N in range(1, L + 1):
                total = math.fsum(
                    math.prod(
                        abs(vals[(point + sum(r * t for r, t in zip(row, combo))) % n_sys])
                        for row, vals in zip(rows, periodized)
                    )
                    for combo in _box_points(m, N)
                )
                best = max(best, total / (2 * N + 1) ** m)
            cyc_max[point] = best

    dual = exponents.dual
    q = math.inf if dual == 0 else 1 / float(dual)

    line_lo, line_hi = -half - big_m * half, half + big_m * half
    line_max = maximal_operator(a, unrolled, (line_lo, line_hi))
    if q == math.inf:
        left_sum = max(cyc_max)
        right_sum = max(line_max.values)
    else:
        left_sum = math.fsum(cyc_max[l % n_sys] ** q for l in range(-L, L + 1))
        right_sum = math.fsum(v**q for v in line_max.values)

    # System-side ratio in probability-normalized norms (exactly 1 on
    # constants); line-side ratio in plain counting norms.  The scaling
    # relation 1/q = sum(1/p_i) makes both dimensionless, so they agree in
    # the large-system limit on a fixed signal.
    def _mean_norm(vals: Sequence[float], p: float) -> float:
        if p == math.inf:
            return max(abs(v) for v in vals)
        return (math.fsum(abs(v) ** p for v in vals) / len(vals)) ** (1 / p)

    ps = [math.inf if r == 0 else 1 / float(r) for r in exponents.reciprocals]
    sys_denom = 1.0
    for vals, p in zip(periodized, ps):
        sys_denom *= _mean_norm(vals, p)
    finitary_ratio = 0.0
    if sys_denom > 0:
        finitary_ratio = _mean_norm(cyc_max, q) / sys_denom
    line_denom = 1.0
    for s, p in zip(unrolled, ps):
        line_denom *= lp_norm(s, p)
    integer_ratio = 0.0
    if line_denom > 0:
        integer_ratio = lp_norm(line_max, q) / line_denom

    return {
        "system_size": n_sys,
        "window_L": L,
        "row_sum_bound": big_m,
        "left_sum": left_sum,
        "right_sum": right_sum,
        "finitary_ratio": finitary_ratio,
        "integer_ratio": integer_ratio,
        "holds": left_sum <= right_sum * (1 + 1e-12) + 1e-15,
    }


def _box_points(m: int, N: int):
    if m == 1:
        for t in range(-N, N + 1):
            yield (t,)
        return
    for rest in _box_points(m - 1, N):
        for t in range(-N, N + 1):
            yield (t,) + rest
