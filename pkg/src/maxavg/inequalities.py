"""Empirical inequality checks: partial-sum maxima, projection maximal
functions, Bessel ratios for forest packets, and the size estimate.

These are measurement harnesses: each returns the exact quantities entering
an inequality whose constant is calibrated once on a seeded family and then
frozen as a fixture.  Nothing here asserts a bound by itself.
"""

from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence

import numpy as np

from .dyadic import DyadicInterval, parent
from .forests import Forest
from .packets import BaseBump, Grid, SampledFunction, default_bump, packet_for_tile
from .tiles import Tile
from .trees import TileCollection


def rm_maximal(
    vectors: Sequence[np.ndarray],
    weight: float = 1.0,
    n_random_signs: int = 64,
    seed: int = 0,
) -> dict:
    """Maximal partial-sum norm against sign-pattern norms.

    Returns ||sup_(L' <= L) |sum_(l <= L') f_l|||_2, the max over sampled
    sign patterns of ||sum eps_l f_l||_2 (the almost-orthogonality constant
    B), and the per-level dyadic block masses sum_blocks ||f_block||_2^2
    whose maximum over levels lower-bounds B^2.
    """
    mats = np.asarray([np.asarray(v, dtype=complex) for v in vectors])
    L = mats.shape[0]
    running = np.cumsum(mats, axis=0)
    sup = np.max(np.abs(running), axis=0)
    sup_norm = math.sqrt(weight * float(np.sum(sup**2)))

    rng = np.random.default_rng(seed)
    sign_norms = []
    patterns = [np.ones(L)]
    if L > 1:
        patterns.append(np.array([(-1.0) ** l for l in range(L)]))
    for _ in range(n_random_signs):
        patterns.append(rng.choice((-1.0, 1.0), size=L))
    for eps in patterns:
        combo = eps[:, None] * mats if mats.ndim == 2 else eps * mats
        norm = math.sqrt(weight * float(np.sum(np.abs(np.sum(combo, axis=0)) ** 2)))
        sign_norms.append(norm)
    b_emp = max(sign_norms)

    block_masses = []
    level = 0
    while 2**level <= L:
        width = 2**level
        total = 0.0
        for start in range(0, L, width):
            block = np.sum(mats[start : start + width], axis=0)
            total += weight * float(np.sum(np.abs(block) ** 2))
        block_masses.append(total)
        level += 1
    return {
        "L": L,
        "sup_norm": sup_norm,
        "sign_norms": sign_norms,
        "B": b_emp,
        "block_masses": block_masses,
        "log_factor": math.log(2 + L),
    }


def projection_maximal_check(
    values: np.ndarray,
    centers: Sequence[int],
    scales: Sequence[int],
    c0: int = 8,
) -> dict:
    """||sup_k |Pi_k f|||_2 / ||f||_2 for sharp Fourier projections onto
    unions of intervals of radius c0 * 2^(-k) * n bins about the centers.

    Input samples are treated as one period; centers are DFT bin indices,
    scales the exponents k (larger k, narrower projection).
    """
    f = np.asarray(values, dtype=complex)
    n = f.size
    spectrum = np.fft.fft(f)
    bins = np.fft.fftfreq(n, d=1.0 / n)  # integer bin labels
    sup = np.zeros(n)
    for k in scales:
        radius = c0 * 2.0 ** (-k) * n / 64.0
        mask = np.zeros(n, dtype=bool)
        for xi in centers:
            dist = np.abs((bins - xi + n / 2) % n - n / 2)
            mask |= dist <= radius
        piece = np.fft.ifft(np.where(mask, spectrum, 0.0))
        np.maximum(sup, np.abs(piece), out=sup)
    denom = math.sqrt(float(np.sum(np.abs(f) ** 2)))
    if denom == 0.0:
        return {"ratio": 0.0, "J": len(centers), "log_factor": math.log(2 + len(centers)) ** 2}
    ratio = math.sqrt(float(np.sum(sup**2))) / denom
    return {
        "ratio": ratio,
        "J": len(centers),
        "log_factor": math.log(2 + len(centers)) ** 2,
    }


def bessel_ratios(
    tiles: Sequence[Tile],
    grid: Grid,
    coefficients: Optional[Mapping[Tile, complex]] = None,
    function: Optional[SampledFunction] = None,
    bump: Optional[BaseBump] = None,
) -> dict:
    """Synthesis and analysis Bessel ratios for the packet family of a tile set.

    synthesis = ||sum a_P psi_P||_2^2 / sum |a_P|^2   (needs coefficients)
    analysis  = sum |<f, psi_P>|^2 / ||f||_2^2        (needs the function)
    """
    bump = bump if bump is not None else default_bump()
    packets = [packet_for_tile(t, grid, bump) for t in tiles]
    out: dict = {"count": len(tiles)}
    if coefficients is not None:
        total = np.zeros(grid.size, dtype=complex)
        mass = 0.0
        for tile, packet in zip(tiles, packets):
            a = complex(coefficients.get(tile, 0.0))
            total += a * packet.values
            mass += abs(a) ** 2
        synth = SampledFunction(grid, total)
        out["synthesis"] = synth.norm2() ** 2 / mass if mass > 0 else 0.0
    if function is not None:
        denom = function.norm2() ** 2
        total = math.fsum(abs(function.inner(p)) ** 2 for p in packets)
        out["analysis"] = total / denom if denom > 0 else 0.0
    return out


def frame_top_eigenvalue(
    tiles: Sequence[Tile],
    grid: Grid,
    bump: Optional[BaseBump] = None,
    iterations: int = 60,
    seed: int = 0,
) -> tuple[float, float]:
    """Largest eigenvalue of the frame operator, twice.

    First by power iteration on the packet Gram matrix (the synthesis side),
    then by power iteration applying analysis-then-synthesis to a sampled
    function; self-adjointness makes the two agree.
    """
    bump = bump if bump is not None else default_bump()
    packets = [packet_for_tile(t, grid, bump) for t in tiles]
    n = len(packets)
    gram = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            gram[i, j] = packets[j].inner(packets[i])
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    for _ in range(iterations):
        v = gram @ v
        v /= np.linalg.norm(v)
    lam_gram = float(np.real(np.vdot(v, gram @ v)))

    h = float(grid.spacing)
    f = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
    fn = SampledFunction(grid, f)
    lam_frame = 0.0
    for _ in range(iterations):
        coeffs = [fn.inner(p) for p in packets]
        total = np.zeros(grid.size, dtype=complex)
        for c, p in zip(coeffs, packets):
            total += c * p.values
        new = SampledFunction(grid, total)
        norm = new.norm2()
        if norm == 0.0:
            break
        lam_frame = math.fsum(abs(c) ** 2 for c in coeffs) / fn.norm2() ** 2
        fn = new.scaled(1.0 / norm)
    return lam_gram, lam_frame


def _decay_antiderivative(u: float, half_power: int) -> float:
    """Antiderivative of (1 + u^2)^(-k) at u, k = half_power >= 1."""
    value = math.atan(u)
    for k in range(1, half_power):
        value = u / (2 * k * (1 + u * u) ** k) + (2 * k - 1) / (2 * k) * value
    return value


def weight_integral(
    interval_lo: float, interval_hi: float, center: float, length: float, decay: int
) -> float:
    """integral over [lo, hi] of (1 + ((x - c)/|I|)^2)^(-decay/2) dx."""
    if decay < 2 or decay % 2:
        raise ValueError("decay exponent must be a positive even integer")
    k = decay // 2
    u_lo = (interval_lo - center) / length
    u_hi = (interval_hi - center) / length
    return length * (
        _decay_antiderivative(u_hi, k) - _decay_antiderivative(u_lo, k)
    )


def time_convexification(collection: TileCollection) -> list[DyadicInterval]:
    """Dyadic intervals between two member time intervals: I_s <= I <= I_s'."""
    times = sorted({mt.time for mt in collection.multitiles})
    coarsest = min(t.i for t in times)
    out = set()
    for t in times:
        node = t
        while True:
            if any(big.contains(node) for big in times if big.i <= node.i):
                out.add(node)
            if node.i <= coarsest:
                break
            node = parent(node)
    return sorted(out)


def size_estimate_check(
    collection: TileCollection,
    j: int,
    sets: Sequence[tuple[float, float]],
    grid: Grid,
    bump: Optional[BaseBump] = None,
    decay: int = 4,
    seed: int = 0,
) -> dict:
    """Size of the collection against the localized mass of the test set.

    The test function is |E|^(-1/2) times the indicator of E (a finite union
    of intervals), the admitted shape for the estimate.  Returns
    lhs = size_j and rhs = |E|^(1/2) * sup over the time convexification of
    |I|^(-1) * integral over E of the decay weight of I.
    """
    from .trees import size as collection_size

    bump = bump if bump is not None else default_bump()
    measure = math.fsum(hi - lo for lo, hi in sets)
    if measure <= 0:
        raise ValueError("the test set must have positive measure")
    xs = grid.points()
    indic = np.zeros(grid.size, dtype=complex)
    for lo, hi in sets:
        indic[(xs >= lo) & (xs < hi)] = measure**-0.5
    f = SampledFunction(grid, indic)

    class _OneComponent:
        def __init__(self):
            self._cache: dict[int, np.ndarray] = {}

        def array(self, comp: int) -> np.ndarray:
            if comp != j:
                return np.zeros(len(collection), dtype=complex)
            if comp not in self._cache:
                vals = np.zeros(len(collection), dtype=complex)
                for idx, mt in enumerate(collection.multitiles):
                    vals[idx] = f.inner(packet_for_tile(mt.tiles[j], grid, bump))
                self._cache[comp] = vals
            return self._cache[comp]

    lhs = collection_size(collection, j, _OneComponent())
    best = 0.0
    for interval in time_convexification(collection):
        c = float(interval.center)
        ln = float(interval.length)
        total = math.fsum(
            weight_integral(lo, hi, c, ln, decay) for lo, hi in sets
        )
        best = max(best, total / ln)
    rhs = measure**0.5 * best
    return {"lhs": lhs, "rhs": rhs, "measure": measure}
