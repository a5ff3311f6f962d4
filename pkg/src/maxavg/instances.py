"""Seeded instance families: forests, coefficient sets, packet-scale trees.

Two disjointness mechanisms are mixed when building forests: trees in
different frequency bands (centers too far apart for any cross-tree
frequency nesting) and trees in one band with interior-disjoint time
intervals.  Both make strong disjointness hold by construction; the forest
constructor re-verifies it.

Packet-scale instances keep all scale gaps small (adjacent powers of two)
so that sampled wave packets are numerically meaningful; the synthetic
coefficient instances instead use the full rank-one geometry with its
2^C1 scale gaps.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

import numpy as np

from .dyadic import DyadicInterval
from .forests import Forest, LacunaryTree
from .packets import Grid, SampledFunction, default_bump, grid_for_tiles
from .tiles import Multitile, RankOneParams, Tile
from .trees import MultitileTree, TileCollection


def lacunary_tree(
    rng: np.random.Generator,
    scale_exp: int,
    position: int,
    center: Fraction,
    depth: int,
    c0: int = 8,
    tiles_per_scale: int = 2,
) -> LacunaryTree:
    """One tree: time interval of length 2^scale_exp at the given position,
    tiles on `depth` scales below it, frequencies 2*C0 units off the center
    (randomly above or below per scale)."""
    time_interval = DyadicInterval(0, -scale_exp, position)
    tiles = []
    for e in range(scale_exp - depth, scale_exp + 1):
        # time length 2^e (dyadic index -e), frequency length 2^-e (index e)
        freq_len = Fraction(1, 2**e) if e >= 0 else Fraction(2**-e)
        base = math.floor(center / freq_len)
        sign = 1 if rng.random() < 0.5 else -1
        l = base + 2 * c0 if sign > 0 else base - 2 * c0
        freq = DyadicInterval(0, e, l)
        n_positions = 2 ** (scale_exp - e)
        count = min(tiles_per_scale, n_positions)
        chosen = rng.choice(n_positions, size=count, replace=False)
        for offset in sorted(int(v) for v in chosen):
            t_pos = position * n_positions + offset
            tiles.append(Tile(DyadicInterval(0, -e, t_pos), freq))
    return LacunaryTree(tuple(tiles), time_interval, center, c0)


def random_forest(
    seed: int,
    n_bands: int = 3,
    trees_per_band: int = 3,
    c0: int = 8,
    depth: int = 2,
    scale_exp: int = 3,
) -> Forest:
    """Forest mixing frequency-band separation with in-band time disjointness."""
    rng = np.random.default_rng(seed)
    trees = []
    band_gap = 8 * c0 + 16
    for band in range(n_bands):
        center = Fraction(band * band_gap) + Fraction(1, 2)
        positions = rng.choice(64, size=trees_per_band, replace=False)
        for pos in sorted(int(p) for p in positions):
            depth_here = int(rng.integers(1, depth + 1))
            trees.append(
                lacunary_tree(rng, scale_exp, pos, center, depth_here, c0=c0)
            )
    return Forest(tuple(trees))


def nested_forest(c0: int = 8) -> Forest:
    """Four trees with nested time intervals, one frequency band per tree so
    no cross-tree nesting interferes: a fixture for heavy-interval tests."""
    rng = np.random.default_rng(0)
    band_gap = 8 * c0 + 16
    trees = []
    for band, (scale_exp, position) in enumerate(((4, 0), (3, 0), (2, 0), (2, 1))):
        center = Fraction(band * band_gap) + Fraction(1, 2)
        trees.append(lacunary_tree(rng, scale_exp, position, center, 1, c0=c0))
    return Forest(tuple(trees))


def random_coefficients(
    forest: Forest, seed: int, scale: float = 1.0
) -> dict[Tile, complex]:
    rng = np.random.default_rng(seed)
    out = {}
    for tile in forest.all_tiles():
        out[tile] = scale * rng.standard_normal()
    return out


def packet_forest(
    seed: int, n_bands: int = 2, trees_per_band: int = 2, c0: int = 8
) -> tuple[Forest, Grid]:
    """A small forest whose tiles admit honest sampled packets: few scales,
    positions within a short window."""
    rng = np.random.default_rng(seed)
    trees = []
    band_gap = 8 * c0 + 16
    for band in range(n_bands):
        center = Fraction(band * band_gap) + Fraction(1, 2)
        positions = rng.choice(6, size=trees_per_band, replace=False)
        for pos in sorted(int(p) for p in positions):
            trees.append(lacunary_tree(rng, 2, pos, center, 2, c0=c0, tiles_per_scale=2))
    forest = Forest(tuple(trees))
    grid = grid_for_tiles(forest.all_tiles(), pad=12)
    return forest, grid


def adjacent_scale_tree(
    seed: int, n: int = 3, depth: int = 3, c0: int = 8
) -> tuple[TileCollection, MultitileTree]:
    """A multitile tree at adjacent scales for packet-based checks.

    Tile order only requires nested times with reversed 3-dilated frequency
    nesting, which adjacent scales satisfy; the rank-one scale gaps are not
    needed for the single-tree inequality, whose proof is label-combinatorial.
    """
    rng = np.random.default_rng(seed)
    pairs = tuple(
        tuple((q, 1 if (q + i) % 2 else -1) for q in range(n) if q != i)[:2]
        for i in range(n)
    )
    params = RankOneParams(n=n, C0=c0, C1=c0 + 10, lacunary_pair=pairs)
    top_freqs = [int(rng.integers(0, 3)) for _ in range(n)]
    top = Multitile(
        tuple(
            Tile(DyadicInterval(0, 0, 0), DyadicInterval(0, 0, top_freqs[q]))
            for q in range(n)
        )
    )
    members = [top]
    for s in range(1, depth + 1):
        # time inside the top; frequency the scale-(-s) interval containing
        # the top's, so the 3-dilates nest the right way round
        n_positions = 2**s
        for pos in {int(rng.integers(0, n_positions)), 0}:
            tiles = tuple(
                Tile(DyadicInterval(0, s, pos), DyadicInterval(0, -s, top_freqs[q] >> s))
                for q in range(n)
            )
            members.append(Multitile(tiles))
    unique = tuple(dict.fromkeys(members))
    collection = TileCollection(unique, params)
    member_indices = tuple(range(len(unique)))
    top_index = collection.index[top]
    return collection, MultitileTree(collection, member_indices, top_index, 0)


def band_limited_function(
    grid: Grid, seed: int, freq_lo: float, freq_hi: float
) -> SampledFunction:
    """Gaussian noise band-filtered to [freq_lo, freq_hi], smoothly confined
    to the middle of the window.  The spectrum fills the whole band, so any
    packet with frequency support inside it sees an order-one coefficient."""
    rng = np.random.default_rng(seed)
    xs = grid.points()
    noise = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
    spectrum = np.fft.fft(noise)
    freqs = np.fft.fftfreq(grid.size, d=float(grid.spacing))
    spectrum[(freqs < freq_lo) | (freqs > freq_hi)] = 0.0
    band = np.fft.ifft(spectrum)
    lo, hi = xs[0], xs[-1]
    mid, width = (lo + hi) / 2, (hi - lo) / 2
    envelope = np.exp(-(((xs - mid) / (0.4 * width)) ** 4))
    return SampledFunction(grid, band * envelope)
