"""Sampled wave packets adapted to tiles.

The base window has a closed-form compactly supported Fourier transform (a
smooth bump on [1/10, 9/10], unit L2 norm), evaluated in time by trapezoid
quadrature of the inverse Fourier integral; the quadrature converges faster
than any power because the integrand is smooth and vanishes to all orders at
the endpoints.  A packet for a tile I x w is

    psi(x) = |I|^(-1/2) * bump((x - c(I)) / |I|) * exp(2 pi i w_lo x)

whose Fourier transform is supported exactly on the middle 8/10 of w, and
whose L2 norm equals the bump's.  Sampled functions share a uniform grid;
inner products are h-weighted dot products, which are alias-free for
products of band-limited factors once the spacing resolves their joint
spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .dyadic import DyadicInterval
from .tiles import Tile

BUMP_VERSION = "bump-v1"
BUMP_SUPPORT = (Fraction(1, 10), Fraction(9, 10))
BUMP_QUAD_NODES = 384
_TIME_CHUNK = 4096


class BaseBump:
    """Unit-L2 window with Fourier support in [1/10, 9/10]."""

    def __init__(self, nodes: int = BUMP_QUAD_NODES):
        self.nodes = nodes
        lo, hi = float(BUMP_SUPPORT[0]), float(BUMP_SUPPORT[1])
        xi = np.linspace(lo, hi, nodes + 1)
        self.xi = xi
        self.dxi = (hi - lo) / nodes
        raw = self._raw(xi)
        self._norm = math.sqrt(np.trapezoid(raw**2, dx=self.dxi))
        self.profile = raw / self._norm
        self._tables: dict[tuple[Fraction, float], np.ndarray] = {}

    @staticmethod
    def _raw(xi: np.ndarray) -> np.ndarray:
        lo, hi = float(BUMP_SUPPORT[0]), float(BUMP_SUPPORT[1])
        out = np.zeros_like(xi, dtype=float)
        interior = (xi > lo) & (xi < hi)
        u = (xi[interior] - (lo + hi) / 2) / ((hi - lo) / 2)
        out[interior] = np.exp(-1.0 / (1.0 - u * u))
        return out

    def freq(self, xi: np.ndarray) -> np.ndarray:
        return self._raw(np.asarray(xi, dtype=float)) / self._norm

    def time(self, x: np.ndarray) -> np.ndarray:
        """Inverse Fourier integral of the window at the given points.

        Chunked so the quadrature phase matrix stays small.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.size, dtype=complex)
        for start in range(0, x.size, _TIME_CHUNK):
            block = x[start : start + _TIME_CHUNK]
            phase = np.exp(2j * math.pi * np.outer(block, self.xi))
            out[start : start + _TIME_CHUNK] = phase @ self.profile * self.dxi
        return out

    def lattice_table(self, step: Fraction, radius: float) -> np.ndarray:
        """Cached envelope values on the lattice n * step, n = 0..radius/step.

        Negative arguments follow from conjugation (the frequency profile is
        real), so only the nonnegative half is stored.
        """
        key = (Fraction(step), float(radius))
        table = self._tables.get(key)
        if table is None:
            count = int(math.ceil(radius / float(step))) + 1
            table = self.time(float(step) * np.arange(count))
            self._tables[key] = table
        return table

    def l2_norm(self) -> float:
        return math.sqrt(np.trapezoid(self.profile**2, dx=self.dxi))


_default_bump: Optional[BaseBump] = None


def default_bump() -> BaseBump:
    global _default_bump
    if _default_bump is None:
        _default_bump = BaseBump()
    return _default_bump


@dataclass(frozen=True)
class Grid:
    """Uniform sample points k * spacing for k in [k_lo, k_hi)."""

    spacing: Fraction
    k_lo: int
    k_hi: int

    def __post_init__(self):
        if self.k_hi <= self.k_lo:
            raise ValueError("empty grid")

    @property
    def size(self) -> int:
        return self.k_hi - self.k_lo

    def points(self) -> np.ndarray:
        h = float(self.spacing)
        return h * np.arange(self.k_lo, self.k_hi)

    @classmethod
    def for_window(cls, spacing: Fraction, lo, hi) -> "Grid":
        spacing = Fraction(spacing)
        k_lo = math.floor(Fraction(lo) / spacing)
        k_hi = math.ceil(Fraction(hi) / spacing) + 1
        return cls(spacing, k_lo, k_hi)


def grid_for_tiles(tiles: Sequence[Tile], pad: int = 10, refine: int = 6) -> Grid:
    """Shared grid for a tile family.

    The spacing is a power of two fine enough to (a) put `2^refine` samples
    on the shortest time interval and (b) oversample the highest frequency
    in play by a factor of at least four, so products of packet spectra stay
    below the Nyquist limit and sampled inner products are alias-free.  The
    window covers every tile's pad-fold time neighborhood.
    """
    if not tiles:
        raise ValueError("no tiles")
    finest = max(t.time.i for t in tiles)  # largest dyadic index = shortest time
    k = finest + refine
    max_freq = max(max(abs(t.freq.lo), abs(t.freq.hi)) for t in tiles)
    while Fraction(2) ** k < 8 * max_freq:
        k += 1
    spacing = Fraction(1, 2**k) if k >= 0 else Fraction(2**-k)
    lo = min(t.time.center - pad * t.time.length for t in tiles)
    hi = max(t.time.center + pad * t.time.length for t in tiles)
    return Grid.for_window(spacing, lo, hi)


@dataclass
class SampledFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.size,):
            raise ValueError("value array does not match the grid")

    def inner(self, other: "SampledFunction") -> complex:
        """h * sum f conj(g) over the overlap of the two windows."""
        if self.grid.spacing != other.grid.spacing:
            raise ValueError("grids must share a spacing")
        lo = max(self.grid.k_lo, other.grid.k_lo)
        hi = min(self.grid.k_hi, other.grid.k_hi)
        if hi <= lo:
            return 0.0
        a = self.values[lo - self.grid.k_lo : hi - self.grid.k_lo]
        b = other.values[lo - other.grid.k_lo : hi - other.grid.k_lo]
        return complex(float(self.grid.spacing) * np.vdot(b, a))

    def norm2(self) -> float:
        return math.sqrt(
            float(self.grid.spacing) * float(np.sum(np.abs(self.values) ** 2))
        )

    def scaled(self, c: complex) -> "SampledFunction":
        return SampledFunction(self.grid, c * self.values)

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        if self.grid != other.grid:
            raise ValueError("grids must match for addition")
        return SampledFunction(self.grid, self.values + other.values)


def zeros(grid: Grid) -> SampledFunction:
    return SampledFunction(grid, np.zeros(grid.size, dtype=complex))


def gabor_packet(
    bump: BaseBump, i: int, m: int, l, grid: Grid, support_radius: float = 40.0
) -> SampledFunction:
    """Samples of 2^(-i/2) * bump(2^-i x - m) * exp(2 pi sqrt(-1) 2^-i x l).

    Values are evaluated only where |2^-i x - m| <= support_radius; the
    window decay makes the truncated tail spectrally negligible.
    """
    scale = 2.0**i
    xs = grid.points()
    u = xs / scale - m
    mask = np.abs(u) <= support_radius
    out = np.zeros(grid.size, dtype=complex)
    if mask.any():
        envelope = bump.time(u[mask])
        phase = np.exp(2j * math.pi * (xs[mask] / scale) * float(l))
        out[mask] = scale**-0.5 * envelope * phase
    return SampledFunction(grid, out)


def packet_for_tile(
    tile: Tile, grid: Grid, bump: Optional[BaseBump] = None, support_radius: float = 24.0
) -> SampledFunction:
    """Wave packet adapted to the tile: Fourier support exactly the middle
    8/10 of the frequency interval, L2 norm that of the base window.

    Envelope samples land on the lattice (h/|I|) * Z because tile centers
    are multiples of the grid spacing, so one cached table per scale serves
    every tile of that scale.
    """
    bump = bump if bump is not None else default_bump()
    length = tile.time.length
    delta = grid.spacing / length
    center_k = tile.time.center / grid.spacing
    if center_k.denominator != 1:
        raise ValueError("grid spacing must divide the tile time center")
    center_k = int(center_k)
    table = bump.lattice_table(delta, support_radius)
    reach = table.size - 1
    k_lo = max(grid.k_lo, center_k - reach)
    k_hi = min(grid.k_hi, center_k + reach + 1)
    out = np.zeros(grid.size, dtype=complex)
    if k_hi > k_lo:
        n = np.arange(k_lo, k_hi) - center_k
        envelope = np.where(n >= 0, table[np.abs(n)], np.conjugate(table[np.abs(n)]))
        xs = float(grid.spacing) * np.arange(k_lo, k_hi)
        phase = np.exp(2j * math.pi * float(tile.freq.lo) * xs)
        out[k_lo - grid.k_lo : k_hi - grid.k_lo] = (
            float(length) ** -0.5 * envelope * phase
        )
    return SampledFunction(grid, out)


@dataclass(frozen=True)
class CutoffFunction:
    """Piecewise-constant integer-valued scale cutoff k(x).

    Cells (lo, hi, value) must cover the window of interest; points outside
    every cell get the fill value.
    """

    cells: tuple[tuple[Fraction, Fraction, int], ...]
    fill: int = -(10**9)

    def sample(self, grid: Grid) -> np.ndarray:
        xs = grid.points()
        out = np.full(grid.size, self.fill, dtype=np.int64)
        for lo, hi, value in self.cells:
            mask = (xs >= float(lo)) & (xs < float(hi))
            out[mask] = value
        return out

    @classmethod
    def constant(cls, value: int) -> "CutoffFunction":
        inf = Fraction(10**12)
        return cls(cells=((-inf, inf, value),))


def modified_packet(
    packet: SampledFunction, tile: Tile, cutoff: CutoffFunction
) -> SampledFunction:
    """Multiply pointwise by the indicator of |I_tile| > 2^k(x)."""
    scale_exp = -tile.time.i  # |I| = 2^scale_exp
    ks = cutoff.sample(packet.grid)
    mask = scale_exp > ks
    return SampledFunction(packet.grid, packet.values * mask)
