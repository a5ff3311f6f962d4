"""Tiles, multitiles, tile order, and the rank-one geometry.

A tile is a time x frequency rectangle of area exactly one, with a grid-0
time interval.  A multitile is an n-tuple of tiles sharing one time
interval.  The rank-one condition ties the n frequency components of a
collection together: equal frequencies propagate across components, nearby
frequencies at one component force nearby frequencies everywhere, and two
designated components per index depend on the scale in a lacunary,
sign-coherent way.  The two-sided comparability hidden in that condition is
fixed here as the explicit band  [C0/4, 4*C0]  (times the finer tile's
frequency length), recorded on every generated instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .dyadic import DyadicInterval

COMPARABILITY_LO = Fraction(1, 4)
COMPARABILITY_HI = Fraction(4)


@dataclass(frozen=True, order=True)
class Tile:
    time: DyadicInterval
    freq: DyadicInterval

    def __post_init__(self):
        if self.time.d != 0:
            raise ValueError("tile time intervals live in the standard grid")
        if self.time.length * self.freq.length != 1:
            raise ValueError(
                f"tile must have unit area: |I| = {self.time.length}, "
                f"|w| = {self.freq.length}"
            )

    def to_json(self) -> dict:
        return {"time": self.time.to_json(), "freq": self.freq.to_json()}


def tile_lt(p: Tile, q: Tile) -> bool:
    """p < q: time interval strictly inside, 3-dilated frequency strictly outside."""
    if not (q.time.contains(p.time) and p.time != q.time):
        return False
    p_lo, p_hi = p.freq.dilate(Fraction(3))
    q_lo, q_hi = q.freq.dilate(Fraction(3))
    return p_lo <= q_lo and q_hi <= p_hi and (p_lo, p_hi) != (q_lo, q_hi)


def tile_le(p: Tile, q: Tile) -> bool:
    return p == q or tile_lt(p, q)


@dataclass(frozen=True, order=True)
class Multitile:
    tiles: tuple[Tile, ...]

    def __post_init__(self):
        if not self.tiles:
            raise ValueError("multitile needs at least one component")
        t0 = self.tiles[0].time
        if any(t.time != t0 for t in self.tiles):
            raise ValueError("all component tiles must share the time interval")

    @property
    def n(self) -> int:
        return len(self.tiles)

    @property
    def time(self) -> DyadicInterval:
        return self.tiles[0].time

    def freq(self, j: int) -> DyadicInterval:
        return self.tiles[j].freq

    def to_json(self) -> dict:
        return {"tiles": [t.to_json() for t in self.tiles]}


@dataclass(frozen=True)
class RankOneParams:
    """Index maps and signs of the lacunary components.

    For each component j, lacunary_pair[j] = ((j1, eps1), (j2, eps2)) with
    j1, j2 distinct and different from j.  C0 scales the frequency offsets,
    C1 the scale gaps.
    """

    n: int
    C0: int
    C1: int
    lacunary_pair: tuple[tuple[tuple[int, int], tuple[int, int]], ...]

    def __post_init__(self):
        if self.C0 < 8:
            raise ValueError("C0 must be at least 8")
        if self.C1 <= self.C0:
            raise ValueError("C1 must exceed C0")
        if len(self.lacunary_pair) != self.n:
            raise ValueError("one lacunary pair per component required")
        for j, ((j1, e1), (j2, e2)) in enumerate(self.lacunary_pair):
            if j1 == j2 or j in (j1, j2):
                raise ValueError(f"lacunary indices for {j} must be distinct and != {j}")
            if e1 not in (-1, 1) or e2 not in (-1, 1):
                raise ValueError("signs must be +-1")

    def pair(self, j: int) -> tuple[tuple[int, int], tuple[int, int]]:
        return self.lacunary_pair[j]

    def separated_indices(self, i: int) -> tuple[tuple[int, int], ...]:
        """(j, eps) values for which an index-i tree is (j, eps)-separated."""
        return self.lacunary_pair[i]


def _freq_dist(a: DyadicInterval, b: DyadicInterval) -> Fraction:
    gap = max(b.lo - a.hi, a.lo - b.hi)
    return gap if gap > 0 else Fraction(0)


def _dilate_pair(iv: DyadicInterval, factor: int) -> tuple[Fraction, Fraction]:
    return iv.dilate(Fraction(factor))


def _dilates_overlap(a: DyadicInterval, b: DyadicInterval, factor: int) -> bool:
    a_lo, a_hi = _dilate_pair(a, factor)
    b_lo, b_hi = _dilate_pair(b, factor)
    return a_lo <= b_hi and b_lo <= a_hi


@dataclass(frozen=True)
class RankOneViolation:
    kind: str
    pair: tuple[Multitile, Multitile]
    component: int
    detail: str


def rank_one_check(
    collection: Sequence[Multitile], params: RankOneParams
) -> list[RankOneViolation]:
    """Definitional check of the four rank-one conditions on every pair.

    Returns one record per violated condition naming the pair, the
    component, and the witness quantity.
    """
    tiles = list(collection)
    out: list[RankOneViolation] = []
    n = params.n
    c0 = params.C0
    gap = Fraction(2**params.C1)
    lo_band = COMPARABILITY_LO * c0
    hi_band = COMPARABILITY_HI * c0
    dilate10: dict[DyadicInterval, tuple[Fraction, Fraction]] = {}
    for s in tiles:
        for j in range(s.n):
            w = s.freq(j)
            if w not in dilate10:
                dilate10[w] = w.dilate(Fraction(10))

    def overlap10(a: DyadicInterval, b: DyadicInterval) -> bool:
        a_lo, a_hi = dilate10[a]
        b_lo, b_hi = dilate10[b]
        return a_lo <= b_hi and b_lo <= a_hi

    for idx, s in enumerate(tiles):
        if s.n != n:
            raise ValueError("collection and params disagree on n")
        for t in tiles[idx + 1 :]:
            for j in range(n):
                wj_s, wj_t = s.freq(j), t.freq(j)
                if wj_s.length != wj_t.length:
                    big, small = max(wj_s.length, wj_t.length), min(
                        wj_s.length, wj_t.length
                    )
                    if big < gap * small:
                        out.append(
                            RankOneViolation(
                                "scale-separation",
                                (s, t),
                                j,
                                f"|w| ratio {big / small} < 2^C1",
                            )
                        )
                if wj_s == wj_t:
                    for jj in range(n):
                        if s.freq(jj) != t.freq(jj):
                            out.append(
                                RankOneViolation(
                                    "one-parameter",
                                    (s, t),
                                    jj,
                                    f"component {j} equal but {jj} differs",
                                )
                            )
                if overlap10(wj_s, wj_t):
                    coarse, fine = (s, t) if s.time.length >= t.time.length else (t, s)
                    unit = Fraction(1) / fine.time.length
                    for jj in range(n):
                        dist = _freq_dist(coarse.freq(jj), fine.freq(jj))
                        if dist > hi_band * unit:
                            out.append(
                                RankOneViolation(
                                    "nearby-frequencies",
                                    (s, t),
                                    jj,
                                    f"dist {dist} > 4*C0*{unit} at component {jj} "
                                    f"(trigger {j})",
                                )
                            )
                    if coarse.time.length > fine.time.length:
                        for jt, eps in params.pair(j):
                            w_coarse, w_fine = coarse.freq(jt), fine.freq(jt)
                            dist = _freq_dist(w_coarse, w_fine)
                            if not (lo_band * unit <= dist <= hi_band * unit):
                                out.append(
                                    RankOneViolation(
                                        "lacunarity-distance",
                                        (s, t),
                                        jt,
                                        f"dist {dist} outside [C0/4, 4*C0]*{unit} "
                                        f"(trigger {j})",
                                    )
                                )
                            c_lo, c_hi = dilate10[w_coarse]
                            f_lo, f_hi = dilate10[w_fine]
                            # eps * (xi_fine - xi_coarse) >= 0 for all choices
                            if eps == 1:
                                ok = f_lo >= c_hi
                            else:
                                ok = f_hi <= c_lo
                            if not ok:
                                out.append(
                                    RankOneViolation(
                                        "lacunarity-sign",
                                        (s, t),
                                        jt,
                                        f"sign {eps} inconsistent (trigger {j})",
                                    )
                                )
    return out


@dataclass(frozen=True)
class RankOneInstance:
    """A generated rank-one collection with its parameters and provenance."""

    multitiles: tuple[Multitile, ...]
    params: RankOneParams
    direction: tuple[Fraction, ...]
    offsets: tuple[int, ...]
    seed: int

    def to_json(self) -> dict:
        return {
            "n": self.params.n,
            "C0": self.params.C0,
            "C1": self.params.C1,
            "comparability": [str(COMPARABILITY_LO), str(COMPARABILITY_HI)],
            "direction": [str(c) for c in self.direction],
            "offsets": list(self.offsets),
            "seed": self.seed,
            "multitiles": [m.to_json() for m in self.multitiles],
        }


def _validate_generator_params(
    direction: Sequence[Fraction], offsets: Sequence[int], c0: int
) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Derive the lacunary pairs and check the offset geometry.

    Writing D[q, j] = a_q - (c_q / c_j) a_j for the cross-component offset
    seen from a trigger at component j, every (q, j) must keep
    |D| +- slack inside [C0/4, 4*C0], where the slack covers the trigger
    window (10-dilates) and integer rounding.
    """
    n = len(direction)
    c = [Fraction(v) for v in direction]
    if len(offsets) != n:
        raise ValueError("one offset per component required")
    if any(v == 0 for v in c):
        raise ValueError("direction vector must have no zero coordinates")
    if sum(c) != 0:
        raise ValueError("direction vector coordinates must sum to zero")
    ratios = [ci / c[0] for ci in c]
    if any(r.denominator != 1 for r in ratios):
        raise ValueError("direction must be integer multiples of its first coordinate")
    if offsets[0] != 0:
        raise ValueError("reference offset must be zero")
    pairs = []
    for j in range(n):
        entries = []
        for q in range(n):
            if q == j:
                continue
            d_qj = offsets[q] - c[q] / c[j] * offsets[j]
            slack = 10 * abs(c[q] / c[j]) + 2
            lo = abs(d_qj) - slack
            hi = abs(d_qj) + slack
            if not (Fraction(c0, 4) <= lo and hi <= 4 * c0):
                raise ValueError(
                    f"inconsistent coefficient law: component {q} seen from "
                    f"trigger {j} gives offset band [{lo}, {hi}] outside "
                    f"[{Fraction(c0, 4)}, {4 * c0}]"
                )
            entries.append((q, 1 if d_qj > 0 else -1))
        if len(entries) < 2:
            raise ValueError("need at least two lacunary components per index")
        pairs.append((entries[0], entries[1]))
    return pairs


def generate_rank_one(
    n: int,
    C0: int,
    C1: int,
    direction: Sequence,
    offsets: Sequence[int],
    count: int,
    seed: int,
    scale_classes: int = 2,
    tree_fraction: float = 0.6,
    position_span: int = 4,
) -> RankOneInstance:
    """Seeded rank-one collection following the integer frequency law
    l_q = (c_q / c_0) * l_0 + a_q at every scale class.

    Scales come from {0, C1, 2*C1, ...} (time lengths 2^0, 2^C1, ...), so
    frequency lengths between classes differ by at least 2^C1.  A
    tree_fraction portion of the fine-scale tiles is aimed so that some
    component's frequency 3-dilate contains a coarse tile's, making
    nontrivial trees likely; the rest is background.  The output always
    passes rank_one_check for parameters accepted by the offset validation.
    """
    direction = [Fraction(v) for v in direction]
    offsets = [int(v) for v in offsets]
    pairs = _validate_generator_params(direction, offsets, C0)
    params = RankOneParams(n=n, C0=C0, C1=C1, lacunary_pair=tuple(pairs))
    if count < 1:
        raise ValueError("count must be >= 1")
    if scale_classes < 1:
        raise ValueError("need at least one scale class")
    ratios = [int(ci / direction[0]) for ci in direction]
    # Free frequency parameters live on the lattice 4Z: two same-scale
    # multitiles then differ by at least 4 units in every component, so their
    # 3-dilated frequency intervals cannot both contain a common coarse
    # interval and every tree keeps one frequency vector per scale.
    lattice = 4
    rng = np.random.default_rng(seed)

    def build(scale_class: int, position: int, l_ref: int) -> Multitile:
        exp = scale_class * C1  # time length 2^exp
        time = DyadicInterval(0, -exp, position)
        tiles = []
        for q in range(n):
            l_q = ratios[q] * l_ref + offsets[q]
            tiles.append(Tile(time=time, freq=DyadicInterval(0, exp, l_q)))
        return Multitile(tuple(tiles))

    span_units = max(1, position_span)
    chosen: dict[tuple[int, int, int], Multitile] = {}

    def add(scale_class: int, position: int, l_ref: int):
        key = (scale_class, position, l_ref)
        if key not in chosen:
            chosen[key] = build(scale_class, position, l_ref)

    def draw_lattice_ref() -> int:
        return lattice * int(rng.integers(-C0, C0))

    # Coarse anchors first so fine tiles can be aimed under them.
    anchors = []
    n_anchor = max(1, count // 8) if scale_classes > 1 else 0
    for _ in range(n_anchor):
        cls = int(rng.integers(1, scale_classes))
        pos = int(rng.integers(0, span_units))
        l_ref = draw_lattice_ref()
        add(cls, pos, l_ref)
        anchors.append((cls, pos, l_ref))

    while len(chosen) < count:
        aimed = anchors and rng.random() < tree_fraction
        if aimed:
            cls_a, pos_a, lref_a = anchors[int(rng.integers(0, len(anchors)))]
            cls = int(rng.integers(0, cls_a))
            comp = int(rng.integers(0, n))
            # fine frequency index at component comp whose 3-dilate should
            # contain the anchor's comp-frequency
            shift = (cls_a - cls) * C1
            anchor_lq = ratios[comp] * lref_a + offsets[comp]
            target = anchor_lq >> shift  # floor division for either sign
            ideal = (target - offsets[comp]) / ratios[comp]
            base = lattice * round(ideal / lattice)
            scale_ratio = 1 << ((cls_a - cls) * C1)
            pos_lo = pos_a * scale_ratio
            # numpy integers are 64-bit; sampling a clamped sub-range keeps
            # the member inside the anchor either way
            pos = pos_lo + int(rng.integers(0, min(scale_ratio, 1 << 62)))
            anchor_tile = build(cls_a, pos_a, lref_a)
            placed = False
            for delta in (0, -lattice, lattice, -2 * lattice, 2 * lattice):
                member = build(cls, pos, base + delta)
                if tile_le(member.tiles[comp], anchor_tile.tiles[comp]):
                    add(cls, pos, base + delta)
                    placed = True
                    break
            if not placed:
                add(cls, pos, base)  # background tile; aim did not land
        else:
            cls = int(rng.integers(0, scale_classes))
            scale_ratio = 1 << ((scale_classes - 1 - cls) * C1)
            pos = int(rng.integers(0, min(span_units * scale_ratio, 1 << 62)))
            add(cls, pos, draw_lattice_ref())

    tiles = tuple(sorted(chosen.values(), key=lambda mt: (mt.time.i, mt.time.l, mt.tiles[0].freq.l)))
    return RankOneInstance(
        multitiles=tiles,
        params=params,
        direction=tuple(direction),
        offsets=tuple(offsets),
        seed=seed,
    )


def standard_direction(n: int) -> list[int]:
    """A zero-sum integer direction with no zero coordinates and integer
    ratios to the first coordinate."""
    if n < 3:
        raise ValueError("need n >= 3")
    return [1] * (n - 1) + [-(n - 1)]


def standard_offsets(n: int, C0: int) -> list[int]:
    """Offsets a_q = +-2*C0 with alternating signs, reference component zero.

    Passes the offset validation for n = 3; larger n may need hand-tuned
    offsets (the cross-trigger bands become mutually exclusive for the
    alternating pattern).
    """
    out = [0]
    for q in range(1, n):
        out.append(2 * C0 if q % 2 == 1 else -2 * C0)
    return out
