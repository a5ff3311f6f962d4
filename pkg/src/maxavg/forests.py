"""Lacunary trees, forests, counting/BMO functionals, and stopping times.

A lacunary tree is a set of tiles inside a common time interval whose
frequency intervals sit at comparable distance C0 * |w_P| from a center
frequency, with one frequency per scale.  A forest is a pairwise strongly
disjoint family of such trees.  The counting function adds up the tree time
indicators; its L-infinity norm dominates the localized-average (BMO-style)
functional, and both are computed in exact interval arithmetic.

The stopping-time algorithm peels maximal heavy intervals off each tree:
given the Carleson bound  sum_(I_P in I) |a_P|^2 <= 4^m |I|  for every
dyadic I, the heavy intervals at level m-1 spawn trees whose mass is
comparable to 4^m times their length, and the remainder satisfies the
level-(m-1) bound.  Iterating from the top level down decomposes any
coefficient family into layers whose weighted lengths add up to the total
mass, up to fixed two-sided constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .dyadic import DyadicInterval, ancestor_at_scale, parent
from .tiles import COMPARABILITY_HI, COMPARABILITY_LO, Tile


@dataclass(frozen=True)
class LacunaryTree:
    tiles: tuple[Tile, ...]
    time_interval: DyadicInterval
    center_freq: Fraction
    C0: int = 8

    def __post_init__(self):
        object.__setattr__(self, "center_freq", Fraction(self.center_freq))
        if self.time_interval.d != 0:
            raise ValueError("tree time interval lives in the standard grid")
        seen_lengths: dict[Fraction, DyadicInterval] = {}
        lo_band = COMPARABILITY_LO * self.C0
        hi_band = COMPARABILITY_HI * self.C0
        for p in self.tiles:
            if not self.time_interval.contains(p.time):
                raise ValueError(f"tile time {p.time} outside the tree interval")
            dist = max(
                p.freq.lo - self.center_freq,
                self.center_freq - p.freq.hi,
                Fraction(0),
            )
            if not (lo_band * p.freq.length <= dist <= hi_band * p.freq.length):
                raise ValueError(
                    f"tile frequency not lacunary about {self.center_freq}: dist {dist}"
                )
            if p.time.length in seen_lengths:
                if seen_lengths[p.time.length] != p.freq:
                    raise ValueError("one frequency per scale is required")
            else:
                seen_lengths[p.time.length] = p.freq
        if len({p.time for p in self.tiles}) != len(self.tiles):
            raise ValueError("tiles must have distinct time intervals")

    def subtree(self, time_interval: DyadicInterval) -> "LacunaryTree":
        members = tuple(
            p for p in self.tiles if time_interval.contains(p.time)
        )
        return LacunaryTree(members, time_interval, self.center_freq, self.C0)

    def to_json(self) -> dict:
        return {
            "time": self.time_interval.to_json(),
            "center_freq": str(self.center_freq),
            "C0": self.C0,
            "tiles": [t.to_json() for t in self.tiles],
        }


def strongly_disjoint_lacunary(a: LacunaryTree, b: LacunaryTree) -> bool:
    """No shared tiles; a strict frequency nesting across the trees forces
    the coarser tile's time interval off the other tree's interval."""
    if set(a.tiles) & set(b.tiles):
        return False
    for t1, t2 in ((a, b), (b, a)):
        for p in t1.tiles:
            for q in t2.tiles:
                if q.freq.contains(p.freq) and q.freq != p.freq:
                    if t1.time_interval.overlaps(q.time):
                        return False
    return True


@dataclass(frozen=True)
class Forest:
    trees: tuple[LacunaryTree, ...]

    def __post_init__(self):
        for i, a in enumerate(self.trees):
            for b in self.trees[i + 1 :]:
                if not strongly_disjoint_lacunary(a, b):
                    raise ValueError("forest trees must be pairwise strongly disjoint")

    def __len__(self) -> int:
        return len(self.trees)

    def all_tiles(self) -> list[Tile]:
        return [p for tree in self.trees for p in tree.tiles]


@dataclass(frozen=True)
class StepFunction:
    """Right-open step function sum of interval indicators."""

    breakpoints: tuple[Fraction, ...]
    levels: tuple[int, ...]  # levels[k] on [breakpoints[k], breakpoints[k+1])

    def __call__(self, x) -> int:
        x = Fraction(x)
        if not self.breakpoints or x < self.breakpoints[0] or x >= self.breakpoints[-1]:
            return 0
        for k in range(len(self.levels)):
            if self.breakpoints[k] <= x < self.breakpoints[k + 1]:
                return self.levels[k]
        return 0

    def sup(self) -> int:
        return max(self.levels, default=0)

    def l1(self) -> Fraction:
        return sum(
            (
                level * (hi - lo)
                for level, lo, hi in zip(
                    self.levels, self.breakpoints, self.breakpoints[1:]
                )
            ),
            Fraction(0),
        )


def counting_function(forest: Forest) -> StepFunction:
    """Sum of the tree time-interval indicators, as an exact step function."""
    points = sorted(
        {t.time_interval.lo for t in forest.trees}
        | {t.time_interval.hi for t in forest.trees}
    )
    if not points:
        return StepFunction((), ())
    levels = []
    for lo, hi in zip(points, points[1:]):
        mid = (lo + hi) / 2
        levels.append(
            sum(
                1
                for t in forest.trees
                if t.time_interval.lo <= mid < t.time_interval.hi
            )
        )
    return StepFunction(tuple(points), tuple(levels))


def forest_bmo(forest: Forest) -> Fraction:
    """max over dyadic I of |I|^-1 * sum of |I_T| over trees with I_T inside I.

    Candidates are the grid-0 ancestors of the tree intervals up to the scale
    spanning the whole forest: the numerator only changes when I crosses a
    tree interval, so enlarging I toward the minimal dyadic hull of its
    content only increases the quotient.
    """
    if not forest.trees:
        return Fraction(0)
    intervals = [t.time_interval for t in forest.trees]
    span = max(iv.hi for iv in intervals) - min(iv.lo for iv in intervals)
    top_scale = 0
    length = Fraction(1)
    while length < span:
        length *= 2
        top_scale -= 1
    candidates = set()
    for iv in intervals:
        node = iv
        candidates.add(node)
        while node.i > top_scale:
            node = parent(node)
            candidates.add(node)
    best = Fraction(0)
    for cand in candidates:
        mass = sum(
            (iv.length for iv in intervals if cand.contains(iv)), Fraction(0)
        )
        best = max(best, mass / cand.length)
    return best


def heavy_intervals(
    forest: Forest, root: DyadicInterval, threshold: int
) -> list[DyadicInterval]:
    """Maximal dyadic J inside root with more than `threshold` trees
    satisfying J <= I_T <= root; disjoint by maximality.

    The count is monotone under shrinking J, so a top-down recursion emits
    the first heavy interval on each branch.  Branches stop at the shortest
    tree interval, below which the count is constant.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    intervals = [
        t.time_interval for t in forest.trees if root.contains(t.time_interval)
    ]
    if not intervals:
        return []
    min_length = min(iv.length for iv in intervals)

    def count(j: DyadicInterval) -> int:
        return sum(1 for iv in intervals if iv.contains(j))

    out: list[DyadicInterval] = []

    def descend(j: DyadicInterval):
        if count(j) > threshold:
            out.append(j)
            return
        if j.length <= min_length:
            return
        from .dyadic import children

        for child in children(j):
            descend(child)

    descend(root)
    return out


def subtree_mass_bound(
    tree: LacunaryTree, coeffs: Mapping[Tile, complex]
) -> float:
    """max over dyadic I of sum_(I_P inside I) |a_P|^2 / |I|; candidates are
    ancestors of tile time intervals inside the tree interval."""
    if not tree.tiles:
        return 0.0
    candidates = set()
    for p in tree.tiles:
        node = p.time
        candidates.add(node)
        while node.i > tree.time_interval.i:
            node = parent(node)
            candidates.add(node)
    candidates = {c for c in candidates if tree.time_interval.contains(c)}
    best = 0.0
    for cand in candidates:
        mass = math.fsum(
            abs(coeffs.get(p, 0.0)) ** 2
            for p in tree.tiles
            if cand.contains(p.time)
        )
        best = max(best, mass / float(cand.length))
    return best


def check_carleson(
    forest: Forest, coeffs: Mapping[Tile, complex], m: int
) -> bool:
    bound = float(4.0**m)
    return all(
        subtree_mass_bound(tree, coeffs) <= bound * (1 + 1e-9)
        for tree in forest.trees
    )


@dataclass
class StoppingResult:
    heavy: list[LacunaryTree]
    light: list[LacunaryTree]
    heavy_mass: float
    heavy_length: Fraction


def stopping_time(
    forest: Forest, coeffs: Mapping[Tile, complex], m: int
) -> StoppingResult:
    """Partition the forest tiles at mass level m.

    Requires the level-m Carleson bound.  Maximal dyadic intervals I with
    sum_(I_P inside I) |a_P|^2 > 4^(m-1) |I| spawn heavy trees; the remaining
    tiles of each tree keep its interval and satisfy the level-(m-1) bound.
    Counting functions of both parts are dominated by the input forest's.
    """
    if not check_carleson(forest, coeffs, m):
        raise ValueError(f"Carleson bound at level m={m} fails")
    cutoff = float(4.0 ** (m - 1))
    heavy_trees: list[LacunaryTree] = []
    light_trees: list[LacunaryTree] = []
    heavy_mass = 0.0
    heavy_length = Fraction(0)
    for tree in forest.trees:
        candidates = set()
        for p in tree.tiles:
            node = p.time
            candidates.add(node)
            while node.i > tree.time_interval.i:
                node = parent(node)
                candidates.add(node)
        candidates = {c for c in candidates if tree.time_interval.contains(c)}

        def mass_in(c: DyadicInterval) -> float:
            return math.fsum(
                abs(coeffs.get(p, 0.0)) ** 2
                for p in tree.tiles
                if c.contains(p.time)
            )

        heavy_cands = [c for c in candidates if mass_in(c) > cutoff * float(c.length)]
        maximal = [
            c
            for c in heavy_cands
            if not any(o != c and o.contains(c) for o in heavy_cands)
        ]
        taken: set[Tile] = set()
        for c in sorted(maximal):
            members = tuple(
                p for p in tree.tiles if c.contains(p.time) and p not in taken
            )
            taken.update(members)
            sub = LacunaryTree(members, c, tree.center_freq, tree.C0)
            heavy_trees.append(sub)
            heavy_mass += mass_in(c)
            heavy_length += c.length
        rest = tuple(p for p in tree.tiles if p not in taken)
        light_trees.append(
            LacunaryTree(rest, tree.time_interval, tree.center_freq, tree.C0)
        )
    return StoppingResult(
        heavy=heavy_trees,
        light=light_trees,
        heavy_mass=heavy_mass,
        heavy_length=heavy_length,
    )


def iterated_stopping(
    forest: Forest, coeffs: Mapping[Tile, complex]
) -> tuple[dict[int, list[LacunaryTree]], list[Tile]]:
    """Layered mass decomposition: apply the level-m split from the smallest
    level dominating all trees downward until only zero coefficients remain.

    Returns the per-level heavy layers and the zero-coefficient tiles.
    """
    zero_tiles = [p for p in forest.all_tiles() if abs(coeffs.get(p, 0.0)) == 0.0]
    live = [
        LacunaryTree(
            tuple(p for p in tree.tiles if abs(coeffs.get(p, 0.0)) > 0.0),
            tree.time_interval,
            tree.center_freq,
            tree.C0,
        )
        for tree in forest.trees
    ]
    layers: dict[int, list[LacunaryTree]] = {}
    top = 0.0
    for tree in live:
        top = max(top, subtree_mass_bound(tree, coeffs))
    if top == 0.0:
        return layers, zero_tiles
    m = math.ceil(math.log2(top) / 2)
    if 4.0**m < top:
        m += 1
    while any(tree.tiles for tree in live):
        result = stopping_time(Forest(tuple(live)), coeffs, m)
        if result.heavy:
            layers[m] = result.heavy
        live = result.light
        m -= 1
        if m < -64:
            raise AssertionError("stopping iteration failed to terminate")
    return layers, zero_tiles


def layer_mass_identity(
    layers: dict[int, list[LacunaryTree]], coeffs: Mapping[Tile, complex]
) -> tuple[float, float]:
    """(sum_m 4^m sum of |I_T| over layer m,  total coefficient mass).

    The quotient of the two lies in [1, 4]: each layer tree carries mass in
    (4^(m-1) |I_T|, 4^m |I_T|]."""
    weighted = math.fsum(
        4.0**m * float(tree.time_interval.length)
        for m, trees in layers.items()
        for tree in trees
    )
    total = math.fsum(
        abs(coeffs.get(p, 0.0)) ** 2
        for trees in layers.values()
        for tree in trees
        for p in tree.tiles
    )
    return weighted, total
