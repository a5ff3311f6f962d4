"""Three shifted dyadic grids with exact rational endpoints.

Grid 0 is the standard dyadic grid; grids 1 and 2 shift every scale by
+(-1)^i / 3 and -(-1)^i / 3 respectively.  The alternating sign makes each
shifted grid nested across scales, so within one grid two intervals with
overlapping interiors are always comparable.  Scale i has length 2^(-i)
(larger i, shorter interval).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .jsonio import format_rational


def _offset(d: int, i: int) -> Fraction:
    if d == 0:
        return Fraction(0)
    sign = 1 if d == 1 else -1
    parity = 1 if i % 2 == 0 else -1
    return Fraction(sign * parity, 3)


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """Closed interval [2^-i (l + off), 2^-i (l + 1 + off)] in grid d."""

    d: int
    i: int
    l: int

    def __post_init__(self):
        if self.d not in (0, 1, 2):
            raise ValueError(f"grid id must be 0, 1 or 2: {self.d}")

    @property
    def length(self) -> Fraction:
        return Fraction(1, 2**self.i) if self.i >= 0 else Fraction(2 ** (-self.i))

    @property
    def lo(self) -> Fraction:
        return self.length * (self.l + _offset(self.d, self.i))

    @property
    def hi(self) -> Fraction:
        return self.length * (self.l + 1 + _offset(self.d, self.i))

    @property
    def center(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, other: "DyadicInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def contains_point(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def overlaps(self, other: "DyadicInterval") -> bool:
        """Interior overlap; endpoint touching does not count."""
        return self.lo < other.hi and other.lo < self.hi

    def dilate(self, factor: Fraction) -> tuple[Fraction, Fraction]:
        c = self.center
        half = Fraction(factor) * self.length / 2
        return c - half, c + half

    def to_json(self) -> dict:
        return {
            "grid": self.d,
            "scale": self.i,
            "position": self.l,
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
        }


def grid_interval(d: int, i: int, l: int) -> DyadicInterval:
    return DyadicInterval(d, i, l)


def parent(interval: DyadicInterval) -> DyadicInterval:
    """The unique interval of the same grid at scale i-1 containing this one."""
    d, i, l = interval.d, interval.i, interval.l
    for cand in _position_candidates(interval, i - 1):
        p = DyadicInterval(d, i - 1, cand)
        if p.contains(interval):
            return p
    raise AssertionError("dyadic parent must exist")


def children(interval: DyadicInterval) -> tuple[DyadicInterval, DyadicInterval]:
    """The two intervals of the same grid at scale i+1 inside this one."""
    d, i, _ = interval.d, interval.i, interval.l
    found = [
        c
        for cand in _position_candidates(interval, i + 1)
        if interval.contains(c := DyadicInterval(d, i + 1, cand))
    ]
    uniq = sorted(set(found), key=lambda c: c.lo)
    assert len(uniq) == 2, "a dyadic interval has exactly two children"
    return uniq[0], uniq[1]


def _position_candidates(interval: DyadicInterval, scale: int) -> Iterable[int]:
    target_len = Fraction(1, 2**scale) if scale >= 0 else Fraction(2 ** (-scale))
    approx = (interval.lo - _offset(interval.d, scale) * target_len) / target_len
    base = approx.numerator // approx.denominator
    return range(base - 2, base + 3)


def ancestor_at_scale(interval: DyadicInterval, scale: int) -> DyadicInterval:
    if scale > interval.i:
        raise ValueError("ancestor scale must be coarser (smaller i)")
    node = interval
    while node.i > scale:
        node = parent(node)
    return node


def interval_at(d: int, scale: int, x: Fraction) -> DyadicInterval:
    """The grid-d interval of the given scale whose closure contains x,
    preferring the one whose half-open [lo, hi) contains x."""
    length = Fraction(1, 2**scale) if scale >= 0 else Fraction(2 ** (-scale))
    t = Fraction(x) / length - _offset(d, scale)
    l = t.numerator // t.denominator
    cand = DyadicInterval(d, scale, l)
    if not (cand.lo <= x < cand.hi):
        for shift in (-1, 1):
            alt = DyadicInterval(d, scale, l + shift)
            if alt.lo <= x < alt.hi:
                return alt
    return cand


def a_enlargement(interval: DyadicInterval, enlargement: int) -> DyadicInterval:
    """A grid interval J with  A*I <= J <= 5A*I,  and J <= 3A*I when one exists.

    The union of the three grids' left endpoints at dyadic length 2^k has
    spacing 2^k/3, so a covering interval of length 2^k >= (3/2)|A*I| always
    exists and sticks out by at most 2|A*I| per side; that forces the outer
    factor 5.  The tighter factor 3 is attainable only when a power of two
    lands in [3/2, 9/4] * |A*I| relative to the position, so it is searched
    first and the factor-5 window is the fallback.
    """
    if interval.d != 0:
        raise ValueError("enlargement is defined for grid-0 time intervals")
    if enlargement < 1:
        raise ValueError("enlargement factor must be >= 1")
    inner_lo, inner_hi = interval.dilate(Fraction(enlargement))
    inner_len = inner_hi - inner_lo
    for outer_factor in (3, 5):
        outer_lo, outer_hi = interval.dilate(Fraction(outer_factor * enlargement))
        outer_len = outer_hi - outer_lo
        scales = []
        length = Fraction(1)
        scale = 0
        while length < inner_len:
            length *= 2
            scale -= 1
        while length > inner_len:
            length /= 2
            scale += 1
        if length < inner_len:
            length *= 2
            scale -= 1
        while length <= outer_len:
            scales.append(scale)
            length *= 2
            scale -= 1
        for cand_scale in sorted(scales):
            for d in (0, 1, 2):
                base = interval_at(d, cand_scale, inner_lo)
                for shift in (0, -1, 1):
                    j = DyadicInterval(d, cand_scale, base.l + shift)
                    if (
                        j.lo <= inner_lo
                        and inner_hi <= j.hi
                        and outer_lo <= j.lo
                        and j.hi <= outer_hi
                    ):
                        return j
    raise AssertionError("a factor-5 enlargement always exists")


def sparsify(
    intervals: Sequence[DyadicInterval], enlargement: int
) -> list[list[DyadicInterval]]:
    """Split grid-0 intervals into families that are (A, d)-sparse:

    (i) distinct lengths within a family differ by a factor >= 2^(100A)
        (scales pigeonholed mod 100A),
    (ii) equal-length members are >= 100A lengths apart
        (positions pigeonholed mod 100A + 1),
    (iii) all members of a family have their A-enlargement in one grid d.
    """
    if enlargement < 1:
        raise ValueError("enlargement factor must be >= 1")
    a = enlargement
    buckets: dict[tuple[int, int, int], list[DyadicInterval]] = {}
    for interval in dict.fromkeys(intervals):
        if interval.d != 0:
            raise ValueError("sparsification expects grid-0 intervals")
        key = (
            interval.i % (100 * a),
            interval.l % (100 * a + 1),
            a_enlargement(interval, a).d,
        )
        buckets.setdefault(key, []).append(interval)
    return [buckets[key] for key in sorted(buckets)]


def sparse_family_violations(
    family: Sequence[DyadicInterval], enlargement: int
) -> list[str]:
    """Definitional re-check of the three sparseness conditions."""
    a = enlargement
    issues = []
    grids = {a_enlargement(iv, a).d for iv in family}
    if len(grids) > 1:
        issues.append(f"enlargements span several grids: {sorted(grids)}")
    for idx, p in enumerate(family):
        for q in family[idx + 1 :]:
            if p.length != q.length:
                big, small = max(p.length, q.length), min(p.length, q.length)
                if big < small * 2 ** (100 * a):
                    issues.append(f"scale gap too small: {p} vs {q}")
            else:
                gap = max(q.lo - p.hi, p.lo - q.hi)
                if gap < 100 * a * p.length:
                    issues.append(f"same-scale separation too small: {p} vs {q}")
    return issues


def layer_intervals(
    intervals: Sequence[DyadicInterval],
) -> list[list[DyadicInterval]]:
    """Peel off maximal intervals repeatedly: layer j is the set of maximal
    members not yet assigned.  Layers partition the input; each layer is
    pairwise non-nested, and for j > 1 every layer-j interval lies inside
    exactly one layer-(j-1) interval."""
    remaining = list(dict.fromkeys(intervals))
    grids = {iv.d for iv in remaining}
    if len(grids) > 1:
        raise ValueError("layering expects intervals from a single grid")
    layers = []
    while remaining:
        maximal = [
            iv
            for iv in remaining
            if not any(other != iv and other.contains(iv) for other in remaining)
        ]
        layers.append(sorted(maximal))
        chosen = set(maximal)
        remaining = [iv for iv in remaining if iv not in chosen]
    return layers
