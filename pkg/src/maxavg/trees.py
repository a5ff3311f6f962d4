"""Multitile trees: sizes, the single-tree bound, and greedy tree selection.

A tree with index i and top T collects multitiles whose i-th tile sits under
T's in the tile order.  Sizes are suprema of normalized coefficient masses
over separated trees; the selection algorithm repeatedly strips a maximal
tree of large mass together with its companion, leaving a remainder of
controlled size.  The geometric facts needed by the selection proof
(frequency rigidity per scale, distinct time intervals, lacunary distance to
the top, the cross-tree sign ordering) are exposed as instance checkers.

Coefficients enter only through |<f_j, phi_(s,j)>|; providers either carry
an explicit map (synthetic instances, exact and fast at any scale gap) or
compute inner products against sampled wave packets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .dyadic import DyadicInterval
from .tiles import (
    COMPARABILITY_HI,
    COMPARABILITY_LO,
    Multitile,
    RankOneParams,
    tile_le,
    tile_lt,
)


class TileCollection:
    """A finite multitile family with cached order structure."""

    def __init__(self, multitiles: Sequence[Multitile], params: RankOneParams):
        self.multitiles = tuple(multitiles)
        self.params = params
        if any(mt.n != params.n for mt in self.multitiles):
            raise ValueError("component count mismatch")
        self.index = {mt: k for k, mt in enumerate(self.multitiles)}
        if len(self.index) != len(self.multitiles):
            raise ValueError("duplicate multitiles in collection")
        self._le: dict[int, np.ndarray] = {}
        self._time_le: Optional[np.ndarray] = None
        self.time_lengths = np.array(
            [float(mt.time.length) for mt in self.multitiles]
        )

    def __len__(self) -> int:
        return len(self.multitiles)

    def le_matrix(self, i: int) -> np.ndarray:
        """LE[s, t] = (component i of s) <= (component i of t)."""
        if i not in self._le:
            size = len(self.multitiles)
            mat = np.zeros((size, size), dtype=bool)
            for s_idx, s in enumerate(self.multitiles):
                for t_idx, t in enumerate(self.multitiles):
                    mat[s_idx, t_idx] = tile_le(s.tiles[i], t.tiles[i])
            self._le[i] = mat
        return self._le[i]

    def time_le_matrix(self) -> np.ndarray:
        """T[s, t] = time interval of s contained in time interval of t."""
        if self._time_le is None:
            size = len(self.multitiles)
            mat = np.zeros((size, size), dtype=bool)
            for s_idx, s in enumerate(self.multitiles):
                for t_idx, t in enumerate(self.multitiles):
                    mat[s_idx, t_idx] = t.time.contains(s.time)
            self._time_le = mat
        return self._time_le

    def freq_center(self, idx: int, i: int) -> Fraction:
        return self.multitiles[idx].freq(i).center

    def admissible_indices(self, j: int) -> list[tuple[int, int]]:
        """(i, eps) such that an index-i tree is (j, eps)-separated."""
        out = []
        for i in range(self.params.n):
            for jj, eps in self.params.pair(i):
                if jj == j:
                    out.append((i, eps))
        return out


class MapCoefficients:
    """Coefficients supplied directly, keyed by (multitile index, component)."""

    def __init__(self, collection: TileCollection, table: Mapping):
        self.collection = collection
        self._arrays: dict[int, np.ndarray] = {}
        n = collection.params.n
        for j in range(n):
            arr = np.zeros(len(collection), dtype=complex)
            for idx, mt in enumerate(collection.multitiles):
                if (mt, j) in table:
                    arr[idx] = table[(mt, j)]
                elif (idx, j) in table:
                    arr[idx] = table[(idx, j)]
            self._arrays[j] = arr

    @classmethod
    def random(cls, collection: TileCollection, seed: int, scale: float = 1.0):
        rng = np.random.default_rng(seed)
        n = collection.params.n
        table = {}
        for idx in range(len(collection)):
            for j in range(n):
                table[(idx, j)] = scale * rng.standard_normal()
        return cls(collection, table)

    def array(self, j: int) -> np.ndarray:
        return self._arrays[j]


class PacketCoefficients:
    """Coefficients <f_j, phi_(s,j)> against sampled wave packets.

    The cutoff applies to the last component only, mirroring the maximal
    truncation.
    """

    def __init__(self, collection: TileCollection, functions, grid, bump=None, cutoff=None):
        from . import packets as pk

        self.collection = collection
        n = collection.params.n
        if len(functions) != n:
            raise ValueError(f"expected {n} functions")
        bump = bump if bump is not None else pk.default_bump()
        self._arrays = {}
        for j in range(n):
            vals = np.zeros(len(collection), dtype=complex)
            for idx, mt in enumerate(collection.multitiles):
                packet = pk.packet_for_tile(mt.tiles[j], grid, bump)
                if cutoff is not None and j == n - 1:
                    packet = pk.modified_packet(packet, mt.tiles[j], cutoff)
                vals[idx] = functions[j].inner(packet)
            self._arrays[j] = vals

    def array(self, j: int) -> np.ndarray:
        return self._arrays[j]


@dataclass(frozen=True)
class MultitileTree:
    """Members with their top and index; members' i-tiles sit under the top's."""

    collection: TileCollection
    member_indices: tuple[int, ...]
    top_index: int
    index: int

    def __post_init__(self):
        le = self.collection.le_matrix(self.index)
        for s in self.member_indices:
            if not le[s, self.top_index]:
                raise ValueError("member violates the tree order")

    @property
    def top(self) -> Multitile:
        return self.collection.multitiles[self.top_index]

    @property
    def members(self) -> tuple[Multitile, ...]:
        return tuple(self.collection.multitiles[k] for k in self.member_indices)

    @property
    def time_interval(self) -> DyadicInterval:
        return self.top.time


def maximal_tree(collection: TileCollection, top_index: int, i: int,
                 within: Optional[np.ndarray] = None) -> MultitileTree:
    le = collection.le_matrix(i)
    mask = le[:, top_index]
    if within is not None:
        mask = mask & within
    return MultitileTree(collection, tuple(np.flatnonzero(mask)), top_index, i)


def is_j_separated(tree: MultitileTree, j: int) -> bool:
    return any(jj == j for jj, _ in tree.collection.params.pair(tree.index))


def separation_sign(params: RankOneParams, i: int, j: int) -> int:
    for jj, eps in params.pair(i):
        if jj == j:
            return eps
    raise ValueError(f"index-{i} trees are not {j}-separated")


def tree_size_sq(tree: MultitileTree, coeffs, j: int) -> float:
    c = coeffs.array(j)
    mass = float(
        np.sum(np.abs(c[list(tree.member_indices)]) ** 2)
    )
    return mass / float(tree.top.time.length)


def size(
    collection: TileCollection,
    j: int,
    coeffs,
    within: Optional[np.ndarray] = None,
) -> float:
    """sup over j-separated trees with top in the collection of
    sqrt(|I_T|^-1 * sum of |coefficient|^2).

    Only maximal trees are enumerated: membership sums are monotone under
    adding tiles, so the per-top maximal tree attains the per-top supremum.
    """
    best_sq = 0.0
    for (i, _), value_sq, top_idx in _tree_values(collection, j, coeffs, within):
        best_sq = max(best_sq, value_sq)
    return math.sqrt(best_sq)


def _tree_values(collection, j, coeffs, within):
    """(index, eps), squared size value, and top for every admissible top."""
    c2 = np.abs(coeffs.array(j)) ** 2
    if within is not None:
        c2 = np.where(within, c2, 0.0)
    lengths = collection.time_lengths
    for i, eps in collection.admissible_indices(j):
        le = collection.le_matrix(i)
        sums = c2 @ le  # per top: mass of the maximal tree
        values = sums / lengths
        tops = range(len(collection)) if within is None else np.flatnonzero(within)
        for t in tops:
            yield (i, eps), float(values[t]), int(t)


def naive_size(
    collection: TileCollection,
    j: int,
    coeffs,
    within: Optional[np.ndarray] = None,
) -> float:
    """Independent re-enumeration of the size: direct order tests, fsum."""
    params = collection.params
    tiles = collection.multitiles
    live = [
        k for k in range(len(tiles)) if within is None or bool(within[k])
    ]
    best = 0.0
    for i in range(params.n):
        if all(jj != j for jj, _ in params.pair(i)):
            continue
        for t in live:
            top = tiles[t].tiles[i]
            mass = math.fsum(
                abs(coeffs.array(j)[s]) ** 2
                for s in live
                if tile_le(tiles[s].tiles[i], top)
            )
            best = max(best, mass / float(tiles[t].time.length))
    return math.sqrt(best)


def single_tree_bound_check(tree: MultitileTree, coeffs) -> tuple[float, float]:
    """lhs = sum over members of |I_s|^(1-n/2) * prod_i |c_(s,i)|;
    rhs = |I_T| * prod_i size_i restricted to the tree's members.

    The inequality lhs <= rhs holds for any coefficient assignment once the
    index maps cover every component (each component admits separated
    singleton trees)."""
    collection = tree.collection
    n = collection.params.n
    member_mask = np.zeros(len(collection), dtype=bool)
    member_mask[list(tree.member_indices)] = True
    lhs = 0.0
    for s in tree.member_indices:
        length = float(collection.multitiles[s].time.length)
        term = length ** (1 - n / 2)
        for i in range(n):
            term *= abs(coeffs.array(i)[s])
        lhs += term
    rhs = float(tree.top.time.length)
    for i in range(n):
        rhs *= size(collection, i, coeffs, within=member_mask)
    return lhs, rhs


def strongly_disjoint(
    tree_a: MultitileTree, tree_b: MultitileTree, j: int
) -> bool:
    """Definitional test: no shared multitiles, and a member of one tree
    whose j-frequency strictly contains a member of the other forces its
    time interval away from the other tree's top interval (interior
    disjointness, matching the grid nesting convention)."""
    if tree_a.index != tree_b.index:
        raise ValueError("strong disjointness compares same-index trees")
    set_a = set(tree_a.member_indices)
    if set_a & set(tree_b.member_indices):
        return False
    for t1, t2 in ((tree_a, tree_b), (tree_b, tree_a)):
        top_time = t1.time_interval
        for s in t1.members:
            w_s = s.freq(j)
            for s2 in t2.members:
                w_s2 = s2.freq(j)
                if w_s2.contains(w_s) and w_s2 != w_s:
                    if top_time.overlaps(s2.time):
                        return False
    return True


def tree_geometry_check(tree: MultitileTree) -> list[str]:
    """Instance check of the separated-tree geometry: per-scale frequency
    rigidity, distinct time intervals, and the lacunary distance band from
    each member to the top at the separation components."""
    issues = []
    params = tree.collection.params
    members = list(tree.members)
    for a_idx, s in enumerate(members):
        for t in members[a_idx + 1 :]:
            if s.time.length == t.time.length:
                if any(s.freq(k) != t.freq(k) for k in range(params.n)):
                    issues.append(f"equal scale, different frequencies: {s} vs {t}")
                if s.time == t.time and s != t:
                    issues.append(f"duplicate time interval: {s} vs {t}")
    top = tree.top
    lo_band = COMPARABILITY_LO * params.C0
    hi_band = COMPARABILITY_HI * params.C0
    for s in members:
        if s == top:
            continue
        unit = Fraction(1) / s.time.length
        for j, _ in params.pair(tree.index):
            a_lo, a_hi = s.freq(j).dilate(Fraction(10))
            b_lo, b_hi = top.freq(j).dilate(Fraction(10))
            dist = max(b_lo - a_hi, a_lo - b_hi, Fraction(0))
            if not (lo_band * unit <= dist <= hi_band * unit):
                issues.append(
                    f"lacunary distance to top out of band at component {j}: {dist}"
                )
    return issues


def tree_pair_sign_check(
    tree_a: MultitileTree, tree_b: MultitileTree, j: int, eps: int
) -> list[str]:
    """Cross-tree sign ordering: a nested j-frequency pair with time meeting
    the first tree's interval forces the order s2_j <= top_j and the sign
    eps * (xi_top_a - xi_top_b) > 0 at the tree index."""
    issues = []
    i = tree_a.index
    for t1, t2 in ((tree_a, tree_b), (tree_b, tree_a)):
        for s in t1.members:
            for s2 in t2.members:
                if (
                    s2.freq(j).contains(s.freq(j))
                    and s2.freq(j) != s.freq(j)
                    and t1.time_interval.overlaps(s2.time)
                ):
                    if not tile_le(s2.tiles[j], t1.top.tiles[j]):
                        issues.append(f"nested pair not under the top: {s2}")
                    xi1 = t1.top.freq(i).center
                    xi2 = t2.top.freq(i).center
                    if eps * (xi1 - xi2) <= 0:
                        issues.append(
                            f"sign ordering violated: eps={eps}, centers {xi1}, {xi2}"
                        )
    return issues


@dataclass
class SplitResult:
    selected: list[MultitileTree]
    selected_signs: list[int]
    companions: list[MultitileTree]
    remainder: np.ndarray  # boolean mask over the collection
    selection_trace: list[dict]


def split_by_size(
    collection: TileCollection,
    j: int,
    m: int,
    coeffs,
    within: Optional[np.ndarray] = None,
) -> SplitResult:
    """Greedy tree selection: while some j-separated tree has normalized mass
    above 2^m, strip the extremal one and its companion.

    Step order: candidates are maximal trees with squared value > 4^m; among
    them the tree maximizing eps * (center of the top's index-component
    frequency) is selected (ties to coarsest, then leftmost top, then lowest
    index); its companion {s : s_j <= T_j} is removed with it.  On return the
    remainder has size at most 2^m and the selected trees, companions and
    remainder partition the input.
    """
    live = (
        np.ones(len(collection), dtype=bool) if within is None else within.copy()
    )
    initial = live.copy()
    start_size = size(collection, j, coeffs, within=live)
    if start_size > 2.0 ** (m + 1) * (1 + 1e-9):
        raise ValueError(
            f"precondition: size {start_size} exceeds 2^(m+1) = {2.0 ** (m + 1)}"
        )
    threshold_sq = float(4.0**m)
    selected: list[MultitileTree] = []
    signs: list[int] = []
    companions: list[MultitileTree] = []
    trace: list[dict] = []

    while True:
        candidates = []
        for (i, eps), value_sq, top_idx in _tree_values(collection, j, coeffs, live):
            if value_sq > threshold_sq * (1 + 1e-12) and live[top_idx]:
                candidates.append((i, eps, value_sq, top_idx))
        if not candidates:
            break

        def sort_key(cand):
            i, eps, _, top_idx = cand
            xi = collection.freq_center(top_idx, i)
            top = collection.multitiles[top_idx]
            return (-(eps * xi), top.time.i, top.time.l, i)

        i, eps, value_sq, top_idx = min(candidates, key=sort_key)
        tree = maximal_tree(collection, top_idx, i, within=live)
        _check_subtree_mass(collection, tree, coeffs, j, m)
        live[list(tree.member_indices)] = False
        selected.append(tree)
        signs.append(eps)
        trace.append(
            {
                "top": top_idx,
                "index": i,
                "eps": eps,
                "value": math.sqrt(value_sq),
                "extremal": float(eps * collection.freq_center(top_idx, i)),
            }
        )
        comp_mask = collection.le_matrix(j)[:, top_idx] & live
        companion = MultitileTree(
            collection, tuple(np.flatnonzero(comp_mask)), top_idx, j
        )
        live[comp_mask] = False
        companions.append(companion)

    removed = np.zeros(len(collection), dtype=bool)
    for tree in selected + companions:
        for idx in tree.member_indices:
            assert not removed[idx], "selection must be a partition"
            removed[idx] = True
    assert np.array_equal(removed | live, initial), "selection must be a partition"
    return SplitResult(
        selected=selected,
        selected_signs=signs,
        companions=companions,
        remainder=live,
        selection_trace=trace,
    )


def _check_subtree_mass(collection, tree, coeffs, j, m):
    """Per-member localized mass bound inherited from the size precondition."""
    c2 = np.abs(coeffs.array(j)) ** 2
    member = list(tree.member_indices)
    time_le = collection.time_le_matrix()
    bound = float(4.0 ** (m + 1))
    for t in member:
        inside = [s for s in member if time_le[s, t]]
        mass = float(np.sum(c2[inside]))
        length = float(collection.multitiles[t].time.length)
        assert mass <= bound * length * (1 + 1e-9), "localized mass above 4^(m+1)"


def split_layers(
    collection: TileCollection, j: int, coeffs
) -> list[tuple[int, SplitResult]]:
    """Iterate the selection from the top size scale downward until nothing
    with positive coefficient mass remains: the layered partition."""
    live = np.abs(coeffs.array(j)) > 0
    layers = []
    while live.any():
        current = size(collection, j, coeffs, within=live)
        if current == 0.0:
            break
        m = math.ceil(math.log2(current)) - 1
        result = split_by_size(collection, j, m, coeffs, within=live)
        layers.append((m, result))
        live = result.remainder & live
        if not (result.selected or result.companions):
            break
    return layers
