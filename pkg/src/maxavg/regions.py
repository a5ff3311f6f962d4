"""Exact exponent-region calculus for multilinear maximal averages.

An (n-1) x m rational matrix A determines, for each eps in (0, 1/4), a finite
vertex set S(A, eps) of admissible reciprocal-exponent tuples, built from the
values {0, 1/2+eps, 1-eps} and two row-independence filters (one against A,
one against the extended matrix E(A)).  The operator's exponent region is the
union over eps of the convex hulls of these vertex sets.  Everything in this
module is exact rational arithmetic: ranks, vertex enumeration, and convex
hull membership (decided by an exact phase-1 simplex with Bland's rule).

The companion half-space test uses the complexity parameter
k = n - rank*(E(A)), where rank* is the nondegeneracy rank (the largest r
such that every r rows are linearly independent): the tuple x is admitted
when sum(x) < n - k - 1/2 strictly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .jsonio import format_rational, parse_rational

Row = tuple[Fraction, ...]


@dataclass(frozen=True)
class AveragingMatrix:
    """Rational (n-1) x m matrix driving a multilinear average."""

    entries: tuple[Row, ...]

    def __post_init__(self):
        if not self.entries or not self.entries[0]:
            raise ValueError("matrix must have at least one row and one column")
        width = len(self.entries[0])
        norm = []
        for row in self.entries:
            if len(row) != width:
                raise ValueError("ragged matrix")
            norm.append(tuple(Fraction(e) for e in row))
        object.__setattr__(self, "entries", tuple(norm))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    @property
    def n(self) -> int:
        """Multilinearity degree: one more than the number of rows."""
        return self.rows + 1

    @classmethod
    def from_lists(cls, rows: Sequence[Sequence]) -> "AveragingMatrix":
        return cls(tuple(tuple(parse_rational(e) for e in row) for row in rows))

    @classmethod
    def from_json(cls, obj: dict) -> "AveragingMatrix":
        mat = cls.from_lists(obj["entries"])
        if "rows" in obj and obj["rows"] != mat.rows:
            raise ValueError("row count mismatch in matrix JSON")
        if "cols" in obj and obj["cols"] != mat.cols:
            raise ValueError("column count mismatch in matrix JSON")
        return mat

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[format_rational(e) for e in row] for row in self.entries],
        }


def extend_matrix(a: AveragingMatrix) -> tuple[Row, ...]:
    """n x (m+1) extension: append a ones column and a final (0,...,0,1) row."""
    one = Fraction(1)
    zero = Fraction(0)
    rows = [row + (one,) for row in a.entries]
    rows.append(tuple([zero] * a.cols) + (one,))
    return tuple(rows)


def _as_rows(matrix) -> tuple[Row, ...]:
    if isinstance(matrix, AveragingMatrix):
        return matrix.entries
    return tuple(tuple(Fraction(e) for e in row) for row in matrix)


def exact_rank(matrix) -> int:
    """Ordinary rank by fraction-exact Gaussian elimination."""
    rows = [list(r) for r in _as_rows(matrix)]
    if not rows:
        return 0
    cols = len(rows[0])
    rank = 0
    for col in range(cols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = rows[rank][col]
        rows[rank] = [e / inv for e in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [e - factor * p for e, p in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def is_independence_set(matrix, row_indices) -> bool:
    """True iff the selected rows are linearly independent; empty set is vacuously true."""
    rows = _as_rows(matrix)
    indices = sorted(set(row_indices))
    if any(i < 0 or i >= len(rows) for i in indices):
        raise IndexError(f"row index out of range for {len(rows)}-row matrix: {row_indices}")
    if not indices:
        return True
    selected = [rows[i] for i in indices]
    return exact_rank(selected) == len(selected)


def nondegeneracy_rank(matrix) -> int:
    """Largest r such that every r-subset of rows is linearly independent.

    A subset of an independent set is independent, so the property is
    monotone in r and the first success scanning downward is the answer.
    Intended for small matrices (brute-force over row subsets).
    """
    rows = _as_rows(matrix)
    upper = min(len(rows), len(rows[0]))
    for r in range(upper, 0, -1):
        if all(
            is_independence_set(rows, combo)
            for combo in itertools.combinations(range(len(rows)), r)
        ):
            return r
    return 0


def complexity(a: AveragingMatrix) -> int:
    """n - rank*(E(A)): the number of degenerate directions of the extension."""
    return a.n - nondegeneracy_rank(extend_matrix(a))


@dataclass(frozen=True)
class ExponentTuple:
    """Reciprocal exponents (1/p_1, ..., 1/p_{n-1}), each in [0, 1).

    A zero component encodes p_i = infinity.  The dual reciprocal 1/p_n'
    is the exact sum, forced by scaling.
    """

    reciprocals: tuple[Fraction, ...]

    def __post_init__(self):
        recs = tuple(Fraction(r) for r in self.reciprocals)
        if not recs:
            raise ValueError("empty exponent tuple")
        for r in recs:
            if not (0 <= r < 1):
                raise ValueError(f"reciprocal exponent out of [0, 1): {r}")
        object.__setattr__(self, "reciprocals", recs)

    @classmethod
    def from_values(cls, values: Sequence) -> "ExponentTuple":
        return cls(tuple(parse_rational(v) for v in values))

    @property
    def dual(self) -> Fraction:
        return sum(self.reciprocals, Fraction(0))

    def __len__(self) -> int:
        return len(self.reciprocals)


def dual_exponent(x: ExponentTuple) -> Fraction:
    return x.dual


@dataclass(frozen=True)
class VertexSet:
    """Admissible vertex tuples at a fixed eps in (0, 1/4)."""

    epsilon: Fraction
    vertices: frozenset[tuple[Fraction, ...]]


# Vertex patterns assign each coordinate one of these three levels; the
# admissibility filters depend only on the pattern, never on the eps value.
_LEVEL_ZERO, _LEVEL_MID, _LEVEL_HIGH = 0, 1, 2

_pattern_cache: dict[AveragingMatrix, tuple[tuple[int, ...], ...]] = {}


def _vertex_patterns(a: AveragingMatrix) -> tuple[tuple[int, ...], ...]:
    if a in _pattern_cache:
        return _pattern_cache[a]
    extended = extend_matrix(a)
    dim = a.rows
    patterns = []
    for pattern in itertools.product((_LEVEL_ZERO, _LEVEL_MID, _LEVEL_HIGH), repeat=dim):
        mids = [i for i, lv in enumerate(pattern) if lv == _LEVEL_MID]
        if len(mids) > 1:
            continue
        highs = [i for i, lv in enumerate(pattern) if lv == _LEVEL_HIGH]
        if not is_independence_set(a, highs):
            continue
        if not is_independence_set(extended, highs + mids):
            continue
        patterns.append(pattern)
    result = tuple(patterns)
    _pattern_cache[a] = result
    return result


def _instantiate(pattern: tuple[int, ...], eps: Fraction) -> tuple[Fraction, ...]:
    mid = Fraction(1, 2) + eps
    high = 1 - eps
    return tuple(
        Fraction(0) if lv == _LEVEL_ZERO else mid if lv == _LEVEL_MID else high
        for lv in pattern
    )


def _check_epsilon(eps: Fraction) -> Fraction:
    eps = Fraction(eps)
    if not (0 < eps < Fraction(1, 4)):
        raise ValueError(f"epsilon must lie in (0, 1/4): {eps}")
    return eps


def vertex_set(a: AveragingMatrix, epsilon) -> VertexSet:
    """All 3^(n-1) candidate tuples surviving the three admissibility filters."""
    eps = _check_epsilon(epsilon)
    verts = frozenset(_instantiate(p, eps) for p in _vertex_patterns(a))
    return VertexSet(epsilon=eps, vertices=verts)


@dataclass(frozen=True)
class MembershipVerdict:
    status: str  # "InsideWithWitness" | "NotFoundAtResolution"
    witness_epsilon: Optional[Fraction] = None
    certificate: Optional[tuple[tuple[tuple[Fraction, ...], Fraction], ...]] = None

    @property
    def inside(self) -> bool:
        return self.status == "InsideWithWitness"

    def to_json(self) -> dict:
        obj = {"status": self.status}
        if self.witness_epsilon is not None:
            obj["witness_epsilon"] = format_rational(self.witness_epsilon)
        if self.certificate is not None:
            obj["certificate"] = [
                {
                    "vertex": [format_rational(c) for c in vertex],
                    "weight": format_rational(weight),
                }
                for vertex, weight in self.certificate
            ]
        return obj


def _phase1_feasible(
    columns: Sequence[tuple[Fraction, ...]], rhs: Sequence[Fraction]
) -> Optional[list[Fraction]]:
    """Exact feasibility of  columns @ lam = rhs,  lam >= 0.

    Phase-1 simplex minimizing the sum of artificial variables, Bland's rule
    for termination.  Returns a nonnegative solution or None.
    """
    m = len(rhs)
    nvar = len(columns)
    table = []
    b = []
    for i in range(m):
        row = [columns[j][i] for j in range(nvar)]
        bi = rhs[i]
        if bi < 0:
            row = [-e for e in row]
            bi = -bi
        table.append(row)
        b.append(bi)
    # Objective row for minimizing the artificial sum: with the artificial
    # basis, the reduced cost of column j is sum_i table[i][j].
    obj = [sum(table[i][j] for i in range(m)) for j in range(nvar)]
    obj_rhs = sum(b, Fraction(0))
    basis = [nvar + i for i in range(m)]  # artificial indices

    while True:
        entering = next((j for j in range(nvar) if obj[j] > 0), None)
        if entering is None:
            break
        pivot_row = None
        best = None
        for i in range(m):
            coeff = table[i][entering]
            if coeff > 0:
                ratio = b[i] / coeff
                if best is None or ratio < best or (ratio == best and basis[i] < basis[pivot_row]):
                    best = ratio
                    pivot_row = i
        assert pivot_row is not None, "phase-1 objective is bounded below by zero"
        inv = table[pivot_row][entering]
        table[pivot_row] = [e / inv for e in table[pivot_row]]
        b[pivot_row] /= inv
        for i in range(m):
            if i != pivot_row and table[i][entering] != 0:
                f = table[i][entering]
                table[i] = [e - f * p for e, p in zip(table[i], table[pivot_row])]
                b[i] -= f * b[pivot_row]
        if obj[entering] != 0:
            f = obj[entering]
            obj = [e - f * p for e, p in zip(obj, table[pivot_row])]
            obj_rhs -= f * b[pivot_row]
        basis[pivot_row] = entering

    if obj_rhs != 0:
        return None
    lam = [Fraction(0)] * nvar
    for i, var in enumerate(basis):
        if var < nvar:
            lam[var] = b[i]
    return lam


def _hull_feasible(
    vertices: Sequence[tuple[Fraction, ...]], x: ExponentTuple
) -> Optional[list[tuple[tuple[Fraction, ...], Fraction]]]:
    dim = len(x)
    target = list(x.reciprocals) + [Fraction(1)]
    # Cheap necessary conditions before the simplex: for the coordinate and
    # all-ones functionals c, x inside the hull forces c.x <= max_v c.v.
    for c_idx in range(dim):
        if x.reciprocals[c_idx] > max(v[c_idx] for v in vertices):
            return None
    if sum(x.reciprocals) > max(sum(v) for v in vertices):
        return None
    columns = [tuple(v) + (Fraction(1),) for v in vertices]
    lam = _phase1_feasible(columns, target)
    if lam is None:
        return None
    return [(tuple(v), w) for v, w in zip(vertices, lam) if w != 0]


def hull_contains(a: AveragingMatrix, epsilon, x: ExponentTuple) -> MembershipVerdict:
    """Exact convex-hull membership of x in the vertex set at this eps.

    Feasibility of  sum(lam_v * v) = x, lam >= 0, sum(lam) = 1  over the
    admissible vertices; a feasible point is returned as the certificate.
    """
    eps = _check_epsilon(epsilon)
    if len(x) != a.rows:
        raise ValueError(f"point has {len(x)} coordinates, matrix expects {a.rows}")
    vertices = sorted(_instantiate(p, eps) for p in _vertex_patterns(a))
    cert = _hull_feasible(vertices, x)
    if cert is None:
        return MembershipVerdict(status="NotFoundAtResolution")
    return MembershipVerdict(
        status="InsideWithWitness", witness_epsilon=eps, certificate=tuple(cert)
    )


def _pattern_value(pattern: tuple[int, ...], c: tuple[int, ...], eps: Fraction) -> Fraction:
    mid = Fraction(1, 2) + eps
    high = 1 - eps
    total = Fraction(0)
    for lv, ci in zip(pattern, c):
        if ci and lv != _LEVEL_ZERO:
            total += ci * (mid if lv == _LEVEL_MID else high)
    return total


def _rejected_at_all_eps(
    a: AveragingMatrix, x: ExponentTuple, eps_lo: Fraction, eps_hi: Fraction
) -> bool:
    """Sound all-eps rejection: for a linear functional c, the hull maximum
    of c is a maximum of eps-affine pattern values, hence convex in eps and
    maximized at an endpoint of the eps range.  If c.x exceeds both endpoint
    maxima, the point is outside every hull on the range."""
    patterns = _vertex_patterns(a)
    dim = a.rows
    functionals = [tuple(1 if i == j else 0 for i in range(dim)) for j in range(dim)]
    functionals.append(tuple([1] * dim))
    for c in functionals:
        cx = sum(ci * xi for ci, xi in zip(c, x.reciprocals))
        bound = max(
            max(_pattern_value(p, c, eps_lo) for p in patterns),
            max(_pattern_value(p, c, eps_hi) for p in patterns),
        )
        if cx > bound:
            return True
    return False


def region_contains(
    a: AveragingMatrix, x: ExponentTuple, resolution: int = 1024
) -> MembershipVerdict:
    """Search the eps grid j/(4*resolution), j = 1..resolution-1, smallest first.

    Acceptance is sound (a witness eps plus an exact convex certificate);
    rejection only means no grid eps worked at this resolution.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if len(x) != a.rows:
        raise ValueError(f"point has {len(x)} coordinates, matrix expects {a.rows}")
    denom = 4 * resolution
    eps_lo = Fraction(1, denom)
    eps_hi = Fraction(resolution - 1, denom)
    if _rejected_at_all_eps(a, x, eps_lo, eps_hi):
        return MembershipVerdict(status="NotFoundAtResolution")
    for j in range(1, resolution):
        verdict = hull_contains(a, Fraction(j, denom), x)
        if verdict.inside:
            return verdict
    return MembershipVerdict(status="NotFoundAtResolution")


def complexity_region_contains(a: AveragingMatrix, x: ExponentTuple) -> bool:
    """Half-space form of the region: sum of reciprocals < n - k - 1/2 exactly."""
    if len(x) != a.rows:
        raise ValueError(f"point has {len(x)} coordinates, matrix expects {a.rows}")
    k = complexity(a)
    return x.dual < Fraction(2 * (a.n - k) - 1, 2)


def complexity_threshold(a: AveragingMatrix) -> Fraction:
    return Fraction(2 * (a.n - complexity(a)) - 1, 2)


def verify_certificate(
    a: AveragingMatrix, x: ExponentTuple, verdict: MembershipVerdict
) -> bool:
    """Re-check an InsideWithWitness verdict from scratch, all exact."""
    if not verdict.inside or verdict.certificate is None or verdict.witness_epsilon is None:
        return False
    admissible = vertex_set(a, verdict.witness_epsilon).vertices
    total = Fraction(0)
    point = [Fraction(0)] * a.rows
    for vertex, weight in verdict.certificate:
        if weight < 0 or tuple(vertex) not in admissible:
            return False
        total += weight
        for i, c in enumerate(vertex):
            point[i] += weight * c
    return total == 1 and tuple(point) == x.reciprocals


def halfspace_vertices(dim: int, threshold: Fraction) -> list[tuple[Fraction, ...]]:
    """Exact vertex enumeration of [0,1]^dim intersected with sum(x) <= threshold.

    Brute force over active-constraint subsets; used as an independent oracle
    for the extremal-point structure of the half-space region.
    """
    constraints = []  # (coeffs, rhs) meaning coeffs . x == rhs when active
    for i in range(dim):
        e = [Fraction(0)] * dim
        e[i] = Fraction(1)
        constraints.append((tuple(e), Fraction(0)))
        constraints.append((tuple(e), Fraction(1)))
    constraints.append((tuple([Fraction(1)] * dim), Fraction(threshold)))

    vertices = set()
    for combo in itertools.combinations(range(len(constraints)), dim):
        rows = [list(constraints[i][0]) + [constraints[i][1]] for i in combo]
        solution = _solve_square(rows, dim)
        if solution is None:
            continue
        if all(0 <= c <= 1 for c in solution) and sum(solution) <= threshold:
            vertices.add(tuple(solution))
    return sorted(vertices)


def _solve_square(aug: list[list[Fraction]], dim: int) -> Optional[tuple[Fraction, ...]]:
    rows = [row[:] for row in aug]
    for col in range(dim):
        pivot = next((i for i in range(col, dim) if rows[i][col] != 0), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = rows[col][col]
        rows[col] = [e / inv for e in rows[col]]
        for i in range(dim):
            if i != col and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [e - f * p for e, p in zip(rows[i], rows[col])]
    return tuple(rows[i][dim] for i in range(dim))
