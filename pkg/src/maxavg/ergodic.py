"""Multi-parameter averages on finite cyclic systems.

The system is Z/NZ with the shift x -> x+1 and uniform probability.  For an
integer matrix A the two-parameter average over the box [-L, L]^m depends on
the lattice point only through its residues mod N, so large-L averages are
computed exactly by counting residues; the direct sum is kept as the small-L
path and as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from typing import Mapping, Optional, Sequence

from .regions import AveragingMatrix

_DIRECT_TERM_LIMIT = 200_000


@dataclass(frozen=True)
class FiniteSystem:
    """Cyclic shift system on {0, ..., size-1} with uniform mass 1/size."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("system size must be >= 1")

    def shift(self, x: int, steps: int = 1) -> int:
        return (x + steps) % self.size


@dataclass(frozen=True)
class CubeSpec:
    """m-dimensional cube averages, indexed by the nonzero 0/1 patterns."""

    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("cube dimension must be >= 1")

    @property
    def index_set(self) -> tuple[tuple[int, ...], ...]:
        labels = sorted(
            eps for eps in product((0, 1), repeat=self.dimension) if any(eps)
        )
        return tuple(labels)

    def matrix(self) -> AveragingMatrix:
        return AveragingMatrix.from_lists([list(eps) for eps in self.index_set])


def _integer_rows(a: AveragingMatrix) -> list[list[int]]:
    rows = []
    for row in a.entries:
        if any(e.denominator != 1 for e in row):
            raise ValueError("integer matrix required")
        rows.append([int(e) for e in row])
    return rows


def residue_counts(L: int, modulus: int) -> list[int]:
    """#{|l| <= L : l == r (mod modulus)} for r = 0..modulus-1."""
    return [
        (L - r) // modulus + (L + r) // modulus + 1 for r in range(modulus)
    ]


def _value(functions: Sequence[Sequence[float]], rows, system, x, shifts, absolute):
    prod_val = 1.0
    for row, f in zip(rows, functions):
        step = sum(r * t for r, t in zip(row, shifts))
        v = f[(x + step) % system.size]
        prod_val *= abs(v) if absolute else v
    return prod_val


def ergodic_average(
    a: AveragingMatrix,
    system: FiniteSystem,
    functions: Sequence[Sequence[float]],
    L: int,
    x: int,
    absolute: bool = True,
) -> float:
    """(2L+1)^{-m} sum over the box of the product of shifted samples.

    absolute=True mirrors the maximal-operator normalization (magnitudes
    inside the product); absolute=False is the signed variant used by the
    convergence probes.
    """
    rows = _integer_rows(a)
    if len(functions) != a.rows:
        raise ValueError(f"expected {a.rows} functions, got {len(functions)}")
    if any(len(f) != system.size for f in functions):
        raise ValueError("function arrays must match the system size")
    if L < 0:
        raise ValueError("L must be nonnegative")
    m = a.cols
    n_terms = (2 * L + 1) ** m
    n = system.size
    if n_terms <= min(n**m, _DIRECT_TERM_LIMIT):
        total = math.fsum(
            _value(functions, rows, system, x, shifts, absolute)
            for shifts in product(range(-L, L + 1), repeat=m)
        )
        return total / n_terms
    # Exact regrouping by residues: the summand depends only on shifts mod N.
    counts = np.asarray(residue_counts(L, n), dtype=float)
    mesh = np.indices((n,) * m)
    weights = np.ones((n,) * m)
    values = np.ones((n,) * m)
    for axis in range(m):
        shape = [1] * m
        shape[axis] = n
        weights = weights * counts.reshape(shape)
    for row, f in zip(rows, functions):
        idx = np.zeros((n,) * m, dtype=np.int64)
        for jj, coeff in enumerate(row):
            if coeff:
                idx = idx + coeff * mesh[jj]
        samples = np.asarray(f, dtype=float)[(x + idx) % n]
        values = values * (np.abs(samples) if absolute else samples)
    total = math.fsum((weights * values).ravel().tolist())
    return total / n_terms


def periodic_mean(
    a: AveragingMatrix,
    system: FiniteSystem,
    functions: Sequence[Sequence[float]],
    x: int,
    absolute: bool = True,
) -> float:
    """Full-period mean over (Z/NZ)^m: the exact large-L limit."""
    rows = _integer_rows(a)
    m = a.cols
    total = math.fsum(
        _value(functions, rows, system, x, residues, absolute)
        for residues in product(range(system.size), repeat=m)
    )
    return total / system.size ** m


def cube_average(
    spec: CubeSpec,
    system: FiniteSystem,
    functions: Mapping[tuple[int, ...], Sequence[float]],
    L: int,
    x: int,
    absolute: bool = True,
) -> float:
    """Cube average: product over nonzero patterns eps of f_eps(S^{i . eps} x)."""
    ordered = []
    for eps in spec.index_set:
        if eps not in functions:
            raise KeyError(f"missing function for cube index {eps}")
        ordered.append(functions[eps])
    return ergodic_average(spec.matrix(), system, ordered, L, x, absolute=absolute)


def convergence_probe(
    system: FiniteSystem,
    functions: Sequence[Sequence[float]],
    spec,
    L_schedule: Sequence[int],
    absolute: bool = False,
) -> list[float]:
    """sup_x |average at L - full-period mean| for each L in the schedule.

    The limit is the exact period mean; the sequence is reported as-is, with
    no monotonicity assumption.  Signed averages by default, matching the
    averages whose pointwise convergence the deviations measure.
    """
    if list(L_schedule) != sorted(L_schedule):
        raise ValueError("L schedule must be increasing")
    if isinstance(spec, CubeSpec):
        matrix = spec.matrix()
        if isinstance(functions, Mapping):
            functions = [functions[eps] for eps in spec.index_set]
    else:
        matrix = spec
    limits = [
        periodic_mean(matrix, system, functions, x, absolute=absolute)
        for x in range(system.size)
    ]
    deviations = []
    for L in L_schedule:
        worst = 0.0
        for x in range(system.size):
            avg = ergodic_average(matrix, system, functions, L, x, absolute=absolute)
            worst = max(worst, abs(avg - limits[x]))
        deviations.append(worst)
    return deviations
