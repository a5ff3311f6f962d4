"""Randomized operator-norm probing for the discrete maximal averages.

Seeded, reproducible search over adversarial input families (random sign
indicators, lacunary combs, single deltas, Gaussian-enveloped chirps), each
followed by a greedy local perturbation stage.  Per-trial streams are derived
from the master seed by a fixed splitmix64 discipline, so trials can run in
any order or in parallel without changing the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .averaging import operator_ratio
from .jsonio import format_float, format_rational
from .regions import AveragingMatrix, ExponentTuple
from .signals import Signal

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def trial_seed(master_seed: int, trial: int) -> int:
    state = master_seed & _MASK64
    state, _ = splitmix64(state)
    state = (state ^ (trial * 0xD1342543DE82EF95)) & _MASK64
    _, out = splitmix64(state)
    return out


@dataclass(frozen=True)
class NormReport:
    exponents: ExponentTuple
    ratio: float
    argmax_inputs: tuple[Signal, ...]
    seed: int
    trials: int
    best_trial: int
    trial_ratios: tuple[float, ...]

    def to_json(self) -> dict:
        return {
            "exponents": [format_rational(r) for r in self.exponents.reciprocals],
            "ratio": format_float(self.ratio),
            "argmax_inputs": [s.to_json() for s in self.argmax_inputs],
            "seed": self.seed,
            "trials": self.trials,
            "best_trial": self.best_trial,
        }


_FAMILIES = ("indicator", "lacunary", "delta", "chirp")


def _draw_signal(rng: np.random.Generator, family: str, radius: int) -> Signal:
    span = 2 * radius + 1
    if family == "indicator":
        count = int(rng.integers(1, max(2, radius)))
        positions = rng.choice(span, size=min(count, span), replace=False) - radius
        signs = rng.choice((-1.0, 1.0), size=positions.size)
        return Signal.from_pairs(list(zip(positions.tolist(), signs.tolist())))
    if family == "lacunary":
        pairs = []
        k = 1
        while k <= radius:
            for sgn in (-1, 1):
                pairs.append((sgn * k, float(rng.choice((-1.0, 1.0)))))
            k *= 2
        pairs.append((0, 1.0))
        return Signal.from_pairs(pairs)
    if family == "delta":
        pos = int(rng.integers(-radius, radius + 1))
        return Signal.delta(pos)
    if family == "chirp":
        xs = np.arange(-radius, radius + 1)
        freq = rng.uniform(0, math.pi)
        width = rng.uniform(radius / 4, radius)
        values = np.exp(-((xs / width) ** 2)) * np.cos(freq * xs)
        return Signal(-radius, tuple(values.tolist()))
    raise ValueError(f"unknown family {family!r}")


def _perturb(rng: np.random.Generator, signals: list[Signal], radius: int) -> list[Signal]:
    idx = int(rng.integers(0, len(signals)))
    s = signals[idx]
    mode = int(rng.integers(0, 3))
    if mode == 0 and len(s.values) > 0:
        j = int(rng.integers(0, len(s.values)))
        vals = list(s.values)
        vals[j] *= float(rng.uniform(0.5, 2.0)) * float(rng.choice((-1.0, 1.0)))
        new = Signal(s.support_start, tuple(vals))
    elif mode == 1:
        shift = int(rng.integers(-2, 3))
        new = s.translate(shift)
    else:
        pos = int(rng.integers(-radius, radius + 1))
        vals = list(Signal.from_pairs([(pos, float(rng.uniform(-1, 1)))]).values)
        new = Signal.from_pairs(
            [(s.support_start + i, v) for i, v in enumerate(s.values)]
            + [(pos, float(rng.uniform(-1, 1)))]
        )
    out = list(signals)
    out[idx] = new
    return out


def run_trial(
    a: AveragingMatrix,
    exponents: ExponentTuple,
    radius: int,
    seed: int,
    trial: int,
    perturb_rounds: int = 8,
) -> tuple[float, list[Signal]]:
    rng = np.random.Generator(np.random.PCG64(trial_seed(seed, trial)))
    family = _FAMILIES[trial % len(_FAMILIES)]
    signals = [_draw_signal(rng, family, radius) for _ in range(a.rows)]
    best = operator_ratio(a, signals, exponents)
    for _ in range(perturb_rounds):
        candidate = _perturb(rng, signals, radius)
        value = operator_ratio(a, candidate, exponents)
        if value > best:
            best, signals = value, candidate
    return best, signals


def norm_search(
    a: AveragingMatrix,
    exponents: ExponentTuple,
    support_radius: int,
    trials: int,
    seed: int,
    workers: Optional[int] = None,
) -> NormReport:
    """Deterministic seeded search maximizing the operator-norm ratio.

    The reported inputs witness the reported ratio: recomputing the ratio
    from them reproduces it to double precision.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    from .parallel import deterministic_map

    results = deterministic_map(
        lambda t: run_trial(a, exponents, support_radius, seed, t),
        range(trials),
        workers=workers,
    )
    ratios = tuple(r for r, _ in results)
    best_trial = max(range(trials), key=lambda t: (ratios[t], -t))
    best_ratio, best_signals = results[best_trial]
    return NormReport(
        exponents=exponents,
        ratio=best_ratio,
        argmax_inputs=tuple(best_signals),
        seed=seed,
        trials=trials,
        best_trial=best_trial,
        trial_ratios=ratios,
    )
