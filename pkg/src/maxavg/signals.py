"""Finitely supported integer-indexed signals and their lp machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .jsonio import format_float


@dataclass(frozen=True)
class Signal:
    """Real sequence on the integers, zero outside a stored window."""

    support_start: int
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[int, float]]) -> "Signal":
        if not pairs:
            return cls(0, (0.0,))
        items = sorted(pairs)
        lo = items[0][0]
        hi = items[-1][0]
        values = [0.0] * (hi - lo + 1)
        for idx, val in items:
            values[idx - lo] += val
        return cls(lo, tuple(values))

    @classmethod
    def delta(cls, position: int = 0, height: float = 1.0) -> "Signal":
        return cls(position, (height,))

    @classmethod
    def constant(cls, lo: int, hi: int, height: float = 1.0) -> "Signal":
        if hi < lo:
            raise ValueError("empty window")
        return cls(lo, tuple([height] * (hi - lo + 1)))

    @property
    def support_end(self) -> int:
        return self.support_start + len(self.values) - 1

    def __call__(self, t: int) -> float:
        idx = t - self.support_start
        if 0 <= idx < len(self.values):
            return self.values[idx]
        return 0.0

    def array(self, lo: int, hi: int) -> np.ndarray:
        """Dense |values| on [lo, hi] inclusive (absolute values: the
        averaging operators act on magnitudes)."""
        out = np.zeros(hi - lo + 1)
        a = max(lo, self.support_start)
        b = min(hi, self.support_end)
        if a <= b:
            out[a - lo : b - lo + 1] = np.abs(
                np.asarray(self.values[a - self.support_start : b - self.support_start + 1])
            )
        return out

    def signed_array(self, lo: int, hi: int) -> np.ndarray:
        out = np.zeros(hi - lo + 1)
        a = max(lo, self.support_start)
        b = min(hi, self.support_end)
        if a <= b:
            out[a - lo : b - lo + 1] = np.asarray(
                self.values[a - self.support_start : b - self.support_start + 1]
            )
        return out

    def translate(self, shift: int) -> "Signal":
        return Signal(self.support_start + shift, self.values)

    def scale(self, factor: float) -> "Signal":
        return Signal(self.support_start, tuple(factor * v for v in self.values))

    def magnitude(self) -> "Signal":
        return Signal(self.support_start, tuple(abs(v) for v in self.values))

    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)

    def to_json(self) -> dict:
        return {"start": self.support_start, "values": [format_float(v) for v in self.values]}

    @classmethod
    def from_json(cls, obj: dict) -> "Signal":
        return cls(int(obj["start"]), tuple(float(v) for v in obj["values"]))

    @classmethod
    def from_text(cls, text: str) -> "Signal":
        """Whitespace-separated "index value" pairs, one per line."""
        pairs = []
        for line in text.strip().splitlines():
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(f"expected 'index value' pair, got {line!r}")
            pairs.append((int(parts[0]), float(parts[1])))
        return cls.from_pairs(pairs)


def support_diameter(signals: Sequence[Signal]) -> int:
    """Largest support spread among the signals (0 for empty/point supports)."""
    diam = 0
    for s in signals:
        diam = max(diam, s.support_end - s.support_start)
    return diam


def lp_norm(signal: Signal, p) -> float:
    """Counting-measure lp norm; p = inf gives the sup norm."""
    if p == math.inf:
        return max((abs(v) for v in signal.values), default=0.0)
    p = float(p)
    if p <= 0:
        raise ValueError(f"p must be positive: {p}")
    return math.fsum(abs(v) ** p for v in signal.values) ** (1.0 / p)


def weak_lp(signal: Signal, p) -> float:
    """sup over levels lam of lam * #{|f| > lam}^(1/p).

    The supremum over continuous lam of lam * #{|f| > lam}^(1/p) equals the
    maximum over attained values v of v * #{|f| >= v}^(1/p), which is what
    is computed here.
    """
    if p == math.inf:
        return max((abs(v) for v in signal.values), default=0.0)
    p = float(p)
    if p <= 0:
        raise ValueError(f"p must be positive: {p}")
    magnitudes = sorted((abs(v) for v in signal.values if v != 0.0), reverse=True)
    best = 0.0
    for count, v in enumerate(magnitudes, start=1):
        best = max(best, v * count ** (1.0 / p))
    return best
