"""Serialization helpers: exact rationals as "p/q" strings, 17-significant-digit
floats, and atomic report writes (temp file + rename)."""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction


def parse_rational(value) -> Fraction:
    """Accept int, "p/q" or "p" strings, or Fraction; reject floats.

    Floats are rejected so that exact-arithmetic surfaces never silently
    absorb rounding error.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected exact rational, got {type(value).__name__}: {value!r}")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_float(x: float) -> str:
    """17 significant digits: enough to round-trip any IEEE double."""
    return f"{float(x):.17g}"


def dump_json(obj, path: str) -> None:
    """Write JSON atomically with a stable key order.

    Stable ordering plus fixed float formatting is what makes re-runs
    byte-identical.
    """
    text = json.dumps(obj, sort_keys=True, indent=2)
    write_atomic(path, text + "\n")


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: str):
    with open(path) as handle:
        return json.load(handle)
