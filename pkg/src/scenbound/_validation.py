"""Small input-checking helpers used at module boundaries."""

from __future__ import annotations

import math
import numbers

from .exceptions import DomainError


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise DomainError(f"{name} must be >= 1, got {value}")
    return int(value)


def check_probability(value, name: str, *, open_low: bool = False, open_high: bool = False) -> float:
    """Return ``value`` as a float after checking it lies in [0, 1] (optionally open)."""
    try:
        p = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a real number, got {value!r}") from None
    if math.isnan(p):
        raise DomainError(f"{name} is NaN")
    low_ok = p > 0.0 if open_low else p >= 0.0
    high_ok = p < 1.0 if open_high else p <= 1.0
    if not (low_ok and high_ok):
        lo = "(" if open_low else "["
        hi = ")" if open_high else "]"
        raise DomainError(f"{name} must lie in {lo}0, 1{hi}, got {p}")
    return p


def check_finite(value, name: str) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise DomainError(f"{name} must be finite, got {v}")
    return v
