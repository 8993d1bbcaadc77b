"""Probability bounds for hitting every one of ``k`` equal-measure sets.

Three families are provided, all functions of a per-set measure ``epsilon``,
a set count ``k`` and a sample count ``N``:

* ``classic``  -- the binomial tail ``sum_{i<k} C(N,i) eps^i (1-eps)^(N-i)``
* ``additive`` -- the union bound ``k (1-eps)^N``
* ``inclusion_exclusion`` -- the exact miss probability for disjoint sets,
  valid for ``eps <= 1/k``

Every term is evaluated in log space and the terms are combined with
``math.fsum`` so the alternating inclusion-exclusion sum does not lose
digits to cancellation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from ._validation import check_positive_int, check_probability
from .exceptions import DomainError, RangeError, ValidityRangeError

__all__ = [
    "BoundFamily",
    "BoundSpec",
    "phi_c",
    "phi_a",
    "phi_ie",
    "evaluate",
    "validity_upper",
    "invert_bound",
]


class BoundFamily(str, enum.Enum):
    CLASSIC = "classic"
    ADDITIVE = "additive"
    INCLUSION_EXCLUSION = "inclusion_exclusion"

    @classmethod
    def parse(cls, value: "BoundFamily | str") -> "BoundFamily":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"ie": "inclusion_exclusion", "phi": "inclusion_exclusion", "phi_c": "classic", "phi_a": "additive"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown bound family {value!r}") from None


@dataclass(frozen=True)
class BoundSpec:
    """Identifies one bound: its family, the set count ``k`` and sample count ``N``.

    For the classic family ``N >= k`` is required; the binomial tail is only a
    valid violation bound for ``N > k`` but evaluation at ``N == k`` is allowed.
    """

    family: BoundFamily
    k: int
    N: int

    def __post_init__(self):
        object.__setattr__(self, "family", BoundFamily.parse(self.family))
        check_positive_int(self.k, "k")
        check_positive_int(self.N, "N")
        if self.family is BoundFamily.CLASSIC and self.N < self.k:
            raise DomainError(f"classic bound needs N >= k, got N={self.N}, k={self.k}")


def _require(spec: BoundSpec, family: BoundFamily) -> None:
    if not isinstance(spec, BoundSpec):
        raise DomainError(f"expected a BoundSpec, got {type(spec).__name__}")
    if spec.family is not family:
        raise DomainError(f"expected a {family.value} BoundSpec, got {spec.family.value}")


def _pow_one_minus(x: float, n: int) -> float:
    """(1 - x)^n for x in [0, 1], via log1p; exact zero at x == 1."""
    if x >= 1.0:
        return 0.0
    if x <= 0.0:
        return 1.0
    return math.exp(n * math.log1p(-x))


def phi_c(epsilon: float, spec: BoundSpec) -> float:
    """Binomial tail ``P[Bin(N, epsilon) <= k-1]``, clamped to [0, 1]."""
    _require(spec, BoundFamily.CLASSIC)
    eps = check_probability(epsilon, "epsilon")
    k, n = spec.k, spec.N
    top = min(k - 1, n)
    if eps == 0.0:
        return 1.0
    if eps == 1.0:
        return 1.0 if top == n else 0.0
    log_eps = math.log(eps)
    log_rest = math.log1p(-eps)
    terms = []
    for i in range(top + 1):
        log_term = (n - i) * log_rest
        if i:
            log_term += math.log(math.comb(n, i)) + i * log_eps
        terms.append(math.exp(log_term))
    return min(1.0, max(0.0, math.fsum(terms)))


def phi_a(epsilon: float, spec: BoundSpec) -> float:
    """Union bound ``k (1 - epsilon)^N``. Not clamped: exceeds 1 for small epsilon."""
    _require(spec, BoundFamily.ADDITIVE)
    eps = check_probability(epsilon, "epsilon")
    return spec.k * _pow_one_minus(eps, spec.N)


def _ie_coefficient(i: int, k: int) -> int:
    # equals C(k, i) by the hockey-stick identity; kept in the summed form
    return sum(math.comb(i - 1 + j, j) for j in range(k - i + 1))


def validity_upper(spec: BoundSpec) -> float:
    """Largest epsilon at which ``spec`` may be evaluated."""
    if spec.family is BoundFamily.INCLUSION_EXCLUSION:
        return 1.0 / spec.k
    return 1.0


def phi_ie(epsilon: float, spec: BoundSpec) -> float:
    """Inclusion-exclusion miss probability for ``k`` disjoint sets of measure ``epsilon``.

    Raises ValidityRangeError for ``epsilon > 1/k``; callers should fall back
    to :func:`phi_a` there.
    """
    _require(spec, BoundFamily.INCLUSION_EXCLUSION)
    eps = check_probability(epsilon, "epsilon")
    k, n = spec.k, spec.N
    if eps > 1.0 / k:
        raise ValidityRangeError(f"inclusion-exclusion bound requires epsilon <= 1/k = {1.0 / k}, got {eps}")
    # k (1 - eps)^N minus a remainder that is nonnegative by the Bonferroni
    # inequalities; the leading term matches phi_a bit for bit and the
    # remainder is clamped to [0, leading] so rounding cannot break
    # 0 <= phi_ie <= phi_a
    leading = k * _pow_one_minus(eps, n)
    rest = []
    for i in range(2, k + 1):
        base = i * eps
        if base >= 1.0:
            continue
        sign = 1.0 if i % 2 == 0 else -1.0
        log_term = math.log(_ie_coefficient(i, k)) + (n * math.log1p(-base) if base > 0.0 else 0.0)
        rest.append(sign * math.exp(log_term))
    remainder = min(max(math.fsum(rest), 0.0), leading)
    return leading - remainder


_EVALUATORS = {
    BoundFamily.CLASSIC: phi_c,
    BoundFamily.ADDITIVE: phi_a,
    BoundFamily.INCLUSION_EXCLUSION: phi_ie,
}


def evaluate(epsilon: float, spec: BoundSpec) -> float:
    """Dispatch to the evaluator of ``spec.family``."""
    return _EVALUATORS[spec.family](epsilon, spec)


def _bisect_decreasing(func, target: float, lo: float, hi: float, max_iter: int = 200) -> float:
    """Solve ``func(x) == target`` for decreasing ``func`` with func(lo) >= target >= func(hi).

    Runs until the bracket collapses to adjacent floats, which is well past
    the 1e-12 requirement and keeps the round-trip residual small even where
    the bound is steep.
    """
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if func(mid) > target:
            lo = mid
        else:
            hi = mid
    f_lo, f_hi = func(lo), func(hi)
    return lo if abs(f_lo - target) <= abs(f_hi - target) else hi


def invert_bound(beta: float, spec: BoundSpec) -> float:
    """Return the epsilon at which the bound ``spec`` equals ``beta``.

    The additive family uses the closed form ``1 - (beta/k)^(1/N)``; the
    other two are bisected on their monotone domain.
    """
    try:
        beta = float(beta)
    except (TypeError, ValueError):
        raise DomainError(f"beta must be a real number, got {beta!r}") from None
    if math.isnan(beta):
        raise DomainError("beta is NaN")
    k, n = spec.k, spec.N

    if spec.family is BoundFamily.ADDITIVE:
        if not 0.0 <= beta <= k:
            raise RangeError(f"additive bound takes values in [0, {k}], got beta={beta}")
        return 1.0 - (beta / k) ** (1.0 / n)

    hi = validity_upper(spec)
    f = _EVALUATORS[spec.family]
    top = f(0.0, spec)
    bottom = f(hi, spec)
    if not bottom <= beta <= top:
        raise RangeError(f"beta={beta} outside attainable range [{bottom}, {top}] of {spec.family.value} bound")
    if beta == top:
        return 0.0
    if beta == bottom:
        return hi
    return _bisect_decreasing(lambda e: f(e, spec), beta, 0.0, hi)
