"""Exact analysis of the circle example ``min x2 s.t. |x1 + b'delta| <= x2``.

The sets ``{b'delta >= sqrt2 - alpha}`` and ``{b'delta <= alpha - sqrt2}``
are antipodal caps of probability ``arccos((sqrt2 - alpha)/sqrt2)/pi``.
Hitting both caps forces ``g_N >= sqrt2 - alpha``, which turns the hitting
bounds into objective slacks ``h_a``, ``h`` and ``h_c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._validation import check_positive_int, check_probability
from .bounds import BoundFamily, BoundSpec, invert_bound, phi_ie
from .exceptions import DomainError

__all__ = ["CurvePoint", "measure_cap", "cap_slack", "curve_h", "relaxed_tail"]

SQRT2 = math.sqrt(2.0)
_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class CurvePoint:
    beta: float
    value: float
    family: BoundFamily


def measure_cap(alpha: float) -> float:
    """Probability of either cap at slack ``alpha`` in [0, 2 sqrt2]."""
    alpha = float(alpha)
    if not 0.0 <= alpha <= 2.0 * SQRT2 + _CLAMP_TOL:
        raise DomainError(f"alpha must lie in [0, 2*sqrt2], got {alpha}")
    alpha = min(alpha, 2.0 * SQRT2)
    # arccos(1 - alpha/sqrt2) in half-angle form, accurate at both ends of the range
    return 2.0 * math.atan2(math.sqrt(alpha), math.sqrt(2.0 * SQRT2 - alpha)) / math.pi


def cap_slack(p: float) -> float:
    """Inverse of :func:`measure_cap`: ``sqrt2 (1 - cos(pi p))``."""
    p = check_probability(p, "p")
    return 2.0 * SQRT2 * math.sin(math.pi * p / 2.0) ** 2


def curve_h(beta: float, N: int, family: BoundFamily | str = "inclusion_exclusion") -> CurvePoint:
    """Objective slack at confidence ``1 - beta`` for ``N`` samples.

    ``additive`` gives ``h_a``, ``inclusion_exclusion`` gives ``h`` and
    ``classic`` gives ``h_c = sqrt2 (1 - cos(pi Phi_c^-1(beta; 2, N))) / 2``,
    halved because the chance-constrained route only controls the sum of the
    two cap probabilities.
    """
    family = BoundFamily.parse(family)
    beta = check_probability(beta, "beta", open_low=True, open_high=True)
    N = check_positive_int(N, "N")
    eps = invert_bound(beta, BoundSpec(family, 2, N))
    value = cap_slack(eps)
    if family is BoundFamily.CLASSIC:
        value /= 2.0
    return CurvePoint(beta, value, family)


def relaxed_tail(alpha: float, N: int) -> float:
    """Probability that ``N`` samples hit both caps at slack ``alpha``; a lower bound on the tail."""
    p = measure_cap(alpha)
    return 1.0 - phi_ie(p, BoundSpec(BoundFamily.INCLUSION_EXCLUSION, 2, check_positive_int(N, "N")))
