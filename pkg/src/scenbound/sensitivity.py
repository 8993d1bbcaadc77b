"""Lipschitz constants of the scenario optimum and the certificates built from them.

For a program with a Slater point ``x0`` the scenario optimum ``g_N`` is
Lipschitz in the sampled points with constant ``L_sp * L_delta``, where
``L_sp = (min_box c'x - c'x0) / sup_delta f(x0, delta)``.  Combined with a
ball-measure regularity function ``phi`` and one of the hitting bounds this
gives a slack ``alpha`` with ``P[J* - g_N <= alpha] >= 1 - beta``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._validation import check_positive_int, check_probability
from .bounds import BoundFamily, BoundSpec, evaluate, invert_bound
from .exceptions import AssumptionError, DomainError, RangeError, SolverError
from .problem import ProblemMetadata, UncertainProgram, rng_stream
from .solver import SolverOptions, solve

__all__ = [
    "LipschitzData",
    "UlbCertificate",
    "compute_lsp",
    "lipschitz_data",
    "ulb_explicit",
    "certify",
    "verify_g_lipschitz",
]

log = logging.getLogger(__name__)

CERTIFICATE_METHODS = ("sensitivity_additive", "sensitivity_ie", "empirical", "exact_example")


@dataclass(frozen=True)
class LipschitzData:
    L_delta: float
    L_sp: float

    def __post_init__(self):
        for name in ("L_delta", "L_sp"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"{name} must be finite and nonnegative, got {v}")

    @property
    def L_g(self) -> float:
        return self.L_sp * self.L_delta


@dataclass(frozen=True)
class UlbCertificate:
    """A slack ``alpha`` with ``P^N[J* - g_N(omega) <= alpha] >= 1 - beta``.

    ``epsilon`` is the per-ball probability level the slack was built from.
    ``small_sample`` flags ``N < 10 d``, which is allowed but loose.
    """

    method: str
    beta: float
    epsilon: float
    alpha: float
    N: int
    d: int
    constants: Optional[LipschitzData] = None
    small_sample: bool = False

    def __post_init__(self):
        if self.method not in CERTIFICATE_METHODS:
            raise DomainError(f"unknown certificate method {self.method!r}")
        if not self.alpha >= 0:
            raise DomainError(f"alpha must be >= 0, got {self.alpha}")

    def to_text(self) -> str:
        """Flat ``key=value`` block, one field per line, floats to 17 significant digits."""
        L_delta = "" if self.constants is None else f"{self.constants.L_delta:.17g}"
        L_sp = "" if self.constants is None else f"{self.constants.L_sp:.17g}"
        lines = [
            f"method={self.method}",
            f"beta={self.beta:.17g}",
            f"epsilon={self.epsilon:.17g}",
            f"alpha={self.alpha:.17g}",
            f"L_delta={L_delta}",
            f"L_sp={L_sp}",
            f"N={self.N}",
            f"d={self.d}",
        ]
        if self.small_sample:
            lines.append("warning=small_sample")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "UlbCertificate":
        fields = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise DomainError(f"malformed certificate line {line!r}")
            fields[key.strip()] = value.strip()
        constants = None
        if fields.get("L_delta") and fields.get("L_sp"):
            constants = LipschitzData(float(fields["L_delta"]), float(fields["L_sp"]))
        return cls(
            method=fields["method"],
            beta=float(fields["beta"]),
            epsilon=float(fields["epsilon"]),
            alpha=float(fields["alpha"]),
            N=int(fields["N"]),
            d=int(fields["d"]),
            constants=constants,
            small_sample=fields.get("warning") == "small_sample",
        )


def compute_lsp(program: UncertainProgram, metadata: ProblemMetadata) -> float:
    """``(min_box c'x - c'x0) / sup_delta f(x0, delta)`` using the exact Slater margin."""
    if metadata.slater_point is None or metadata.slater_margin is None:
        raise AssumptionError(5, f"program {program.name!r} has no Slater point")
    if not metadata.slater_margin < 0:
        raise AssumptionError(5, f"Slater margin must be negative, got {metadata.slater_margin}")
    x0 = np.asarray(metadata.slater_point, dtype=float)
    numerator = program.box_minimum() - float(program.objective @ x0)
    return max(0.0, numerator / metadata.slater_margin)


def lipschitz_data(program: UncertainProgram, metadata: ProblemMetadata) -> LipschitzData:
    if metadata.lipschitz_L_delta is None:
        raise AssumptionError(6, f"program {program.name!r} has no Lipschitz constant in delta")
    return LipschitzData(L_delta=float(metadata.lipschitz_L_delta), L_sp=compute_lsp(program, metadata))


def ulb_explicit(L_g: float, phi_inverse: Callable[[float], float], varepsilon: float, d: int, N: int) -> float:
    """Slack ``L_g * phi_inverse(1 - ((1 - varepsilon)/d)^(1/N))`` reached with probability ``varepsilon``."""
    varepsilon = check_probability(varepsilon, "varepsilon", open_high=True)
    d = check_positive_int(d, "d")
    N = check_positive_int(N, "N")
    level = 1.0 - ((1.0 - varepsilon) / d) ** (1.0 / N)
    if not 0.0 <= level <= 1.0:
        raise RangeError(f"ball probability {level} outside the domain of phi inverse")
    try:
        radius = phi_inverse(level)
    except DomainError as exc:
        raise RangeError(f"no certificate at varepsilon={varepsilon}: {exc}") from exc
    return L_g * radius


def certify(program: UncertainProgram, metadata: ProblemMetadata, N: int, beta: float, family: BoundFamily | str = "additive") -> UlbCertificate:
    """Build the sensitivity certificate ``alpha = L_sp L_delta phi^-1(Phi^-1(beta; d, N))``.

    ``family`` selects the additive bound or the inclusion-exclusion bound;
    the latter needs ``beta >= Phi(1/d; d, N)``.
    """
    family = BoundFamily.parse(family)
    if family is BoundFamily.CLASSIC:
        raise DomainError("certificates use the additive or inclusion_exclusion family")
    N = check_positive_int(N, "N")
    beta = check_probability(beta, "beta", open_low=True, open_high=True)
    d = program.dimension
    if N < d:
        raise DomainError(f"need N >= d = {d}, got N={N}")
    if metadata.regularity_phi_inverse is None:
        raise AssumptionError(4, f"program {program.name!r} has no ball-measure regularity function")
    constants = lipschitz_data(program, metadata)

    spec = BoundSpec(family, d, N)
    if family is BoundFamily.INCLUSION_EXCLUSION:
        floor = evaluate(1.0 / d, spec)
        if beta < floor:
            raise RangeError(f"inclusion-exclusion certificate needs beta >= {floor:.6g}")
    epsilon = invert_bound(beta, spec)
    alpha = constants.L_g * metadata.regularity_phi_inverse(epsilon)
    method = "sensitivity_additive" if family is BoundFamily.ADDITIVE else "sensitivity_ie"
    small = N < 10 * d
    if small:
        log.warning("certificate with N=%d < 10*d=%d is valid but loose", N, 10 * d)
    return UlbCertificate(method, beta, epsilon, alpha, N, d, constants, small)


def verify_g_lipschitz(
    program: UncertainProgram,
    metadata: ProblemMetadata,
    T: int,
    N: int,
    master_seed: int = 0,
    *,
    max_dist: float = 0.1,
    method: str = "kelley",
    options: SolverOptions | None = None,
) -> float:
    """Largest observed ``|g_N(w) - g_N(w')| / max_i |delta_i - delta_i'|`` over ``T`` pairs.

    Each ``w'`` moves every point of ``w`` along the uncertainty set by at
    most ``max_dist``.  Pairs whose largest move is below 1e-12 are skipped.
    The returned quotient should not exceed ``L_sp * L_delta``.
    """
    compute_lsp(program, metadata)
    T = check_positive_int(T, "T")
    N = check_positive_int(N, "N")
    if program.perturb is None:
        raise DomainError(f"program {program.name!r} has no perturbation rule")
    worst = 0.0
    for t in range(T):
        rng = rng_stream(master_seed, t)
        omega = program.sampler(rng, N)
        omega_p = program.perturb(rng, omega, max_dist)
        shift = max(program.metric(a, b) for a, b in zip(omega, omega_p))
        if shift < 1e-12:
            continue
        sol = solve(program, omega, method, options)
        sol_p = solve(program, omega_p, method, options)
        for s in (sol, sol_p):
            if s.status != "optimal":
                raise SolverError(f"scenario program ended with status {s.status}", trial_index=t)
        worst = max(worst, abs(sol.objective - sol_p.objective) / shift)
    return worst
