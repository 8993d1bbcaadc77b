"""Monte Carlo estimates around the scenario optimum ``g_N``.

Trial ``t`` of any experiment draws its scenarios from the stream
``(master_seed, t)``, so results are a pure function of the inputs and do not
depend on the order in which trials are evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import check_positive_int, check_probability
from .exceptions import DomainError, SolverError
from .problem import ProblemMetadata, UncertainProgram, rng_stream
from .sensitivity import UlbCertificate
from .solver import SolverOptions, circle_objectives, solve

__all__ = [
    "TailEstimate",
    "CoverageReport",
    "scenario_objectives",
    "estimate_tail",
    "empirical_optimal_ulb",
    "estimate_gstar",
    "complexity_probe",
    "hit_all_simulation",
    "coverage_report",
    "validate_certificate",
]


@dataclass(frozen=True, eq=False)
class TailEstimate:
    """Sorted scenario optima from ``T`` independent trials of ``N`` scenarios each."""

    g_values: np.ndarray
    N: int
    T: int
    master_seed: int
    known_optimum: float

    def __post_init__(self):
        g = np.sort(np.asarray(self.g_values, dtype=float))
        if g.size < 1:
            raise DomainError("a tail estimate needs at least one trial")
        g.setflags(write=False)
        object.__setattr__(self, "g_values", g)

    def p_hat(self, alpha) -> np.ndarray | float:
        """Fraction of trials with ``J* - alpha <= g``; vectorised over ``alpha``."""
        a = np.asarray(alpha, dtype=float)
        if np.any(a < 0):
            raise DomainError("alpha must be nonnegative")
        below = np.searchsorted(self.g_values, self.known_optimum - a, side="left")
        p = (self.T - below) / self.T
        return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class CoverageReport:
    """Achieved coverage against a nominal target.

    ``stderr`` is the binomial standard error at the target; for a single
    trial it is replaced by the worst-case bound 0.5 and ``stderr_is_bound``
    is set.  The verdict passes when ``achieved >= target - 3 stderr``.
    """

    target: float
    achieved: float
    stderr: float
    trials: int
    verdict: str
    stderr_is_bound: bool = False

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_text(self) -> str:
        lines = [
            f"target={self.target:.17g}",
            f"achieved={self.achieved:.17g}",
            f"stderr={self.stderr:.17g}",
            f"trials={self.trials}",
            f"verdict={self.verdict}",
        ]
        if self.stderr_is_bound:
            lines.append("stderr_bound=0.5")
        return "\n".join(lines) + "\n"


def coverage_report(hits: int, trials: int, target: float) -> CoverageReport:
    trials = check_positive_int(trials, "trials")
    achieved = hits / trials
    if trials == 1:
        stderr, is_bound = 0.5, True
    else:
        stderr, is_bound = math.sqrt(target * (1.0 - target) / trials), False
    verdict = "pass" if achieved >= target - 3.0 * stderr else "fail"
    return CoverageReport(target, achieved, stderr, trials, verdict, is_bound)


def _known_optimum(metadata: ProblemMetadata | float | None) -> float:
    if isinstance(metadata, ProblemMetadata):
        value = metadata.known_optimum
    else:
        value = metadata
    if value is None:
        raise DomainError("this operation needs the true optimum J* (known_optimum)")
    return float(value)


def scenario_objectives(
    program: UncertainProgram,
    N: int,
    T: int,
    master_seed: int,
    *,
    method: str = "auto",
    options: SolverOptions | None = None,
) -> np.ndarray:
    """``g_N`` for trials ``0..T-1`` in trial order."""
    N = check_positive_int(N, "N")
    T = check_positive_int(T, "T")
    samples = [program.sampler(rng_stream(master_seed, t), N) for t in range(T)]
    if program.family == "circle" and method in ("auto", "analytic"):
        return circle_objectives(np.stack(samples))
    out = np.empty(T)
    for t, omega in enumerate(samples):
        sol = solve(program, omega, method, options)
        if sol.status != "optimal":
            raise SolverError(f"scenario program ended with status {sol.status}", trial_index=t)
        out[t] = sol.objective
    return out


def estimate_tail(
    program: UncertainProgram,
    N: int,
    T: int,
    master_seed: int,
    known_optimum: ProblemMetadata | float | None = None,
    **solve_kwargs,
) -> TailEstimate:
    """Empirical distribution of ``g_N`` over ``T`` independent trials."""
    j_star = _known_optimum(known_optimum)
    g = scenario_objectives(program, N, T, master_seed, **solve_kwargs)
    return TailEstimate(g, N, T, master_seed, j_star)


def empirical_optimal_ulb(tail: TailEstimate, varepsilon: float) -> float:
    """Largest slack at which the empirical tail probability is still ``<= varepsilon``.

    This is ``J*`` minus the ``ceil((1 - varepsilon) T)``-th smallest ``g``,
    floored at zero.
    """
    eps = check_probability(varepsilon, "varepsilon", open_low=True, open_high=True)
    T = tail.T
    rank = T - math.floor(eps * T + 1e-9)  # 1-based
    return max(0.0, tail.known_optimum - float(tail.g_values[rank - 1]))


def estimate_gstar(
    program: UncertainProgram,
    k: int,
    M: int,
    master_seed: int = 0,
    *,
    stop_at: Optional[float] = None,
    method: str = "auto",
    options: SolverOptions | None = None,
) -> float:
    """Best-of-``M`` lower estimate of ``sup_omega g_k(omega)`` over ``k``-point samples.

    All ``M`` samples come from one stream keyed by ``(master_seed, k)`` and
    are drawn in order, so the estimate is nondecreasing in ``M``.  With
    ``stop_at`` the search returns as soon as a value reaches it.
    """
    k = check_positive_int(k, "k")
    M = check_positive_int(M, "M")
    rng = rng_stream(master_seed, k)
    draws = program.sampler(rng, M * k).reshape(M, k, program.uncertainty_dim)
    if program.family == "circle" and method in ("auto", "analytic"):
        return float(circle_objectives(draws).max())
    best = -math.inf
    for i, omega in enumerate(draws):
        sol = solve(program, omega, method, options)
        if sol.status != "optimal":
            raise SolverError(f"scenario program ended with status {sol.status}", trial_index=i)
        best = max(best, sol.objective)
        if stop_at is not None and best >= stop_at:
            break
    return best


def complexity_probe(
    program: UncertainProgram,
    known_optimum: ProblemMetadata | float,
    k_max: int,
    M: int,
    tol: float,
    master_seed: int = 0,
    **solve_kwargs,
) -> Optional[int]:
    """Smallest ``k <= k_max`` whose best-of-``M`` optimum comes within ``tol`` of ``J*``.

    Returns None when no ``k`` up to ``k_max`` gets there.  A returned ``k`` is
    evidence that the complexity is at most ``k``; it is an estimate, since
    random search can only approach the supremum from below.
    """
    j_star = _known_optimum(known_optimum)
    k_max = check_positive_int(k_max, "k_max")
    threshold = j_star - float(tol)
    for k in range(1, k_max + 1):
        if estimate_gstar(program, k, M, master_seed, stop_at=threshold, **solve_kwargs) >= threshold:
            return k
    return None


def hit_all_simulation(k: int, epsilon: float, N: int, T: int, master_seed: int = 0, *, chunk: int = 4096) -> float:
    """Fraction of ``T`` trials in which ``N`` uniform draws on [0, 1) hit all of ``k`` disjoint intervals.

    Interval ``j`` is ``[j epsilon, (j + 1) epsilon)``.
    """
    k = check_positive_int(k, "k")
    N = check_positive_int(N, "N")
    T = check_positive_int(T, "T")
    eps = check_probability(epsilon, "epsilon")
    if k * eps > 1.0:
        raise DomainError(f"k * epsilon must be <= 1, got {k * eps}")
    if eps == 0.0:
        return 0.0
    hits = 0
    for start in range(0, T, chunk):
        size = min(chunk, T - start)
        u = rng_stream(master_seed, start // chunk).random((size, N))
        cell = np.minimum((u / eps).astype(np.intp), k)
        seen = np.zeros((size, k + 1), dtype=bool)
        seen[np.arange(size)[:, None], cell] = True
        hits += int(np.count_nonzero(seen[:, :k].all(axis=1)))
    return hits / T


def validate_certificate(
    program: UncertainProgram,
    certificate: UlbCertificate,
    T: int,
    master_seed: int,
    known_optimum: ProblemMetadata | float,
    **solve_kwargs,
) -> CoverageReport:
    """Fraction of fresh trials with ``J* <= g_N + alpha``, judged against ``1 - beta``."""
    j_star = _known_optimum(known_optimum)
    g = scenario_objectives(program, certificate.N, T, master_seed, **solve_kwargs)
    hits = int(np.count_nonzero(j_star <= g + certificate.alpha))
    return coverage_report(hits, T, 1.0 - certificate.beta)
