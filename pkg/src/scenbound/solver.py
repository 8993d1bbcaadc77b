"""Scenario programs: Kelley cutting planes and the closed form for the circle example."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .lp import solve_box_lp
from .problem import ScenarioSet, UncertainProgram

__all__ = [
    "SolverOptions",
    "ScenarioSolution",
    "solve_scp",
    "solve_circle_analytic",
    "circle_objectives",
    "count_support",
    "solve",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    feasibility_tol: float = 1e-9
    objective_tol: float = 1e-8
    max_iter: int = 10_000
    fd_step: float = 1e-7
    active_tol: float = 1e-7


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True, eq=False)
class ScenarioSolution:
    """Result of one scenario program.

    ``support_indices`` are 0-based positions in the scenario array.  For
    ``status == "infeasible"`` ``x_star`` is NaN and ``objective`` is +inf.
    """

    x_star: np.ndarray
    objective: float
    support_indices: tuple
    status: str
    iterations: int
    certificate_gap: float

    @property
    def support_size(self) -> int:
        return len(self.support_indices)


def _as_samples(scenarios) -> np.ndarray:
    if isinstance(scenarios, ScenarioSet):
        return scenarios.samples
    s = np.atleast_2d(np.asarray(scenarios, dtype=float))
    if s.shape[0] == 0:
        raise DomainError("at least one scenario is required")
    return s


def _subgradients(program: UncertainProgram, x: np.ndarray, deltas: np.ndarray, h: float) -> np.ndarray:
    """Central-difference gradients of ``f(., delta)`` at ``x`` for each row of ``deltas``."""
    d = x.size
    grads = np.empty((deltas.shape[0], d))
    for j in range(d):
        step = np.zeros(d)
        step[j] = h
        grads[:, j] = (program.constraint_values(x + step, deltas) - program.constraint_values(x - step, deltas)) / (2 * h)
    return grads


def _kelley(program: UncertainProgram, deltas: np.ndarray, opts: SolverOptions):
    c, lo, hi = program.objective, program.lower, program.upper
    d = c.size
    cut_A = np.empty((0, d))
    cut_b = np.empty(0)
    seen: set = set()
    x = program.box_minimizer()
    for it in range(1, opts.max_iter + 1):
        lp = solve_box_lp(c, cut_A, cut_b, lo, hi)
        if lp.status == "infeasible":
            return np.full(d, np.nan), "infeasible", it, float("inf")
        x = lp.x
        lower_bound = lp.objective
        vals = program.constraint_values(x, deltas)
        if vals.max() <= opts.feasibility_tol:
            # the LP iterate is itself feasible, so it is the incumbent
            gap = max(0.0, float(c @ x) - lower_bound)
            if gap <= opts.objective_tol:
                return x, "optimal", it, gap
        violated = np.flatnonzero(vals > opts.feasibility_tol)
        grads = _subgradients(program, x, deltas[violated], opts.fd_step)
        rhs = grads @ x - vals[violated]
        # every new cut is violated at x by f(x) > tol, so only exact repeats
        # (from repeated scenarios) are dropped; near-repeats still move x
        new_rows = []
        for g, r in zip(grads, rhs):
            row = np.append(g, r)
            key = row.tobytes()
            if key not in seen:
                seen.add(key)
                new_rows.append(row)
        if not new_rows:
            log.debug("cutting planes stalled after %d iterations", it)
            return x, "max_iter", it, float("nan")
        new_rows = np.array(new_rows)
        cut_A = np.vstack([cut_A, new_rows[:, :d]])
        cut_b = np.concatenate([cut_b, new_rows[:, d]])
    return x, "max_iter", opts.max_iter, float("nan")


def solve_scp(program: UncertainProgram, scenarios, options: SolverOptions | None = None, *, compute_support: bool = True) -> ScenarioSolution:
    """Solve ``min c'x`` over the box subject to ``f(x, delta_i) <= 0`` for every scenario.

    Uses Kelley's cutting-plane method with finite-difference subgradients:
    each round solves an LP over the accumulated cuts and adds a cut for
    every scenario the LP point violates.  With ``compute_support`` the
    support set is found by re-solving without each active scenario.
    """
    opts = options or DEFAULT_OPTIONS
    deltas = _as_samples(scenarios)
    x, status, iters, gap = _kelley(program, deltas, opts)
    if status == "infeasible":
        return ScenarioSolution(x, float("inf"), (), status, iters, float("inf"))
    objective = float(program.objective @ x)
    support: tuple = ()
    if compute_support and status == "optimal":
        support = _support_by_removal(program, deltas, x, objective, opts)
    return ScenarioSolution(x, objective, support, status, iters, gap)


def _support_by_removal(program, deltas, x, objective, opts) -> tuple:
    vals = program.constraint_values(x, deltas)
    active = np.flatnonzero(np.abs(vals) <= opts.active_tol)
    reduced_objective = {}
    for i in active:
        if deltas.shape[0] == 1:
            reduced_objective[int(i)] = program.box_minimum()
            continue
        rest = np.delete(deltas, i, axis=0)
        sub, status, _, _ = _kelley(program, rest, opts)
        if status == "optimal":
            reduced_objective[int(i)] = float(program.objective @ sub)
    return tuple(sorted(i for i, v in reduced_objective.items() if objective - v > opts.objective_tol))


_B = np.array([1.0, 1.0])


def _circle_closed_form(eta_hi, eta_lo):
    x1 = np.clip(-(eta_hi + eta_lo) / 2.0, -1.0, 1.0)
    x2 = np.maximum(np.abs(x1 + eta_hi), np.abs(x1 + eta_lo))
    return x1, x2


def solve_circle_analytic(scenarios) -> ScenarioSolution:
    """Closed-form solution of the circle example's scenario program.

    With ``eta_hi, eta_lo`` the extreme values of ``b'delta_i``, the optimum is
    ``x1 = clip(-(eta_hi + eta_lo)/2, -1, 1)`` and
    ``x2 = max(|x1 + eta_hi|, |x1 + eta_lo|)``.
    """
    deltas = _as_samples(scenarios)
    eta = deltas @ _B
    i_hi, i_lo = int(np.argmax(eta)), int(np.argmin(eta))
    x1, x2 = _circle_closed_form(eta[i_hi], eta[i_lo])
    x = np.array([float(x1), float(x2)])

    support = []
    if eta.size == 1:
        support = [0]
    else:
        for i in sorted({i_hi, i_lo}):
            rest = np.delete(eta, i)
            _, x2_rest = _circle_closed_form(rest.max(), rest.min())
            if x2 - x2_rest > 0.0:
                support.append(i)
    return ScenarioSolution(x, float(x2), tuple(support), "optimal", 0, 0.0)


def circle_objectives(samples: np.ndarray) -> np.ndarray:
    """Vectorised circle optimum for a stack of scenario sets of shape ``(T, N, 2)``."""
    eta = np.asarray(samples, dtype=float) @ _B
    _, x2 = _circle_closed_form(eta.max(axis=-1), eta.min(axis=-1))
    return x2


def count_support(program: UncertainProgram, scenarios, options: SolverOptions | None = None) -> int:
    sol = solve_scp(program, scenarios, options, compute_support=True)
    if sol.status != "optimal":
        raise DomainError(f"support count needs an optimal solve, got status {sol.status}")
    return sol.support_size


def solve(program: UncertainProgram, scenarios, method: str = "auto", options: SolverOptions | None = None, *, compute_support: bool = False) -> ScenarioSolution:
    """Solve with the closed form when one exists (``method="auto"``) or with Kelley."""
    if method not in ("auto", "kelley", "analytic"):
        raise DomainError(f"unknown solver method {method!r}")
    if method == "analytic" or (method == "auto" and program.family == "circle"):
        if program.family != "circle":
            raise DomainError(f"no closed form for program {program.name!r}")
        return solve_circle_analytic(scenarios)
    return solve_scp(program, scenarios, options, compute_support=compute_support)
