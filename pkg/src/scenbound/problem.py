"""Robust convex programs with a linear objective over a box.

A program is ``min c'x  s.t.  f(x, delta) <= 0 for all delta``, with the
uncertainty set represented only through a sampler and a metric.  Built-in
instances live in a small registry addressed by name (``circle``,
``circle-relaxed``, ``affine:<seed>``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._validation import check_positive_int
from .exceptions import DomainError

__all__ = [
    "UncertainProgram",
    "ProblemMetadata",
    "ScenarioSet",
    "rng_stream",
    "sample_scenarios",
    "make_circle_problem",
    "make_relaxed_circle_problem",
    "make_affine_family",
    "get_problem",
]

SQRT2 = math.sqrt(2.0)


def rng_stream(master_seed: int, stream_index: int) -> np.random.Generator:
    """Counter-based Philox generator keyed by ``(master_seed, stream_index)``.

    Distinct stream indices give independent streams, and the stream for a
    given index does not depend on which other streams were drawn.
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(stream_index),))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True, eq=False)
class UncertainProgram:
    """``min c'x`` over the box ``[lower, upper]`` subject to ``f(x, delta) <= 0``.

    ``constraint`` evaluates ``f`` at a single point; ``constraint_values``
    evaluates it for a stack of uncertainty points ``(n, m)`` at once and
    falls back to a Python loop when no vectorised form is supplied.
    ``sampler(rng, n)`` returns ``(n, m)`` i.i.d. draws.  ``perturb(rng,
    deltas, max_dist)`` moves every point within ``max_dist`` while staying
    in the uncertainty set; it is only needed for Lipschitz checks.
    """

    name: str
    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    constraint: Callable[[np.ndarray, np.ndarray], float]
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    uncertainty_dim: int
    metric: Callable[[np.ndarray, np.ndarray], float] = None
    batch_constraint: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    perturb: Optional[Callable[[np.random.Generator, np.ndarray, float], np.ndarray]] = None
    family: str = "generic"

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        lo = np.asarray(self.lower, dtype=float).ravel()
        hi = np.asarray(self.upper, dtype=float).ravel()
        if not (c.shape == lo.shape == hi.shape) or c.size == 0:
            raise DomainError("objective and box bounds must be non-empty vectors of equal length")
        if not np.all(np.isfinite(lo) & np.isfinite(hi)) or np.any(lo >= hi):
            raise DomainError("box must be compact with lower < upper in every coordinate")
        for arr in (c, lo, hi):
            arr.setflags(write=False)
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if self.metric is None:
            object.__setattr__(self, "metric", euclidean)

    @property
    def dimension(self) -> int:
        return self.objective.size

    def constraint_values(self, x: np.ndarray, deltas: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
        if self.batch_constraint is not None:
            return np.asarray(self.batch_constraint(x, deltas), dtype=float)
        return np.array([self.constraint(x, d) for d in deltas], dtype=float)

    def box_minimum(self) -> float:
        """``min_{x in box} c'x``, computed coordinatewise."""
        c = self.objective
        return float(np.sum(np.where(c >= 0, c * self.lower, c * self.upper)))

    def box_minimizer(self) -> np.ndarray:
        return np.where(self.objective >= 0, self.lower, self.upper)


@dataclass(frozen=True)
class ProblemMetadata:
    """Analytic facts about a program, each optional.

    ``regularity_phi`` lower-bounds the probability of a metric ball of radius
    ``r`` around any point of the uncertainty set and must be strictly
    increasing with ``phi(0) == 0``; ``regularity_phi_inverse`` is its exact
    inverse on ``[0, 1]``.
    """

    known_optimum: Optional[float] = None
    lipschitz_L_delta: Optional[float] = None
    slater_point: Optional[np.ndarray] = None
    slater_margin: Optional[float] = None
    regularity_phi: Optional[Callable[[float], float]] = None
    regularity_phi_inverse: Optional[Callable[[float], float]] = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.slater_point is not None:
            if self.slater_margin is None or not self.slater_margin < 0:
                raise DomainError("a Slater point needs a strictly negative slater_margin")
            object.__setattr__(self, "slater_point", np.asarray(self.slater_point, dtype=float))
        if self.lipschitz_L_delta is not None and self.lipschitz_L_delta < 0:
            raise DomainError("lipschitz_L_delta must be nonnegative")


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    samples: np.ndarray
    master_seed: Optional[int] = None
    trial_index: Optional[int] = None

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.samples, dtype=float))
        if s.shape[0] < 1:
            raise DomainError("a scenario set needs at least one sample")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.shape[0]


def sample_scenarios(program: UncertainProgram, N: int, master_seed: int, trial_index: int) -> ScenarioSet:
    """Draw ``N`` i.i.d. scenarios from the stream ``(master_seed, trial_index)``."""
    N = check_positive_int(N, "N")
    rng = rng_stream(master_seed, trial_index)
    return ScenarioSet(program.sampler(rng, N), master_seed=master_seed, trial_index=trial_index)


# --- uncertainty sets -----------------------------------------------------------


def euclidean(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


def sample_sphere(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    """Uniform draws on the unit sphere in R^m (the unit circle for m == 2)."""
    if m == 2:
        theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
        return np.column_stack([np.cos(theta), np.sin(theta)])
    g = rng.standard_normal((n, m))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def perturb_on_sphere(rng: np.random.Generator, deltas: np.ndarray, max_dist: float) -> np.ndarray:
    """Rotate each unit vector along a random great circle by a chord length in (0, max_dist]."""
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
    n, m = deltas.shape
    chord = rng.uniform(0.0, max_dist, size=n)
    chord = np.where(chord > 0.0, chord, max_dist)
    angle = 2.0 * np.arcsin(np.minimum(chord, 2.0) / 2.0)
    v = rng.standard_normal((n, m))
    v -= np.sum(v * deltas, axis=1, keepdims=True) * deltas
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    out = np.cos(angle)[:, None] * deltas + np.sin(angle)[:, None] * v
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def _circle_phi(r: float) -> float:
    # probability of an open Euclidean ball of radius r around a point of the circle
    r = float(r)
    if r <= 0.0:
        return 0.0
    if r >= 2.0:
        return 1.0
    return 2.0 / math.pi * math.asin(r / 2.0)


def _circle_phi_inverse(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"phi inverse defined on [0, 1], got {p}")
    return 2.0 * math.sin(math.pi * p / 2.0)


def _sphere2_phi(r: float) -> float:
    # cap of chord radius r on S^2 has area fraction r^2 / 4
    r = float(r)
    if r <= 0.0:
        return 0.0
    if r >= 2.0:
        return 1.0
    return r * r / 4.0


def _sphere2_phi_inverse(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"phi inverse defined on [0, 1], got {p}")
    return 2.0 * math.sqrt(p)


# --- the circle example -----------------------------------------------------------

_B = np.array([1.0, 1.0])


def _circle_f(x, delta) -> float:
    return abs(x[0] + _B @ np.asarray(delta, dtype=float)) - x[1]


def _circle_f_batch(x, deltas) -> np.ndarray:
    return np.abs(x[0] + deltas @ _B) - x[1]


def _circle_sampler(rng, n):
    return sample_sphere(rng, n, 2)


def _circle_program(name: str, x2_bound: float) -> UncertainProgram:
    return UncertainProgram(
        name=name,
        objective=np.array([0.0, 1.0]),
        lower=np.array([-1.0, -x2_bound]),
        upper=np.array([1.0, x2_bound]),
        constraint=_circle_f,
        batch_constraint=_circle_f_batch,
        sampler=_circle_sampler,
        uncertainty_dim=2,
        metric=euclidean,
        perturb=perturb_on_sphere,
        family="circle",
    )


def make_circle_problem() -> tuple[UncertainProgram, ProblemMetadata]:
    """``min x2  s.t. |x1 + b'delta| <= x2`` on the unit circle, ``b = (1, 1)``.

    The box is ``[-1, 1] x [-sqrt2, sqrt2]``.  No Slater point exists in this
    box (``sup_delta f(x, delta) = |x1| + sqrt2 - x2 >= 0``), so none is attached.
    """
    meta = ProblemMetadata(
        known_optimum=SQRT2,
        lipschitz_L_delta=SQRT2,
        regularity_phi=_circle_phi,
        regularity_phi_inverse=_circle_phi_inverse,
    )
    return _circle_program("circle", SQRT2), meta


def make_relaxed_circle_problem() -> tuple[UncertainProgram, ProblemMetadata]:
    """The circle example with the ``x2`` range widened to ``[-2, 2]``.

    ``x0 = (0, 2)`` is then a Slater point with margin ``sqrt2 - 2``.
    """
    meta = ProblemMetadata(
        known_optimum=SQRT2,
        lipschitz_L_delta=SQRT2,
        slater_point=np.array([0.0, 2.0]),
        slater_margin=SQRT2 - 2.0,
        regularity_phi=_circle_phi,
        regularity_phi_inverse=_circle_phi_inverse,
    )
    return _circle_program("circle-relaxed", 2.0), meta


# --- random affine family -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AffineCoefficients:
    """``f(x, delta) = a0'x - b0 + (A1'x - b1)'delta`` with ``delta`` on the unit sphere.

    ``A1`` has shape ``(d, m)``.
    """

    a0: np.ndarray
    b0: float
    A1: np.ndarray
    b1: np.ndarray

    def value(self, x, delta) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.a0 @ x - self.b0 + (self.A1.T @ x - self.b1) @ np.asarray(delta, dtype=float))

    def values(self, x, deltas) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.a0 @ x - self.b0 + deltas @ (self.A1.T @ x - self.b1)

    def worst_case(self, x) -> float:
        """``sup_delta f(x, delta)``, attained at the normalised direction of ``A1'x - b1``."""
        x = np.asarray(x, dtype=float)
        return float(self.a0 @ x - self.b0 + np.linalg.norm(self.A1.T @ x - self.b1))


def _box_vertices(lo, hi) -> np.ndarray:
    d = lo.size
    corners = np.array(np.meshgrid(*[[0, 1]] * d, indexing="ij")).reshape(d, -1).T
    return np.where(corners == 1, hi, lo)


_AFFINE_MARGIN = 0.4


def make_affine_family(seed: int) -> tuple[UncertainProgram, ProblemMetadata]:
    """Reproducible random instance with linear-in-x, affine-in-delta constraints.

    ``d`` is drawn from {2, 3, 4}, ``m`` from {2, 3}, the box is ``[-1, 1]^d``.
    A Slater point ``x0`` is built in by choosing ``b0`` so that
    ``sup_delta f(x0, delta) = -0.4`` exactly; instances where the robust
    constraint would not cut off the box minimiser are redrawn.  The known
    optimum is found by solving the program against its analytic worst case.
    """
    from .solver import solve_scp  # local import: the solver depends on this module

    seed = int(seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xAFF1,)))
    d = int(rng.integers(2, 5))
    m = int(rng.integers(2, 4))
    lo, hi = -np.ones(d), np.ones(d)
    for _ in range(1000):
        c = rng.standard_normal(d)
        c /= np.linalg.norm(c)
        A1 = 0.5 * rng.standard_normal((d, m))
        b1 = 0.5 * rng.standard_normal(m)
        x0 = rng.uniform(-0.3, 0.3, size=d)
        a0 = -c + 0.3 * rng.standard_normal(d)
        b0 = float(a0 @ x0 + np.linalg.norm(A1.T @ x0 - b1) + _AFFINE_MARGIN)
        coef = AffineCoefficients(a0=a0, b0=b0, A1=A1, b1=b1)
        x_box = np.where(c >= 0, lo, hi)
        if coef.worst_case(x_box) > 0.1:
            break
    else:  # pragma: no cover - the draw above succeeds with high probability
        raise RuntimeError("could not draw an affine instance with an active constraint")

    L_delta = max(float(np.linalg.norm(A1.T @ v - b1)) for v in _box_vertices(lo, hi))

    program = UncertainProgram(
        name=f"affine:{seed}",
        objective=c,
        lower=lo,
        upper=hi,
        constraint=coef.value,
        batch_constraint=coef.values,
        sampler=lambda g, n, _m=m: sample_sphere(g, n, _m),
        uncertainty_dim=m,
        metric=euclidean,
        perturb=perturb_on_sphere,
        family="affine",
    )
    robust = UncertainProgram(
        name=f"affine:{seed}:robust",
        objective=c,
        lower=lo,
        upper=hi,
        constraint=lambda x, _d: coef.worst_case(x),
        sampler=program.sampler,
        uncertainty_dim=m,
    )
    sol = solve_scp(robust, np.zeros((1, m)), compute_support=False)
    if sol.status != "optimal":  # pragma: no cover
        raise RuntimeError(f"robust solve for affine:{seed} ended with status {sol.status}")

    if m == 2:
        phi, phi_inv = _circle_phi, _circle_phi_inverse
    else:
        phi, phi_inv = _sphere2_phi, _sphere2_phi_inverse
    meta = ProblemMetadata(
        known_optimum=sol.objective,
        lipschitz_L_delta=L_delta,
        slater_point=x0,
        slater_margin=-_AFFINE_MARGIN,
        regularity_phi=phi,
        regularity_phi_inverse=phi_inv,
        notes={"coefficients": coef, "robust_optimizer": sol.x_star},
    )
    return program, meta


def get_problem(name: str) -> tuple[UncertainProgram, ProblemMetadata]:
    """Look up a built-in problem: ``circle``, ``circle-relaxed`` or ``affine:<seed>``."""
    key = str(name).strip().lower()
    if key == "circle":
        return make_circle_problem()
    if key in ("circle-relaxed", "circle_relaxed"):
        return make_relaxed_circle_problem()
    if key.startswith("affine:"):
        try:
            seed = int(key.split(":", 1)[1])
        except ValueError:
            raise DomainError(f"bad affine seed in {name!r}") from None
        return make_affine_family(seed)
    raise DomainError(f"unknown problem {name!r}; expected circle, circle-relaxed or affine:<seed>")
