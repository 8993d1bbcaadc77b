"""Probabilistic bounds on the optimality gap of convex scenario programs."""

from .bounds import BoundFamily, BoundSpec, evaluate, invert_bound, phi_a, phi_c, phi_ie
from .circle_example import cap_slack, curve_h, measure_cap, relaxed_tail
from .empirics import (
    CoverageReport,
    TailEstimate,
    complexity_probe,
    empirical_optimal_ulb,
    estimate_gstar,
    estimate_tail,
    hit_all_simulation,
    validate_certificate,
)
from .exceptions import AssumptionError, DomainError, RangeError, ScenboundError, SolverError, ValidityRangeError
from .problem import (
    ProblemMetadata,
    ScenarioSet,
    UncertainProgram,
    get_problem,
    make_affine_family,
    make_circle_problem,
    make_relaxed_circle_problem,
    sample_scenarios,
)
from .sensitivity import LipschitzData, UlbCertificate, certify, compute_lsp, ulb_explicit, verify_g_lipschitz
from .solver import ScenarioSolution, SolverOptions, count_support, solve, solve_scp

__version__ = "0.1.0"
