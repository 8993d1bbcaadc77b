import math

import numpy as np
import pytest
from scipy.optimize import minimize

from scenbound.exceptions import DomainError
from scenbound.problem import (
    ProblemMetadata,
    ScenarioSet,
    get_problem,
    make_affine_family,
    make_circle_problem,
    make_relaxed_circle_problem,
    perturb_on_sphere,
    rng_stream,
    sample_scenarios,
    sample_sphere,
)

SQRT2 = math.sqrt(2.0)
BUILTINS = ["circle", "circle-relaxed", "affine:0", "affine:1", "affine:2"]


def test_circle_metadata():
    program, meta = make_circle_problem()
    assert meta.known_optimum == SQRT2
    assert meta.lipschitz_L_delta == SQRT2
    assert meta.slater_point is None
    assert program.dimension == 2
    np.testing.assert_array_equal(program.lower, [-1.0, -SQRT2])
    np.testing.assert_array_equal(program.upper, [1.0, SQRT2])


def test_circle_constraint_active_at_optimum():
    program, _ = make_circle_problem()
    delta = np.array([SQRT2 / 2, SQRT2 / 2])
    assert program.constraint(np.array([0.0, SQRT2]), delta) == pytest.approx(0.0, abs=1e-15)


def test_circle_regularity_endpoints():
    _, meta = make_circle_problem()
    assert meta.regularity_phi(0.0) == 0.0
    assert meta.regularity_phi(2.0) == 1.0
    for p in np.linspace(0, 1, 11):
        assert meta.regularity_phi(meta.regularity_phi_inverse(p)) == pytest.approx(p, abs=1e-14)


def test_relaxed_circle_metadata():
    program, meta = make_relaxed_circle_problem()
    assert meta.known_optimum == SQRT2
    assert meta.slater_margin == pytest.approx(SQRT2 - 2.0, abs=1e-15)
    np.testing.assert_array_equal(meta.slater_point, [0.0, 2.0])
    np.testing.assert_array_equal(program.upper, [1.0, 2.0])


def test_metadata_rejects_nonnegative_margin():
    with pytest.raises(DomainError):
        ProblemMetadata(slater_point=np.zeros(2), slater_margin=0.0)


def test_get_problem_names():
    assert get_problem("circle")[0].name == "circle"
    assert get_problem("circle-relaxed")[0].name == "circle-relaxed"
    assert get_problem("affine:3")[0].name == "affine:3"
    for bad in ("square", "affine:x"):
        with pytest.raises(DomainError):
            get_problem(bad)


# --- sampling -------------------------------------------------------------


def test_sample_scenarios_deterministic():
    program, _ = make_circle_problem()
    a = sample_scenarios(program, 5, 123, 7)
    b = sample_scenarios(program, 5, 123, 7)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert (a.master_seed, a.trial_index) == (123, 7)
    assert len(a) == 5
    c = sample_scenarios(program, 5, 123, 8)
    assert not np.array_equal(a.samples, c.samples)


def test_streams_do_not_depend_on_draw_order():
    first = rng_stream(9, 4).random(3)
    rng_stream(9, 3).random(100)
    np.testing.assert_array_equal(first, rng_stream(9, 4).random(3))


def test_circle_samples_on_unit_circle():
    program, _ = make_circle_problem()
    s = sample_scenarios(program, 1000, 1, 0).samples
    np.testing.assert_allclose(np.linalg.norm(s, axis=1), 1.0, atol=1e-12)


def test_scenario_set_rejects_empty():
    with pytest.raises(DomainError):
        ScenarioSet(np.empty((0, 2)))


def test_circle_projection_mean_is_zero():
    program, _ = make_circle_problem()
    n = 10**6
    eta = program.sampler(rng_stream(2024, 0), n) @ np.array([1.0, 1.0])
    # Var(b'delta) = |b|^2 / 2 = 1 for uniform directions in the plane
    assert abs(eta.mean()) <= 3.0 / math.sqrt(n)


@pytest.mark.parametrize("m", [2, 3])
def test_sphere_sampler_is_isotropic(m):
    s = sample_sphere(rng_stream(5, m), 200_000, m)
    np.testing.assert_allclose(np.linalg.norm(s, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(s.mean(axis=0), 0.0, atol=0.01)
    np.testing.assert_allclose(s.T @ s / s.shape[0], np.eye(m) / m, atol=0.01)


@pytest.mark.parametrize("m", [2, 3])
def test_perturbation_stays_on_sphere_within_distance(m):
    rng = rng_stream(11, m)
    d = sample_sphere(rng, 500, m)
    p = perturb_on_sphere(rng, d, 0.1)
    np.testing.assert_allclose(np.linalg.norm(p, axis=1), 1.0, atol=1e-12)
    dist = np.linalg.norm(p - d, axis=1)
    assert dist.max() <= 0.1 + 1e-12
    assert dist.min() > 0.0


@pytest.mark.parametrize("name", BUILTINS)
def test_metric_symmetric_and_zero_on_diagonal(name):
    program, _ = get_problem(name)
    s = program.sampler(rng_stream(3, 0), 50)
    for a, b in zip(s[:-1], s[1:]):
        assert program.metric(a, a) == 0.0
        assert program.metric(a, b) == program.metric(b, a)


def test_circle_phi_lower_bounds_ball_probability():
    _, meta = make_circle_problem()
    rng = rng_stream(77, 0)
    n = 10**5
    sigma_max = 0.5 / math.sqrt(n)
    for i in range(100):
        center = sample_sphere(rng, 1, 2)[0]
        r = rng.uniform(0.0, 2.0)
        r = r if r > 0 else 2.0
        pts = sample_sphere(rng, n, 2)
        frac = np.mean(np.linalg.norm(pts - center, axis=1) < r)
        assert frac >= meta.regularity_phi(r) - 3 * sigma_max


def test_sphere2_phi_lower_bounds_ball_probability():
    program, meta = next(
        (p, m) for p, m in (make_affine_family(s) for s in range(20)) if p.uncertainty_dim == 3
    )
    rng = rng_stream(78, 0)
    n = 10**5
    for _ in range(20):
        center = sample_sphere(rng, 1, 3)[0]
        r = rng.uniform(0.05, 2.0)
        frac = np.mean(np.linalg.norm(sample_sphere(rng, n, 3) - center, axis=1) < r)
        assert frac >= meta.regularity_phi(r) - 3 * 0.5 / math.sqrt(n)


@pytest.mark.parametrize("name", BUILTINS)
def test_constraint_convex_in_x(name):
    program, _ = get_problem(name)
    rng = rng_stream(99, 0)
    d = program.dimension
    for _ in range(10_000 // 100):
        x = rng.uniform(program.lower, program.upper, size=(100, d))
        y = rng.uniform(program.lower, program.upper, size=(100, d))
        deltas = program.sampler(rng, 100)
        for lam in (0.25, 0.5, 0.75):
            for xi, yi, di in zip(x, y, deltas):
                lhs = program.constraint(lam * xi + (1 - lam) * yi, di)
                rhs = lam * program.constraint(xi, di) + (1 - lam) * program.constraint(yi, di)
                assert lhs <= rhs + 1e-12


@pytest.mark.parametrize("name", BUILTINS)
def test_batch_constraint_matches_pointwise(name):
    program, _ = get_problem(name)
    rng = rng_stream(4, 4)
    x = rng.uniform(program.lower, program.upper)
    deltas = program.sampler(rng, 20)
    expected = [program.constraint(x, dl) for dl in deltas]
    np.testing.assert_allclose(program.constraint_values(x, deltas), expected, rtol=0, atol=1e-14)


# --- affine family -----------------------------------------------------------


def test_affine_family_deterministic():
    p1, m1 = make_affine_family(5)
    p2, m2 = make_affine_family(5)
    np.testing.assert_array_equal(p1.objective, p2.objective)
    np.testing.assert_array_equal(m1.slater_point, m2.slater_point)
    assert m1.known_optimum == m2.known_optimum
    assert m1.lipschitz_L_delta == m2.lipschitz_L_delta
    x = np.full(p1.dimension, 0.1)
    delta = p1.sampler(rng_stream(0, 0), 1)[0]
    assert p1.constraint(x, delta) == p2.constraint(x, delta)


@pytest.mark.parametrize("seed", range(5))
def test_affine_shapes(seed):
    program, meta = make_affine_family(seed)
    assert program.dimension in (2, 3, 4)
    assert program.uncertainty_dim in (2, 3)
    assert meta.slater_margin < 0


@pytest.mark.parametrize("seed", range(5))
def test_affine_slater_point_sampled_sup(seed):
    program, meta = make_affine_family(seed)
    deltas = program.sampler(rng_stream(seed, 1), 10**5)
    sup = program.constraint_values(meta.slater_point, deltas).max()
    assert sup < 0
    # sampled sup can only undershoot the exact margin
    assert sup <= meta.slater_margin + 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_affine_lipschitz_in_delta(seed):
    program, meta = make_affine_family(seed)
    rng = rng_stream(seed, 2)
    n = 10**4
    x = rng.uniform(program.lower, program.upper, size=(n, program.dimension))
    a = program.sampler(rng, n)
    b = program.sampler(rng, n)
    worst = 0.0
    for xi, ai, bi in zip(x, a, b):
        q = abs(program.constraint(xi, ai) - program.constraint(xi, bi)) / np.linalg.norm(ai - bi)
        worst = max(worst, q)
    assert worst <= meta.lipschitz_L_delta + 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_affine_optimum_matches_slsqp(seed):
    program, meta = make_affine_family(seed)
    coef = meta.notes["coefficients"]
    res = minimize(
        lambda x: program.objective @ x,
        meta.slater_point,
        jac=lambda x: program.objective,
        method="SLSQP",
        bounds=list(zip(program.lower, program.upper)),
        constraints=[{"type": "ineq", "fun": lambda x: -coef.worst_case(x)}],
        options={"ftol": 1e-12, "maxiter": 500},
    )
    assert res.success
    assert meta.known_optimum == pytest.approx(res.fun, abs=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_affine_worst_case_dominates_samples(seed):
    program, meta = make_affine_family(seed)
    coef = meta.notes["coefficients"]
    rng = rng_stream(seed, 3)
    for _ in range(20):
        x = rng.uniform(program.lower, program.upper)
        vals = program.constraint_values(x, program.sampler(rng, 2000))
        assert vals.max() <= coef.worst_case(x) + 1e-12
        assert vals.max() >= coef.worst_case(x) - 0.5
