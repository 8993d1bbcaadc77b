"""Acceptance suite: ten end-to-end criteria, each with a runtime budget.

Every test prints one ``PASS``/``FAIL`` line (visible even when pytest
captures output) and then asserts, so a failing criterion is reported
rather than hidden.
"""

import csv
import io
import math
import time

import mpmath
import numpy as np
import pytest

from scenbound.bounds import BoundSpec, phi_a, phi_c, phi_ie
from scenbound.circle_example import curve_h
from scenbound.cli import fig2_csv, fig4_csv
from scenbound.empirics import complexity_probe, hit_all_simulation, scenario_objectives
from scenbound.exceptions import RangeError
from scenbound.problem import get_problem, make_affine_family, make_circle_problem, rng_stream
from scenbound.sensitivity import UlbCertificate, certify, lipschitz_data, verify_g_lipschitz
from scenbound.solver import solve_circle_analytic, solve_scp

SQRT2 = math.sqrt(2.0)
AFFINE_SEEDS = range(5)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, elapsed, budget, detail=""):
        within = elapsed < budget
        verdict = "PASS" if ok and within else "FAIL"
        line = f"{verdict} criterion {number:2d}: {title} ({elapsed:.2f}s / {budget:g}s budget)"
        if detail:
            line += f" [{detail}]"
        with capsys.disabled():
            print("\n" + line)
        assert ok, detail
        assert within, f"runtime {elapsed:.2f}s exceeds {budget:g}s"

    return emit


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_criterion_01_bound_identities(report):
    t0 = time.perf_counter()
    worst1 = worst2 = 0.0
    grid = np.linspace(0.0, 1.0, 1000)
    with mpmath.workdps(40):
        for N in (10, 100, 500):
            for eps in grid:
                ref = float((1 - mpmath.mpf(eps)) ** N)
                worst1 = max(
                    worst1,
                    abs(phi_c(eps, BoundSpec("classic", 1, N)) - ref),
                    abs(phi_ie(eps, BoundSpec("inclusion_exclusion", 1, N)) - ref),
                )
            for eps in np.linspace(0.0, 0.5, 1000):
                e = mpmath.mpf(eps)
                ref = float(2 * (1 - e) ** N - (1 - 2 * e) ** N)
                worst2 = max(worst2, abs(phi_ie(eps, BoundSpec("inclusion_exclusion", 2, N)) - ref))
    elapsed = time.perf_counter() - t0
    ok = worst1 <= 1e-14 and worst2 <= 1e-12
    report(1, "k=1 and k=2 bound identities", ok, elapsed, 1.0, f"max err k=1 {worst1:.1e}, k=2 {worst2:.1e}")


def test_criterion_02_dominance(report):
    t0 = time.perf_counter()
    violations = 0
    for k in (2, 4, 8):
        for N in (50, 100, 500):
            for eps in np.linspace(1.0 / (1000 * k), 1.0 / k, 1000):
                if phi_ie(eps, BoundSpec("inclusion_exclusion", k, N)) > phi_a(eps, BoundSpec("additive", k, N)):
                    violations += 1
    elapsed = time.perf_counter() - t0
    report(2, "inclusion-exclusion never above additive bound", violations == 0, elapsed, 1.0, f"{violations} violations")


def test_criterion_03_fig2(report):
    t0 = time.perf_counter()
    rows = _rows(fig2_csv(8, 500))
    eps = np.array([float(r["epsilon"]) for r in rows])
    pc = np.array([float(r["phi_c"]) for r in rows])
    pa = np.array([float(r["phi_a"]) for r in rows])
    pi = np.array([float(r["phi"]) for r in rows])
    ordered = bool(np.all(pi <= pa) and np.all(pi <= pc))
    a_better = pa < pc
    # a crossing: phi_a starts no better than phi_c and is strictly better from some grid point on
    tail_start = len(a_better) - int(np.argmin(a_better[::-1])) if not a_better.all() else 0
    crossing = (not a_better[0]) and tail_start < len(a_better) and a_better[tail_start:].all()
    elapsed = time.perf_counter() - t0
    detail = f"crossing at eps*={eps[tail_start]:.5f}" if crossing else "no crossing"
    report(3, "fig2 ordering and additive/classic crossing", ordered and crossing, elapsed, 1.0, detail)


def test_criterion_04_hit_all_oracle(report):
    t0 = time.perf_counter()
    T = 10**5
    worst_z, below = 0.0, 0
    for k in (2, 4, 8):
        for N in (50, 100, 500):
            for eps in (0.005, 0.01, 0.02):
                got = hit_all_simulation(k, eps, N, T, master_seed=0)
                p_ie = 1 - phi_ie(eps, BoundSpec("inclusion_exclusion", k, N))
                p_a = 1 - phi_a(eps, BoundSpec("additive", k, N))
                sigma = math.sqrt(p_ie * (1 - p_ie) / T)
                if sigma > 0:
                    worst_z = max(worst_z, abs(got - p_ie) / sigma)
                elif got != p_ie:
                    worst_z = math.inf
                if got < p_a - 3 * sigma:
                    below += 1
    elapsed = time.perf_counter() - t0
    ok = worst_z <= 3.0 and below == 0
    report(4, "hit-all simulation vs inclusion-exclusion", ok, elapsed, 30.0, f"max |z|={worst_z:.2f}, {below} below additive")


def test_criterion_05_solver_oracle(report):
    t0 = time.perf_counter()
    circle, _ = make_circle_problem()
    sizes = rng_stream(5, 10**6).integers(3, 51, size=100)
    worst = 0.0
    for t, N in enumerate(sizes):
        s = circle.sampler(rng_stream(5, t), int(N))
        kel = solve_scp(circle, s, compute_support=False)
        worst = max(worst, abs(kel.objective - solve_circle_analytic(s).objective))
    elapsed = time.perf_counter() - t0
    report(5, "cutting planes match closed form", worst <= 1e-6, elapsed, 30.0, f"max objective diff {worst:.1e}")


def test_criterion_06_g_lipschitz(report):
    t0 = time.perf_counter()
    checks = []
    program, meta = get_problem("circle-relaxed")
    checks.append((program.name, verify_g_lipschitz(program, meta, T=200, N=10, master_seed=0), lipschitz_data(program, meta).L_g))
    for seed in AFFINE_SEEDS:
        program, meta = make_affine_family(seed)
        checks.append((program.name, verify_g_lipschitz(program, meta, T=200, N=10, master_seed=seed), lipschitz_data(program, meta).L_g))
    elapsed = time.perf_counter() - t0
    ok = all(q <= bound + 1e-6 for _, q, bound in checks)
    worst = max(q / bound for _, q, bound in checks)
    report(6, "scenario optimum Lipschitz bound", ok, elapsed, 60.0, f"max quotient/bound {worst:.3f}")


def test_criterion_07_circle_coverage(report):
    t0 = time.perf_counter()
    circle, _ = make_circle_problem()
    N, T, beta = 100, 2000, 0.2
    g = scenario_objectives(circle, N, T, master_seed=0)
    floor = 0.8 - 3 * math.sqrt(0.8 * 0.2 / T)
    covered = {f: float(np.mean(SQRT2 - g <= curve_h(beta, N, f).value)) for f in ("inclusion_exclusion", "additive", "classic")}
    elapsed = time.perf_counter() - t0
    ok = all(v >= floor for v in covered.values())
    detail = ", ".join(f"{f}={v:.4f}" for f, v in covered.items()) + f" vs {floor:.4f}"
    report(7, "circle coverage of h, h_a, h_c", ok, elapsed, 60.0, detail)


def test_criterion_08_fig4(report):
    t0 = time.perf_counter()
    rows = _rows(fig4_csv(100))
    cols = {c: np.array([float(r[c]) for r in rows]) for c in ("beta", "h_a", "h", "h_c")}
    monotone = all(np.all(np.diff(cols[c]) <= 0) for c in ("h_a", "h", "h_c"))
    ordered = bool(np.all(cols["h"] <= cols["h_a"]))
    elapsed = time.perf_counter() - t0
    report(8, "fig4 curves nonincreasing with h <= h_a", monotone and ordered, elapsed, 5.0, f"{len(rows)} rows")


def test_criterion_09_complexity(report):
    t0 = time.perf_counter()
    circle, circle_meta = make_circle_problem()
    circle_k = complexity_probe(circle, circle_meta, k_max=4, M=10**5, tol=1e-3, master_seed=0)
    affine = []
    for seed in AFFINE_SEEDS:
        program, meta = make_affine_family(seed)
        # quadratic gap near the worst case on the 3-sphere: tol 1e-2 with 5000 draws per k
        k = complexity_probe(program, meta, k_max=program.dimension, M=5000, tol=1e-2, master_seed=seed)
        affine.append((k, program.dimension))
    elapsed = time.perf_counter() - t0
    ok = circle_k == 2 and all(k is not None and k <= d for k, d in affine)
    detail = f"circle={circle_k}, affine (k, d)={affine}"
    report(9, "complexity probe", ok, elapsed, 120.0, detail)


def test_criterion_10_certificates(report):
    t0 = time.perf_counter()
    program, meta = get_problem("circle-relaxed")
    phi_inv = meta.regularity_phi_inverse
    worst_beta = worst_alpha = 0.0
    dominated, emitted = True, 0
    for N in (10, 50, 100, 500, 1000):
        for beta in (0.01, 0.05, 0.1, 0.2, 0.5, 0.9):
            add = UlbCertificate.from_text(certify(program, meta, N, beta, "additive").to_text())
            certs = [add]
            try:
                ie = UlbCertificate.from_text(certify(program, meta, N, beta, "inclusion_exclusion").to_text())
                certs.append(ie)
                dominated &= ie.alpha <= add.alpha
            except RangeError:
                pass
            for c in certs:
                emitted += 1
                family = "additive" if c.method == "sensitivity_additive" else "inclusion_exclusion"
                level = (phi_a if family == "additive" else phi_ie)(c.epsilon, BoundSpec(family, c.d, c.N))
                worst_beta = max(worst_beta, abs(level - c.beta))
                recomputed = c.constants.L_sp * c.constants.L_delta * phi_inv(c.epsilon)
                worst_alpha = max(worst_alpha, abs(recomputed - c.alpha) / c.alpha)
    elapsed = time.perf_counter() - t0
    ok = worst_beta <= 1e-10 and worst_alpha <= 1e-12 and dominated
    detail = f"{emitted} certificates, beta err {worst_beta:.1e}, alpha rel err {worst_alpha:.1e}"
    report(10, "certificate self-consistency", ok, elapsed, 60.0, detail)
