"""Command-line front end.

Every command is a deterministic function of its flags (plus ``--seed``);
CSV output uses ``.`` decimals and 17 significant digits.  Flags override
the optional ``--config`` file of ``key=value`` lines, and the
``SCENBOUND_SEED`` environment variable may supply a seed when neither does.

Exit codes: 0 success, 1 usage, 2 I/O, 3 assumption violated, 4 validation failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .bounds import BoundFamily, BoundSpec, invert_bound, phi_a, phi_c, phi_ie
from .circle_example import curve_h
from .empirics import complexity_probe, estimate_tail, scenario_objectives, validate_certificate
from .exceptions import AssumptionError, DomainError, ScenboundError
from .problem import get_problem
from .sensitivity import UlbCertificate, certify

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_ASSUMPTION, EXIT_VALIDATION = 0, 1, 2, 3, 4
SEED_ENV = "SCENBOUND_SEED"
COMMANDS = ("bounds-table", "fig2", "fig4", "certify", "validate", "tail", "complexity")
VALIDATE_METHODS = ("exact-h", "exact-h_a", "exact-h_c", "additive", "inclusion_exclusion", "null")

log = logging.getLogger("scenbound")


class UsageError(ScenboundError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    problem: Optional[str] = None
    k: Optional[int] = None
    d: Optional[int] = None
    N: Optional[int] = None
    T: Optional[int] = None
    M: Optional[int] = None
    beta: Optional[float] = None
    epsilon: Optional[float] = None
    tol: Optional[float] = None
    seed: Optional[int] = None
    out: Optional[str] = None
    family: Optional[str] = None
    method: Optional[str] = None
    grid: Optional[str] = None


_CONFIG_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"k": int, "d": int, "N": int, "T": int, "M": int, "seed": int, "beta": float, "epsilon": float, "tol": float}

DEFAULTS = {
    "bounds-table": dict(k=2, N=100, grid="0.01:0.5:50"),
    "fig2": dict(k=8, N=500),
    "fig4": dict(N=100, grid="0.01:0.99:99"),
    "certify": dict(problem="circle-relaxed", N=500, beta=0.01, family="additive"),
    "validate": dict(problem="circle", N=100, T=2000, beta=0.2, method="exact-h", seed=0),
    "tail": dict(problem="circle", N=100, T=1000, seed=0),
    "complexity": dict(problem="circle", k=4, M=100_000, tol=1e-3, seed=0),
}


def read_config_file(path: str) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            if key not in _CONFIG_TYPES or key == "command":
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _cast(key, value.strip())
    return values


def _cast(key: str, value):
    cast = _CASTS.get(key)
    if cast is None or value is None:
        return value
    try:
        return cast(value)
    except ValueError:
        raise UsageError(f"{key} expects {cast.__name__}, got {value!r}") from None


def build_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS[args.command])
    if args.config:
        merged.update(read_config_file(args.config))
    env_seed = os.environ.get(SEED_ENV)
    if env_seed:
        merged["seed"] = _cast("seed", env_seed)
    for key in _CONFIG_TYPES:
        value = getattr(args, key, None)
        if key != "command" and value is not None:
            merged[key] = value
    cfg = RunConfig(command=args.command, **merged)
    _check_config(cfg)
    return cfg


def _check_config(cfg: RunConfig) -> None:
    for name in ("k", "d", "N", "T", "M"):
        v = getattr(cfg, name)
        if v is not None and v < 1:
            raise UsageError(f"--{name} must be >= 1")
    if cfg.beta is not None and not 0.0 < cfg.beta < 1.0:
        raise UsageError("--beta must lie in (0, 1)")
    if cfg.epsilon is not None and not 0.0 <= cfg.epsilon <= 1.0:
        raise UsageError("--epsilon must lie in [0, 1]")
    if cfg.seed is not None and not 0 <= cfg.seed < 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    if cfg.family is not None:
        try:
            BoundFamily.parse(cfg.family)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
    if cfg.command == "validate" and cfg.method not in VALIDATE_METHODS:
        raise UsageError(f"--method must be one of {', '.join(VALIDATE_METHODS)}")


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:steps`` -> ``steps`` evenly spaced points from lo to hi inclusive."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must look like lo:hi:steps, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad grid {text!r}") from None
    if steps < 1 or not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise UsageError(f"bad grid {text!r}")
    return np.linspace(lo, hi, steps)


def fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([str(v) if isinstance(v, (int, np.integer)) else fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# --- commands -------------------------------------------------------------


def fig2_csv(k: int = 8, N: int = 500, grid=None) -> str:
    """``epsilon,phi_c,phi_a,phi``; the last cell is empty where ``epsilon > 1/k``."""
    if grid is None:
        grid = np.linspace(1.0 / (250 * k), 1.0 / k, 250)
    sc, sa, si = BoundSpec("classic", k, N), BoundSpec("additive", k, N), BoundSpec("inclusion_exclusion", k, N)
    rows = []
    for eps in grid:
        ie = phi_ie(eps, si) if eps <= 1.0 / k else None
        rows.append([eps, phi_c(eps, sc), phi_a(eps, sa), ie])
    return _csv_text(["epsilon", "phi_c", "phi_a", "phi"], rows)


def fig4_csv(N: int = 100, grid=None) -> str:
    """``beta,h_a,h,h_c`` for the circle example."""
    if grid is None:
        grid = np.linspace(0.01, 0.99, 99)
    rows = []
    for beta in grid:
        rows.append([
            beta,
            curve_h(beta, N, "additive").value,
            _maybe(lambda: curve_h(beta, N, "inclusion_exclusion").value),
            curve_h(beta, N, "classic").value,
        ])
    return _csv_text(["beta", "h_a", "h", "h_c"], rows)


def bounds_table_csv(k: int, N: int, grid) -> str:
    """Inverse bounds: for each ``beta`` the ``epsilon`` of each family (empty if unattainable)."""
    rows = []
    for beta in grid:
        rows.append([beta] + [_maybe(lambda f=f: invert_bound(beta, BoundSpec(f, k, N))) for f in BoundFamily])
    return _csv_text(["beta", "eps_classic", "eps_additive", "eps_ie"], rows)


def _maybe(fn):
    try:
        return fn()
    except DomainError:
        return None


def _exact_certificate(cfg: RunConfig, family: str) -> UlbCertificate:
    point = curve_h(cfg.beta, cfg.N, family)
    eps = invert_bound(cfg.beta, BoundSpec(family, 2, cfg.N))
    return UlbCertificate("exact_example", cfg.beta, eps, point.value, cfg.N, 2)


def run_validate(cfg: RunConfig) -> int:
    program, meta = get_problem(cfg.problem)
    method = cfg.method
    if method.startswith("exact-"):
        if program.family != "circle":
            raise UsageError(f"method {method} only applies to the circle problems")
        family = {"exact-h": "inclusion_exclusion", "exact-h_a": "additive", "exact-h_c": "classic"}[method]
        cert = _exact_certificate(cfg, family)
    elif method == "null":
        cert = UlbCertificate("exact_example", cfg.beta, 0.0, 0.0, cfg.N, program.dimension)
    else:
        cert = certify(program, meta, cfg.N, cfg.beta, method)
    report = validate_certificate(program, cert, cfg.T, cfg.seed, meta)
    log.info("validated %s on %s with alpha=%.6g", method, program.name, cert.alpha)
    _emit(f"alpha={fmt(cert.alpha)}\n" + report.to_text(), cfg.out)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def run_tail(cfg: RunConfig) -> int:
    """Per-trial ``g_N`` values, or ``p_hat`` on an alpha grid when ``--grid`` is given."""
    program, meta = get_problem(cfg.problem)
    if cfg.grid:
        tail = estimate_tail(program, cfg.N, cfg.T, cfg.seed, meta)
        alphas = parse_grid(cfg.grid)
        text = _csv_text(["alpha", "p_hat"], [[a, tail.p_hat(a)] for a in alphas])
    else:
        g = scenario_objectives(program, cfg.N, cfg.T, cfg.seed)
        text = _csv_text(["trial_index", "g_value"], list(enumerate(g)))
    _emit(text, cfg.out)
    return EXIT_OK


def run_complexity(cfg: RunConfig) -> int:
    program, meta = get_problem(cfg.problem)
    k = complexity_probe(program, meta, cfg.k, cfg.M, cfg.tol, cfg.seed)
    result = f"> {cfg.k}" if k is None else str(k)
    _emit(f"problem={program.name}\ncomplexity_estimate={result}\nM={cfg.M}\ntol={fmt(cfg.tol)}\n", cfg.out)
    return EXIT_OK


def dispatch(cfg: RunConfig) -> int:
    grid = parse_grid(cfg.grid) if cfg.grid else None
    if cfg.command == "fig2":
        _emit(fig2_csv(cfg.k, cfg.N, grid), cfg.out)
    elif cfg.command == "fig4":
        _emit(fig4_csv(cfg.N, grid), cfg.out)
    elif cfg.command == "bounds-table":
        _emit(bounds_table_csv(cfg.k, cfg.N, grid), cfg.out)
    elif cfg.command == "certify":
        program, meta = get_problem(cfg.problem)
        cert = certify(program, meta, cfg.N, cfg.beta, cfg.family)
        _emit(cert.to_text(), cfg.out)
    elif cfg.command == "validate":
        return run_validate(cfg)
    elif cfg.command == "tail":
        return run_tail(cfg)
    elif cfg.command == "complexity":
        return run_complexity(cfg)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="scenbound", description="Probabilistic objective bounds for scenario programs.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--k", type=int, help="number of sets / decision dimension for bound tables (complexity: k_max)")
    p.add_argument("--d", type=int, help="decision dimension (informational; problems carry their own)")
    p.add_argument("--N", type=int, help="scenarios per trial")
    p.add_argument("--T", type=int, help="Monte Carlo trials")
    p.add_argument("--M", type=int, help="samples per k in the complexity probe")
    p.add_argument("--beta", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--tol", type=float, help="complexity probe tolerance")
    p.add_argument("--grid", help="lo:hi:steps")
    p.add_argument("--problem", help="circle, circle-relaxed or affine:<seed>")
    p.add_argument("--family", help="classic, additive or inclusion_exclusion")
    p.add_argument("--method", help=f"validate method: {', '.join(VALIDATE_METHODS)}")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--config", help="key=value config file; flags take precedence")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        return dispatch(cfg)
    except AssumptionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
