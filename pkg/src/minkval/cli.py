"""Command-line experiment runner.

Every subcommand reads an optional JSON config (``"format": 1``), applies flag
overrides, writes CSV/JSON into ``--out`` and exits with

    0  all checks passed
    2  a check failed (the first failing check is named on stderr)
    3  numerical validity error (NotConvex, ImageNotConvex, ...)
    4  configuration error
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import body as bd
from .errors import NumericalValidityError
from .harmonics import SphereGrid
from .iterate import fixed_point_residual, iterate, psi_ratio
from .profiles import (SplineProfile, gegenbauer_profile, PolynomialProfile,
                       random_even_convex_profile)
from .valuation import (Kernel, ball_kernel, decay_profile, derivative_multiplier_check,
                        ellipsoid_kernel, gap_ratios, lambda_degree1, lambda_degree_i,
                        make_kernel, projection_kernel, spectral_gap_check)

EXIT_OK, EXIT_CHECK, EXIT_NUMERIC, EXIT_CONFIG = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class CheckFailed(RuntimeError):
    pass


# --- configuration --------------------------------------------------------------------

DEFAULTS = {
    "multipliers": {"dims": [3, 4, 5, 6, 7, 8], "gap_kmax": 40, "random_profiles": 20,
                    "kernels": [{"type": "projection"}, {"type": "ball"}],
                    "decay": [{"type": "spline", "knots": 7}],
                    "derivative": [[6, 1], [8, 1], [8, 2]], "derivative_kmax": 30},
    "iterate": {"degree": 2, "steps": 30, "mode": "general", "warmup": 0,
                "kernel": {"type": "ellipsoid", "a": 1.5, "b": 1.0},
                "body": {"type": "perturbed", "terms": [[2, 0, 0.05], [4, 0, 0.025]]}},
    "fixed-point": {"degree": 2, "eps": [0.0, 0.01, 0.03, 0.05],
                    "kernels": [{"type": "ellipsoid", "a": 1.5, "b": 1.0},
                                {"type": "ellipsoid", "a": 1.0, "b": 1.5},
                                {"type": "ellipsoid", "a": 1.2, "b": 1.0}],
                    "harmonic": [2, 0]},
    "psi": {"degree": 2, "eps": [0.0, 0.01, 0.03, 0.05, 0.08],
            "kernels": [{"type": "ellipsoid", "a": 1.5, "b": 1.0},
                        {"type": "ellipsoid", "a": 1.0, "b": 1.5}],
            "harmonic": [2, 0]},
}


def load_config(args, command):
    cfg = json.loads(json.dumps(DEFAULTS.get(command, {})))
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("format") != 1:
            raise ConfigError('config must be a JSON object with "format": 1')
        section = doc.get(command, doc)
        cfg.update({k: v for k, v in section.items() if k != "format"})
    cfg["seed"] = args.seed if args.seed is not None else cfg.get("seed", 0)
    cfg["kmax"] = args.kmax if args.kmax is not None else cfg.get("kmax", bd.DEFAULT_KMAX)
    if args.grid:
        try:
            nt, nph = (int(x) for x in args.grid.lower().split("x"))
        except ValueError as exc:
            raise ConfigError(f"--grid expects NxM, got {args.grid!r}") from exc
        cfg["grid"] = [nt, nph]
    for key in ("kmax", "steps", "degree"):
        if key in cfg and (not isinstance(cfg[key], int) or cfg[key] < 1):
            raise ConfigError(f"{key} must be a positive integer")
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigError("seed must be a nonnegative integer")
    return cfg


def make_grid(cfg):
    if "grid" in cfg:
        nt, nph = cfg["grid"]
        if nt < 2 or nph < 2:
            raise ConfigError("grid dimensions must be >= 2")
        grid = SphereGrid(nt, nph)
    else:
        grid = SphereGrid.for_degree(cfg["kmax"])
    if cfg["kmax"] > grid.max_resolved_degree:
        raise ConfigError(f"grid {grid.shape} cannot resolve kmax={cfg['kmax']}")
    return grid


def build_kernel(spec, n, kmax):
    kind = spec.get("type")
    if kind == "projection":
        return projection_kernel(n, kmax)
    if kind == "ball":
        return ball_kernel(n, kmax)
    if kind == "ellipsoid":
        return ellipsoid_kernel(n, float(spec["a"]), float(spec["b"]), kmax)
    if kind == "legendre":
        return make_kernel(n, gegenbauer_profile(n, spec["coeffs"]), kmax, name="legendre")
    if kind == "file":
        try:
            k = Kernel.from_json(Path(spec["path"]).read_text())
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot load kernel file: {exc}") from exc
        if k.dim_n != n or k.max_degree < kmax:
            raise ConfigError("kernel file does not match dimension / kmax")
        return k
    raise ConfigError(f"unknown kernel type {kind!r}")


def build_body(spec, cfg, grid, rng):
    kind = spec.get("type")
    kmax = cfg["kmax"]
    if kind == "ball":
        return bd.ball(float(spec.get("radius", 1.0)), grid=grid, max_degree=kmax)
    if kind == "perturbed":
        terms = {(int(l), int(m)): float(c) for l, m, c in spec.get("terms", [])}
        K = bd.harmonic_perturbation(terms, kmax, grid, float(spec.get("radius", 1.0)))
        return bd.translate(K, spec["translate"]) if "translate" in spec else K
    if kind == "random":
        return bd.random_body(rng, kmax, grid)
    raise ConfigError(f"unknown body type {kind!r}")


# --- output helpers ------------------------------------------------------------------------

def write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in r])
    path.write_text(buf.getvalue())


class Checks:
    def __init__(self):
        self.rows = []

    def add(self, name, target, value, passed):
        self.rows.append([name, target, float(value), bool(passed)])

    def first_failure(self):
        for r in self.rows:
            if not r[3]:
                return r
        return None

    def write(self, path):
        write_csv(path, ["check", "target", "value", "passed"], self.rows)


# --- commands ------------------------------------------------------------------------------

def cmd_multipliers(cfg, out: Path, checks: Checks):
    rng = np.random.default_rng(cfg["seed"])
    kmax, gap_k = cfg["kmax"], min(cfg["gap_kmax"], cfg["kmax"])
    rows = []
    for n in cfg["dims"]:
        kernels = [build_kernel(s, n, kmax) for s in cfg["kernels"]]
        kernels += [make_kernel(n, random_even_convex_profile(rng), kmax, name=f"random{j}")
                    for j in range(cfg["random_profiles"])]
        for kern in kernels:
            rep = spectral_gap_check(kern, gap_k)
            k, r = gap_ratios(kern, gap_k)
            for kk in range(kern.max_degree + 1):
                ratio = float(r[kk - 2]) if 2 <= kk <= gap_k else math.nan
                rows.append([kern.name, n, kk, float(kern.multipliers[kk]), ratio])
            checks.add(f"spectral_gap[{kern.name},n={n}]", "<1", rep.summary, rep.passed)
    write_csv(out / "multipliers.csv", ["kernel", "n", "k", "a_k", "gap_ratio"], rows)
    for spec in cfg["decay"]:
        if spec.get("type") == "spline":
            x = np.linspace(-1, 1, int(spec.get("knots", 7)))
            prof = SplineProfile.cubic(x, 1.0 + 0.2 * np.abs(x) ** 1.5)
            rep = decay_profile(make_kernel(3, prof, kmax, validate=False, name="spline"))
        else:
            rep = decay_profile(build_kernel(spec, 3, kmax))
        checks.add(f"decay[{spec.get('type')}]", "slope<=bound", rep.summary, rep.passed)
    x = np.linspace(-1, 1, 9)
    profiles = {"poly": PolynomialProfile(rng.normal(size=8)),
                "spline": SplineProfile.cubic(x, np.cos(2 * x) + 0.3 * x ** 3)}
    for n, j in cfg["derivative"]:
        for name, prof in profiles.items():
            rep = derivative_multiplier_check(prof, n, j, cfg["derivative_kmax"])
            checks.add(f"derivative_identity[{name},n={n},j={j}]", "<=1e-8", rep.summary, rep.passed)


def cmd_iterate(cfg, out: Path, checks: Checks):
    rng = np.random.default_rng(cfg["seed"])
    grid = make_grid(cfg)
    K = build_body(cfg["body"], cfg, grid, rng)
    kern = build_kernel(cfg["kernel"], 3, cfg["kmax"])
    i, mode = cfg["degree"], cfg["mode"]
    if mode not in ("general", "degree1"):
        raise ConfigError(f"unknown mode {mode!r}")
    trace = iterate(K, kern, i, cfg["steps"], mode, cfg["warmup"], seed=cfg["seed"])
    (out / "trace.csv").write_text(trace.to_csv())
    (out / "trace.json").write_text(trace.to_json())
    fitted = trace.fitted_ratio()
    if mode == "degree1":
        lam = lambda_degree1(kern).summary
        d2 = trace.column("d_2")
        bound = lam ** np.arange(len(d2)) * d2[0] * (1 + 1e-6)
        ok = bool(np.all(d2 <= bound + 1e-14))
        print(f"fitted ratio {fitted:.6g}   lambda_g {lam:.6g}")
        checks.add("degree1_contraction", "d_2<=lambda_g^m d_2(0)", float(np.max(d2 / bound)), ok)
    else:
        lam = lambda_degree_i(kern, i).summary
        print(f"fitted ratio {fitted:.6g}   i*Lambda_L {i * lam:.6g}")
        err = trace.column("sup_density_err")
        live = err[err > 1e-12]
        ok = bool(np.all(np.diff(live) < 0)) if live.size > 1 else True
        checks.add("sup_density_monotone", "decreasing", float(np.max(np.diff(live), initial=-1)), ok)
        if not math.isnan(fitted):
            checks.add("fitted_ratio", "<=i*Lambda_L+0.1", fitted, fitted <= i * lam + 0.1)
    if trace.stop_reason not in ("completed", "converged"):
        raise NumericalValidityError(trace.stop_reason)


def _sweep_bodies(cfg, grid):
    l, m = cfg["harmonic"]
    return [(float(e), bd.harmonic_perturbation({(l, m): float(e)}, cfg["kmax"], grid))
            for e in cfg["eps"]]


def cmd_fixed_point(cfg, out: Path, checks: Checks):
    grid = make_grid(cfg)
    rows = []
    for spec in cfg["kernels"]:
        kern = build_kernel(spec, 3, cfg["kmax"])
        for eps, K in _sweep_bodies(cfg, grid):
            res = fixed_point_residual(K, kern, cfg["degree"])
            rows.append([kern.name, eps, res])
            if eps == 0:
                checks.add(f"fixed_point[{kern.name},eps=0]", "<=1e-10", res, res <= 1e-10)
            else:
                checks.add(f"fixed_point[{kern.name},eps={eps:g}]", ">=1e-4", res, res >= 1e-4)
    write_csv(out / "fixed_point.csv", ["kernel", "eps", "residual"], rows)


def cmd_psi(cfg, out: Path, checks: Checks):
    grid = make_grid(cfg)
    rows = []
    for spec in cfg["kernels"]:
        kern = build_kernel(spec, 3, cfg["kmax"])
        vals = [(eps, psi_ratio(K, kern, cfg["degree"])) for eps, K in _sweep_bodies(cfg, grid)]
        base = dict(vals).get(0.0)
        for eps, v in vals:
            rows.append([kern.name, eps, v])
        if base is not None:
            gap = min(v - base for _, v in vals)
            checks.add(f"psi_minimised_at_ball[{kern.name}]", ">=psi(B)", gap, gap >= -1e-12)
    write_csv(out / "psi.csv", ["kernel", "eps", "psi"], rows)


def cmd_verify_all(cfg, out: Path, checks: Checks):
    base = {"seed": cfg["seed"], "kmax": cfg["kmax"]}
    if "grid" in cfg:
        base["grid"] = cfg["grid"]
    for name, fn, extra in [
            ("multipliers", cmd_multipliers, {"random_profiles": 5}),
            ("iterate", cmd_iterate, {}),
            ("iterate", cmd_iterate, {"degree": 1, "mode": "degree1", "steps": 40,
                                      "body": {"type": "random"}}),
            ("fixed-point", cmd_fixed_point, {}),
            ("psi", cmd_psi, {})]:
        sub = json.loads(json.dumps(DEFAULTS[name]))
        sub.update(base)
        sub.update(extra)
        target = out / (name + ("-degree1" if extra.get("mode") == "degree1" else ""))
        target.mkdir(parents=True, exist_ok=True)
        fn(sub, target, checks)


COMMANDS = {"multipliers": cmd_multipliers, "iterate": cmd_iterate,
            "fixed-point": cmd_fixed_point, "psi": cmd_psi, "verify-all": cmd_verify_all}


def build_parser():
    p = argparse.ArgumentParser(prog="minkval", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file (\"format\": 1)")
        s.add_argument("--out", default="out", help="output directory")
        s.add_argument("--seed", type=int, help="seed for randomised probes")
        s.add_argument("--kmax", type=int, help="band limit K_max")
        s.add_argument("--grid", help="sphere grid NxM (theta x phi)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args, args.command)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        checks = Checks()
        COMMANDS[args.command](cfg, out, checks)
    except (ConfigError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalValidityError as exc:
        print(f"numerical validity error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    checks.write(out / "checks.csv")
    bad = checks.first_failure()
    if bad is not None:
        print(f"FAIL {bad[0]}: value {bad[2]:.6g}, target {bad[1]}", file=sys.stderr)
        return EXIT_CHECK
    print(f"all {len(checks.rows)} checks passed")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
