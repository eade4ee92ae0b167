"""Command-line interface.

Exit codes: 0 when everything passes, 1 when checks fail (or a solve does not
converge), 2 for structural or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import airy, core, green, harness, norms, picard, spectral
from .errors import BoundViolationError, ConvergenceError, DivergenceError, GKdVError

log = logging.getLogger("gkdv")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def load_config(path):
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if "problem" not in cfg or "grid" not in cfg:
        raise ConfigError("config needs 'problem' and 'grid' sections")
    spec, grid = core.problem_from_dict({**cfg["problem"], **cfg["grid"]})
    return cfg, spec, grid


def initial_field(cfg, grid):
    """Initial data from the ``initial`` config section (default: unit Gaussian)."""
    init = cfg.get("initial", {"kind": "gaussian"})
    kind = init.get("kind", "gaussian")
    x = grid.x
    if kind == "gaussian":
        a, w, c = init.get("amplitude", 1.0), init.get("width", 1.0), init.get("center", 0.0)
        return a * np.exp(-((x - c) / w) ** 2)
    if kind == "soliton":
        return harness.soliton(init.get("speed", 2.0), x, 0.0, init.get("center", 0.0))
    if kind == "rough":
        return harness.rough_profile(x, init.get("delta", 1e-3), init.get("inner", 0.75 * grid.L))
    if kind == "csv":
        xs, vals = core.load_field(init["path"])
        if xs.size != grid.N or not np.allclose(xs, x):
            raise ConfigError("initial CSV does not match the configured grid")
        return vals
    raise ConfigError(f"unknown initial kind {kind!r}")


def source_trajectory(cfg, grid, spec):
    path = cfg.get("source")
    if not path:
        return None
    xs, traj = core.load_trajectory(path)
    if traj.values.shape != (grid.M, grid.N):
        raise ConfigError("source trajectory does not match the configured grid")
    return traj


def out_dir(args, cfg):
    d = Path(args.out or cfg.get("output", "out"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _dump(path, obj):
    Path(path).write_text(json.dumps(harness._jsonable(obj), indent=2, sort_keys=True))


# ---------------------------------------------------------------- commands

def cmd_ain(args):
    x = np.array(args.x, dtype=float)
    vals = airy.evaluator(args.n, args.quad_tol)(x, tuple(args.orders))
    for xi, row in zip(x, vals.T):
        print(" ".join([repr(float(xi))] + [f"{v:.16e}" for v in row]))
    return EXIT_OK


def cmd_solve_linear(args):
    cfg, spec, grid = load_config(args.config)
    u0 = initial_field(cfg, grid)
    core.check_decay(u0, grid, "initial data")
    u = spectral.solve_linear(u0, source_trajectory(cfg, grid, spec), spec, grid,
                              acknowledge_growth=cfg.get("acknowledge_growth", False))
    d = out_dir(args, cfg)
    core.save_trajectory(d / "trajectory.csv", u, grid.x)
    verdict = spectral.classify_wellposedness(spec, grid)
    _dump(d / "summary.json", {"problem": core.problem_to_dict(spec, grid),
                               "wellposedness": verdict.__dict__})
    log.info("wrote %s", d / "trajectory.csv")
    return EXIT_OK


def cmd_solve(args):
    cfg, spec, grid = load_config(args.config)
    pcfg = picard.PicardConfig(**cfg.get("picard", {}))
    u0 = initial_field(cfg, grid)
    core.check_decay(u0, grid, "initial data")
    F = source_trajectory(cfg, grid, spec)
    d = out_dir(args, cfg)
    summary = {"problem": core.problem_to_dict(spec, grid), "picard": pcfg.__dict__,
               "y1": picard.compute_y1(u0, F, pcfg, spec, grid)}
    try:
        u, trace = picard.solve_nonlinear(u0, F, spec, grid, pcfg)
    except ConvergenceError as exc:
        exc.trace.to_csv(d / "trace.csv")
        _dump(d / "summary.json", {**summary, "converged": False, "error": str(exc)})
        log.error("%s", exc)
        return EXIT_FAIL
    core.save_trajectory(d / "trajectory.csv", u, grid.x)
    trace.to_csv(d / "trace.csv")
    _dump(d / "summary.json", {**summary, "converged": True, "iterations": len(trace),
                               "windows": trace.windows})
    return EXIT_OK


def cmd_green(args):
    cfg, spec, grid = load_config(args.config)
    gcfg = green.ResolventConfig(**cfg.get("green", {}))
    gt = green.build_green(spec, grid, gcfg)
    d = out_dir(args, cfg)
    gt.save(d / "G.bin")
    gt.dG.save_binary(d / "dG.bin")
    est = green.verify_green_estimates(gt)
    _dump(d / "green_estimates.json", {**est, "iterate_norms": gt.iterate_norms,
                                       "converged": gt.converged})
    return EXIT_OK if gt.converged else EXIT_FAIL


def cmd_norms(args):
    x, traj = core.load_trajectory(args.traj)
    grid = core.grid_from_x(x, len(traj))
    v = traj.values
    rec = {
        "y": traj.ygrid,
        "norm2": np.sum(v * v, axis=1) * grid.dx,
        "N_alpha": {str(a): [norms.N_alpha(row, a, grid) for row in v] for a in args.alpha},
        "M_functional": norms.M_functional(traj, args.n, grid),
        "seminorm_k2_s1_j0": norms.seminorm(traj, 2, 1, 0, grid),
    }
    text = json.dumps(harness._jsonable(rec), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return EXIT_OK


def cmd_verify(args):
    suites = harness.SUITES if args.suite == ["all"] else tuple(args.suite)
    cfg = harness.SuiteConfig(suites=suites, n=args.n, seed=args.seed, out_dir=args.out)
    report = harness.run_all(cfg)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.suite:<12} {c.name:<42} {c.measured:.3e}")
    print(f"overall: {'PASS' if report.passed else 'FAIL'} ({len(report.checks)} checks)")
    return EXIT_OK if report.passed else EXIT_FAIL


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="gkdv", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("ain", help="evaluate the generalized Airy integral")
    a.add_argument("n", type=int)
    a.add_argument("x", type=float, nargs="+")
    a.add_argument("--orders", type=int, nargs="+", default=[0])
    a.add_argument("--quad-tol", type=float, default=1e-12)
    a.set_defaults(func=cmd_ain)

    for name, func, help_ in (("solve-linear", cmd_solve_linear, "spectral linear solve"),
                              ("solve", cmd_solve, "Picard nonlinear solve"),
                              ("green", cmd_green, "build the Green-function table")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True)
        s.add_argument("--out")
        s.set_defaults(func=func)

    nm = sub.add_parser("norms", help="functionals of a trajectory CSV")
    nm.add_argument("--traj", required=True)
    nm.add_argument("--n", type=int, default=1)
    nm.add_argument("--alpha", type=float, nargs="+", default=[2.0, 4.0])
    nm.add_argument("--out")
    nm.set_defaults(func=cmd_norms)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", nargs="+", default=["all"],
                   choices=["all", *harness.SUITES])
    v.add_argument("--out")
    v.add_argument("--n", type=int, default=1)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConvergenceError, DivergenceError, BoundViolationError) as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ConfigError, GKdVError, ValueError, OSError, KeyError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
