"""Verification suites: each check records a measured value, a target and a tolerance.

Every check carries an anchor naming the mathematical statement it exercises
(see ``ANCHORS``) or the tag ``"plumbing"``.  :func:`coverage` reports anchors
without any check so gaps are visible.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from . import airy, green, manufactured, norms, picard, spectral
from .core import GridSpec, ProblemSpec, Trajectory, l2_norm, to_spectral
from .errors import ConfigurationError, GKdVError, GrowthError, InsufficientDataError

SUITES = ("airy", "linear", "green", "picard", "weakform", "dependence", "blowup-rate")

ANCHORS = {
    "linear-wellposedness": "linear Cauchy problem and its well-posedness condition on b",
    "fundamental-solution": "self-similar fundamental solution of the model equation",
    "ain-function": "generalized Airy integral",
    "ain-ode": "ordinary differential equation satisfied by the generalized Airy integral",
    "kernel-decay": "two-sided decay estimates of the fundamental solution",
    "green-integral-equation": "integral equation linking G and U",
    "resolvent-series": "convergence of the resolvent series for G",
    "green-decay": "decay estimates for G and its x-derivative",
    "uniqueness-energy": "energy identity behind uniqueness of smooth solutions",
    "picard-window": "Picard sequence and the explicit window length y1",
    "continuation": "continuation of the solution to the full interval",
    "weak-solution": "integral identity defining weak solutions",
    "initial-attainment": "weak and strong attainment of the initial value",
    "psi-weights": "smooth one-sided weights psi_alpha",
    "linear-weak-estimates": "L2 and weighted-moment bounds for linear weak solutions",
    "interior-blowup-rate": "small-y growth bound for rough data",
    "smooth-data-estimates": "a-priori bounds for smooth data under strict dissipation",
    "mollified-data": "mollification of rough data and its convergence",
    "rho-weights": "weights rho_alpha and rho_alpha_r",
    "integral-identity": "representation of nonlinear solutions through G",
    "kernel-weighted-energy": "weighted energy of dG/dx near the diagonal",
    "continuous-dependence": "continuous dependence on the initial data",
}


@dataclass(frozen=True)
class SuiteConfig:
    suites: tuple = SUITES
    n: int = 1
    seed: int = 0
    out_dir: str | None = None
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ConfigurationError(f"unknown suites {unknown}")
        if self.n not in (1, 2):
            raise ConfigurationError("suites are shipped for n = 1 and n = 2")
        if any(not v > 0 for v in self.tolerances.values()):
            raise ConfigurationError("tolerances must be positive")

    def tol(self, name, default):
        return float(self.tolerances.get(name, default))

    def digest(self):
        payload = json.dumps({"suites": list(self.suites), "n": self.n, "seed": self.seed,
                              "tolerances": self.tolerances}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass
class CheckRecord:
    suite: str
    name: str
    anchor: str
    measured: float
    target: str
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    manifest: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def extend(self, records):
        self.checks.extend(records)

    def to_dict(self, include_timing=True):
        d = {"passed": self.passed, "manifest": self.manifest,
             "checks": [asdict(c) for c in self.checks]}
        if include_timing:
            d["timing"] = self.timing
        return d

    def to_json(self, include_timing=True):
        return json.dumps(_jsonable(self.to_dict(include_timing)), indent=2, sort_keys=True)

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "report.json"
        path.write_text(self.to_json())
        return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _le(suite, name, anchor, measured, tol, target="0", note=""):
    measured = float(measured)
    return CheckRecord(suite, name, anchor, measured, target, tol,
                       bool(np.isfinite(measured) and measured <= tol), note)


def _ge(suite, name, anchor, measured, bound, note=""):
    measured = float(measured)
    return CheckRecord(suite, name, anchor, measured, f">= {bound}", bound,
                       bool(np.isfinite(measured) and measured >= bound), note)


def _observed_orders(errors):
    e = np.asarray(errors, dtype=float)
    return np.log2(e[:-1] / e[1:])


def _rel_traj(a, b, grid):
    return max(l2_norm(a[m] - b[m], grid) / max(l2_norm(b[m], grid), 1e-300) for m in range(len(b)))


def _gaussian(grid, width=1.0, center=0.0):
    return np.exp(-((grid.x - center) / width) ** 2)


# ---------------------------------------------------------------- airy

def airy_suite(cfg):
    out = []
    for n in range(1, 5):
        p = 2 * n + 1
        exact = special.gamma(1 + 1 / p) * math.cos(math.pi / (2 * p))
        out.append(_le("airy", f"ain_at_zero_n{n}", "ain-function",
                       abs(airy.ain(n, 0.0) - exact), cfg.tol("ain_zero", 1e-9)))
    x = np.linspace(-10, 10, 401)
    c = 3 ** (-1 / 3)
    ref = math.pi * c * special.airy(-c * x)[0]
    out.append(_le("airy", "ain_classical_reduction", "ain-function",
                   np.max(np.abs(airy.ain(1, x) - ref)), cfg.tol("ain_reduction", 1e-8)))
    xs = np.linspace(-5, 5, 201)
    for n in (1, 2, 3):
        out.append(_le("airy", f"ain_ode_residual_n{n}", "ain-ode",
                       np.max(np.abs(airy.ode_residual(n, xs))), cfg.tol("ain_ode", 1e-6)))
    # U-convolution reproduces the spectral model evolution
    spec = ProblemSpec(cfg.n)
    grid = GridSpec(20.0, 256, 9)
    u0 = _gaussian(grid, math.sqrt(8.0))
    tables = airy.build_u_tables(spec, grid, (0,))
    via_u = green.model_solution(u0, spec, grid, tables)
    ref = spectral.solve_linear(u0, None, spec, grid)
    out.append(_le("airy", "fundamental_solution_propagates_model", "fundamental-solution",
                   _rel_traj(via_u.values, ref.values, grid), cfg.tol("fundamental", 1e-5)))
    return out


# ---------------------------------------------------------------- linear

def _linear_spec(n):
    return ProblemSpec(1, (-0.3, 0.2)) if n == 1 else ProblemSpec(2, (0.3, 0.1, -0.2, 0.05))


def linear_suite(cfg):
    out = []
    spec = _linear_spec(cfg.n)
    grid = GridSpec(20.0, 256, 33)
    sym = spectral.build_symbol(spec, grid)
    s0 = to_spectral(_gaussian(grid), grid)
    a, b = 0.3, 0.45
    two = spectral.propagate(spectral.propagate(s0, sym, a), sym, b)
    one = spectral.propagate(s0, sym, a + b)
    out.append(_le("linear", "semigroup_identity", "linear-wellposedness",
                   np.linalg.norm(two - one) / np.linalg.norm(one), cfg.tol("semigroup", 1e-12)))
    y = 0.7
    sy = spectral.propagate(s0, sym, y)
    law = np.abs(s0) ** 2 * np.exp(2 * sym.multiplier.real * y)
    out.append(_le("linear", "per_mode_energy_law", "linear-wellposedness",
                   np.max(np.abs(np.abs(sy) ** 2 - law)) / np.max(law), cfg.tol("energy_law", 1e-12)))
    free = ProblemSpec(spec.n)
    u = spectral.solve_linear(_gaussian(grid), None, free, grid)
    norms0 = l2_norm(u.values[0], grid)
    drift = max(abs(l2_norm(v, grid) - norms0) for v in u.values) / norms0
    out.append(_le("linear", "plancherel_b0", "linear-wellposedness", drift, cfg.tol("plancherel", 1e-12)))

    # manufactured solution: spatial floor and temporal order
    expr = manufactured.gaussian_decay()
    coarse, fine = GridSpec(12.0, 128, 21), GridSpec(12.0, 256, 21)
    sols = []
    for g in (coarse, fine):
        u0, F, exact = manufactured.manufactured_problem(expr, spec, g)
        sols.append(spectral.solve_linear(u0, F, spec, g).values)
    out.append(_le("linear", "manufactured_spatial_floor", "linear-wellposedness",
                   np.max(np.abs(sols[0] - sols[1][:, ::2])), cfg.tol("spatial_floor", 1e-10)))
    errs = []
    for M in (11, 21, 41, 81):
        g = GridSpec(12.0, 128, M)
        u0, F, exact = manufactured.manufactured_problem(expr, spec, g)
        errs.append(np.max(np.abs(spectral.solve_linear(u0, F, spec, g).values - exact.values)))
    out.append(_ge("linear", "manufactured_temporal_order", "linear-wellposedness",
                   _observed_orders(errs).min(), cfg.tol("temporal_order", 2.0)))

    # a spec violating the condition must be refused without acknowledgement
    bad = spec.with_b([-v for v in spec.b]) if spec.wellposed_condition else spec
    try:
        spectral.solve_linear(_gaussian(grid), None, bad, grid)
        refused = 0.0
    except GrowthError:
        refused = 1.0
    out.append(_ge("linear", "growth_refused", "linear-wellposedness", refused, 1.0))

    # strictly dissipative: ||u(y)|| never exceeds ||u0||
    strict = ProblemSpec(1, (-0.2, 0.4)) if cfg.n == 1 else ProblemSpec(2, (0.2, 0.3, -0.1, 0.0))
    u = spectral.solve_linear(_gaussian(grid), None, strict, grid)
    n0 = l2_norm(u.values[0], grid)
    excess = max(l2_norm(v, grid) for v in u.values) / n0 - 1.0
    out.append(_le("linear", "dissipative_l2_contraction", "smooth-data-estimates",
                   excess, cfg.tol("contraction", 1e-13)))

    # weighted moment stays bounded by the data moment, independent of the box
    ratios = []
    for L in (20.0, 40.0):
        g = GridSpec(L, int(256 * L / 20), 17)
        u0 = _gaussian(g, math.sqrt(8.0))
        u = spectral.solve_linear(u0, None, strict, g)
        data = math.sqrt(norms.sq_norm(u0, g)) + norms.N_alpha(u0, 2.0, g)
        ratios.append(max(norms.N_alpha(v, 2.0, g) for v in u.values) / data)
    out.append(_le("linear", "weighted_moment_bound_box_independent", "linear-weak-estimates",
                   abs(ratios[0] / ratios[1] - 1.0), cfg.tol("moment_box", 1e-3),
                   note=f"sup N_2(u)/(||u0|| + N_2(u0)) = {ratios[1]:.4g}"))
    return out


# ---------------------------------------------------------------- green

def green_suite(cfg):
    out = []
    spec = ProblemSpec(1, (-0.1, 0.0))
    grid = GridSpec(20.0, 256, 64)
    u0 = _gaussian(grid, math.sqrt(8.0))
    tables = airy.build_u_tables(spec, grid, (0, 1, 2, 3))
    gt = green.build_green(spec, grid, utables=tables)
    ug = green.solve_linear_green(u0, None, gt)
    us = spectral.solve_linear(u0, None, spec, grid)
    out.append(_le("green", "green_vs_spectral", "green-integral-equation",
                   _rel_traj(ug.values, us.values, grid), cfg.tol("green_cross", 1e-3)))
    ui, _ = green.solve_integral_equation(u0, spec, grid, tables, iterations=40)
    out.append(_le("green", "integral_equation_iteration_vs_spectral", "green-integral-equation",
                   _rel_traj(ui.values, us.values, grid), cfg.tol("green_cross", 1e-3)))
    ratios = np.array(gt.iterate_norms[1:]) / np.array(gt.iterate_norms[:-1])
    out.append(_le("green", "resolvent_iterates_decrease", "resolvent-series",
                   ratios.max() if ratios.size else 0.0, 1.0, target="< 1",
                   note=f"{len(gt.iterate_norms)} terms, converged={gt.converged}"))
    free = ProblemSpec(1)
    gfree = green.build_green(free, grid, utables={0: tables[0], 1: tables[1]})
    out.append(_le("green", "b0_reduces_to_U", "resolvent-series",
                   np.max(np.abs(gfree.G.values - tables[0].values)), 0.0))

    target = {1: 1.5, 2: 1.25}
    for n in (1, 2):
        xl = -np.linspace(0.3, 60.0, 4000)[::-1]
        vals = airy.fundamental_solution(n, 0, 1.0, xl)
        fit = airy.fit_decay_exponents(None, "left", x=xl, values=vals, n=n)
        out.append(_le("green", f"U_left_stretch_n{n}", "kernel-decay",
                       abs(fit.stretch / target[n] - 1.0), cfg.tol("stretch", 0.10),
                       target=f"{target[n]:.4g}", note=f"fitted {fit.stretch:.4f}"))
    est = green.verify_green_estimates(gt)
    for k in (0, 1):
        st = est[f"k{k}"]["left_stretch"]
        out.append(_le("green", f"G_left_stretch_d{k}", "green-decay",
                       abs(st / est["target_stretch"] - 1.0), cfg.tol("stretch", 0.10),
                       target=f"{est['target_stretch']:.4g}", note=f"fitted {st:.4f}"))

    taus = np.array([0.02, 0.01, 0.005])
    energies = [green.gamma_weighted_energy(gt, 0.0, 1.0, 1.0, 1.0 - t, 0.0) for t in taus]
    slope = np.polyfit(np.log(taus), np.log(energies), 1)[0]
    expected = -4.0 / 3.0
    out.append(_le("green", "gamma_weighted_energy_exponent", "kernel-weighted-energy",
                   abs(slope / expected - 1.0), cfg.tol("gamma_exponent", 0.15),
                   target=f"{expected:.4g}", note=f"fitted {slope:.4f}"))

    # nonlinear solution equals G*u0 + (-1)^n int G * gamma d(u^2)
    nspec = ProblemSpec(1, (-0.1, 0.0), 0.5)
    sol, _ = picard.solve_nonlinear(u0, None, nspec, grid, picard.PicardConfig(tol=1e-11))
    src = Trajectory(picard.nonlinear_source(sol.values, nspec, grid), sol.ygrid)
    rep = green.solve_linear_green(u0, src, gt)
    out.append(_le("green", "nonlinear_integral_representation", "integral-identity",
                   _rel_traj(rep.values, sol.values, grid), cfg.tol("green_cross", 1e-3)))
    return out


# ---------------------------------------------------------------- picard

def _picard_spec(n, gamma=1.0):
    return ProblemSpec(1, (-0.1, 0.0), gamma) if n == 1 else ProblemSpec(2, (0.1, 0.0, 0.0, 0.0), gamma)


def soliton(c, x, y, x0=0.0):
    """One-soliton of ``-u_y + u_xxx = -3 d/dx (u^2)``, moving toward -x with speed c."""
    return 0.5 * c / np.cosh(0.5 * math.sqrt(c) * (x + c * y - x0)) ** 2


def picard_suite(cfg):
    out = []
    spec = _picard_spec(cfg.n)
    expr = manufactured.gaussian_decay()
    pc = picard.PicardConfig(tol=1e-12, max_iter=80)
    errs = []
    for M in (11, 21, 41):
        g = GridSpec(12.0, 128, M)
        u0, F, exact = manufactured.manufactured_problem(expr, spec, g)
        sol, _ = picard.solve_nonlinear(u0, F, spec, g, pc)
        errs.append(np.max(np.abs(sol.values - exact.values)))
    out.append(_ge("picard", "manufactured_nonlinear_order", "picard-window",
                   _observed_orders(errs).min(), cfg.tol("picard_order", 2.0)))

    grid = GridSpec(20.0, 256, 101)
    u0 = _gaussian(grid)
    auto = picard.PicardConfig(tol=1e-11, max_iter=80, window_policy="auto")
    sol, trace = picard.solve_nonlinear(u0, None, spec, grid, auto)
    worst = 0.0
    for w in range(len(trace.windows)):
        r = trace.ratios(w)[2:]
        r = r[np.isfinite(r)]
        if r.size:
            worst = max(worst, float(r.max()))
    out.append(_le("picard", "monotone_iterate_differences", "picard-window", worst, 1.0,
                   target="< 1", note=f"{len(trace.windows)} windows"))
    single = picard.PicardConfig(tol=1e-11, max_iter=80)
    one, _ = picard.solve_nonlinear(u0, None, spec, grid, single)
    step = picard.picard_step(one, u0, None, spec, grid)
    out.append(_le("picard", "fixed_point_of_step", "picard-window",
                   picard._st_norm(step.values - one.values, grid, grid.dy(spec.y0)), single.tol))
    guard = max(r["sup_norm2"] for r in trace.records) / picard.energy_ceiling(u0, None, grid)
    out.append(_le("picard", "ceiling_guard_not_triggered", "picard-window", guard,
                   picard.GUARD_FACTOR))
    diag = picard.energy_diagnostics(sol, spec, grid)
    sharp = float(np.max(diag["norm2"] + diag["d2_norm2"]) / diag["ceiling"])
    out.append(_le("picard", "a_priori_ceiling_sharp", "picard-window", sharp, 1.0,
                   target="<= 1", note="sup int (u_xx^2 + u^2) over 2 E0 + C5"))

    # energy identity: b = 0 conserves ||u||^2; the mean follows its own ODE
    cons = ProblemSpec(spec.n, (), 1.0)
    g = GridSpec(20.0, 256, 401)
    sol_c, _ = picard.solve_nonlinear(_gaussian(g), None, cons, g, auto)
    d = picard.energy_diagnostics(sol_c, cons, g)
    out.append(_le("picard", "energy_conserved_b0", "uniqueness-energy",
                   np.max(np.abs(d["norm2"] / d["norm2"][0] - 1.0)), cfg.tol("energy_conservation", 1e-6)))
    d = picard.energy_diagnostics(sol, spec, grid)
    rate = (-1) ** (spec.n + 1) * spec.b[0]
    mean_exact = d["mean"][0] * np.exp(rate * d["y"])
    out.append(_le("picard", "mean_mode_ode", "uniqueness-energy",
                   np.max(np.abs(d["mean"] - mean_exact)) / abs(d["mean"][0]), cfg.tol("mean_mode", 1e-10)))
    neg, _ = picard.solve_nonlinear(-u0, None, ProblemSpec(spec.n, spec.b, -spec.gamma), grid, auto)
    out.append(_le("picard", "gamma_sign_symmetry", "uniqueness-energy",
                   np.max(np.abs(neg.values + sol.values)), cfg.tol("symmetry", 1e-12)))

    # classical soliton carried across many windows
    kdv = ProblemSpec(1, (), -3.0)
    g = GridSpec(40.0, 512, 201)
    exact = np.array([soliton(2.0, g.x, yv) for yv in g.ygrid(1.0)])
    sol_s, tr = picard.solve_nonlinear(exact[0], None, kdv, g, auto)
    out.append(_le("picard", "soliton_shape_error", "continuation",
                   _rel_traj(sol_s.values, exact, g), cfg.tol("soliton", 1e-3),
                   note=f"{len(tr.windows)} windows"))
    y1 = picard.compute_y1(_gaussian(g), None, picard.PicardConfig(), kdv, g)
    out.append(_le("picard", "y1_gaussian_oracle", "picard-window",
                   abs(y1 * 4 * 4 * math.sqrt(math.pi / 2) - 1.0), 1e-10,
                   note="y1 = 1/(4 C4 E0) with E0 = 4 sqrt(pi/2)"))
    return out


# ---------------------------------------------------------------- weak form

def weakform_suite(cfg):
    out = []
    spec = _linear_spec(cfg.n)
    expr = manufactured.gaussian_decay()
    phi = norms.TestFunction(norms.Bump(0.5, 0.45), norms.Bump(0.0, 5.0))
    res, bad = [], []
    for M in (21, 41, 81, 161):
        g = GridSpec(12.0, 128, M)
        u0, F, _ = manufactured.manufactured_problem(expr, spec, g)
        u = spectral.solve_linear(u0, F, spec, g)
        res.append(abs(norms.weak_residual(u, phi, spec, g, F)))
        wobble = 0.01 * np.outer(1 + g.ygrid(1.0), np.sin(g.x) * np.exp(-g.x ** 2 / 8))
        corrupt = Trajectory(u.values + wobble * np.max(np.abs(u.values)), u.ygrid)
        bad.append(abs(norms.weak_residual(corrupt, phi, spec, g, F)))
    out.append(_ge("weakform", "weak_residual_order", "weak-solution",
                   _observed_orders(res).min(), cfg.tol("weak_order", 2.0)))
    out.append(_le("weakform", "negative_control_stalls", "weak-solution",
                   abs(_observed_orders(bad)[-1]), 0.5, target="< 0.5",
                   note="residuals " + ", ".join(f"{v:.3e}" for v in bad)))

    tiny = ProblemSpec(spec.n, spec.b, 0.0, 1e-6)
    g = GridSpec(20.0, 256, 11)
    u0 = _gaussian(g)
    u = spectral.solve_linear(u0, None, tiny, g)
    weak, strong = norms.initial_attainment(u, u0, norms.Bump(0.0, 3.0), g, levels=5)
    out.append(_le("weakform", "initial_attainment_weak", "initial-attainment", weak[0], 1e-6,
                   note=f"monotone={bool(np.all(np.diff(weak) > 0))}"))
    out.append(_le("weakform", "initial_attainment_strong", "initial-attainment", strong[0], 1e-6,
                   note=f"monotone={bool(np.all(np.diff(strong) > 0))}"))
    mono = float(not (np.all(np.diff(weak) > 0) and np.all(np.diff(strong) > 0)))
    out.append(_le("weakform", "initial_gaps_monotone", "initial-attainment", mono, 0.5, target="0"))

    xs = np.linspace(-3, 5, 8001)
    viol = 0.0
    for alpha in (0.0, 0.5, 2.0, 3.5):
        w = norms.weight_eval(("psi", alpha), xs)
        viol = max(viol, np.max(np.abs(w[xs <= 0.5])), np.max(np.abs(w[xs >= 1] - xs[xs >= 1] ** alpha)),
                   max(0.0, -np.min(np.diff(w))), max(0.0, -np.min(norms.psi_derivative(alpha, xs))))
    out.append(_le("weakform", "psi_weight_invariants", "psi-weights", viol, 1e-14))
    viol = 0.0
    for alpha, r in ((1.0, 2.0), (3.5, 0.5)):
        w = norms.weight_eval(("rho_r", alpha, r), xs)
        base = norms.weight_eval(("rho", alpha), xs)
        viol = max(viol, np.max(np.abs(w[xs >= -r] - base[xs >= -r])),
                   abs(norms.weight_eval(("rho_r", alpha, r), np.array([-2 * r]))[0] - (1 + r) ** alpha),
                   np.max(np.abs(np.diff(w))) - 0.01 * max(1.0, alpha * (1 + r) ** alpha))
    out.append(_le("weakform", "rho_weight_invariants", "rho-weights", max(viol, 0.0), 1e-12))

    g = GridSpec(32.0, 4096, 2)
    rough = np.where(np.abs(g.x) < 2, 1.0, 0.0) * np.sign(g.x + 0.3)
    gaps = [l2_norm(norms.mollify(rough, h, g) - rough, g) for h in (0.2, 0.1, 0.05)]
    ratio = max(l2_norm(norms.mollify(rough, h, g), g) / l2_norm(rough, g) for h in (0.2, 0.1, 0.05))
    out.append(_le("weakform", "mollifier_contraction", "mollified-data", ratio - 1.0, 1e-12))
    out.append(_le("weakform", "mollifier_convergence", "mollified-data",
                   float(not np.all(np.diff(gaps) < 0)), 0.5, target="0",
                   note="gaps " + ", ".join(f"{v:.3e}" for v in gaps)))
    return out


# ---------------------------------------------------------------- dependence

def _dependence_spec(n):
    return ProblemSpec(1, (-0.2, 0.0), 1.0, 0.5) if n == 1 else ProblemSpec(2, (0.2, 0.0, -0.1, 0.0), 1.0, 0.5)


def run_dependence_suite(u0, v0, spec, grid, alpha=1.0, pcfg=None):
    """Return ``(sup_y ratio, ratio array)`` for the weighted difference of two solutions."""
    pcfg = pcfg or picard.PicardConfig(tol=1e-11, max_iter=80, window_policy="auto")
    diff0 = np.asarray(u0) - np.asarray(v0)
    denom = norms.sq_norm(diff0, grid) + norms.N_alpha(diff0, alpha, grid)
    if denom == 0.0:
        return 0.0, np.zeros(grid.M)
    for data in (u0, v0):
        if not np.isfinite(norms.M_functional(Trajectory.constant(data, [0.0]), spec.n, grid)):
            raise InsufficientDataError("data outside the uniqueness class")
    u, _ = picard.solve_nonlinear(u0, None, spec, grid, pcfg)
    v, _ = picard.solve_nonlinear(v0, None, spec, grid, pcfg)
    w = norms.weight_eval(("rho", alpha), grid.x)
    d = u.values - v.values
    ratio = np.sum(w * d * d, axis=1) * grid.dx / denom
    return float(ratio.max()), ratio


def dependence_suite(cfg):
    out = []
    for n in (1, 2):
        spec = _dependence_spec(n)
        grid = GridSpec(20.0, 256, 51)
        u0 = 0.5 * _gaussian(grid)
        bump = _gaussian(grid, 1.5, 1.0)
        runs = [run_dependence_suite(u0, u0 + d * bump, spec, grid) for d in (1e-2, 5e-3, 2.5e-3)]
        sups = [r[0] for r in runs]
        # the sup is often attained at y = 0, so compare the whole ratio curves level by level
        curves = np.array([r[1] for r in runs])
        spread = float(np.max(curves.max(axis=0) / curves.min(axis=0)))
        out.append(_le("dependence", f"ratio_stability_n{n}", "continuous-dependence", spread, 2.0,
                       target="<= 2", note="sups " + ", ".join(f"{v:.4g}" for v in sups)
                       + "; final-level ratios " + ", ".join(f"{c[-1]:.4g}" for c in curves)))
    return out


# ---------------------------------------------------------------- blow-up rate

def rough_profile(x, delta=1e-3, inner=30.0):
    """``(x^2 + delta^2)^(-1/8)`` smoothly windowed to ``|x| < inner``."""
    return (x * x + delta * delta) ** (-0.125) * norms.smoothstep((inner - np.abs(x)) / 10.0)


def run_blowup_rate_suite(u0, spec, grid, x0=0.0, ys=None):
    """Fit ``sup_{x<=x0}|u(y,x)| ~ y^(-e)``; returns ``e`` from exact spectral propagation."""
    ys = np.logspace(-4, -1, 10) if ys is None else np.asarray(ys)
    if ys.size < 4:
        raise InsufficientDataError("at least four y-levels are needed for the exponent fit")
    sym = spectral.build_symbol(spec, grid)
    s = to_spectral(u0, grid)
    mask = grid.x <= x0
    sups = [np.max(np.abs(spectral.rows_from_spectral((s * spectral.growth_factor(sym, y))[None],
                                                      grid)[0][mask])) for y in ys]
    return float(-np.polyfit(np.log(ys), np.log(sups), 1)[0])


def blowup_suite(cfg):
    out = []
    for n in (1, 2):
        spec = ProblemSpec(n)
        grid = GridSpec(40.0, 2 ** 14, 2)
        e = run_blowup_rate_suite(rough_profile(grid.x), spec, grid)
        bound = 1 / (4 * n) + 0.1
        out.append(_le("blowup-rate", f"rough_exponent_n{n}", "interior-blowup-rate", e, bound,
                       target=f"<= {bound:.4g}", note=f"self-similar value {1 / (4 * (2 * n + 1)):.4g}"))
        es = run_blowup_rate_suite(_gaussian(grid), spec, grid)
        out.append(_le("blowup-rate", f"smooth_exponent_n{n}", "interior-blowup-rate", abs(es), 0.1,
                       target="~ 0"))
    return out


# ---------------------------------------------------------------- driver

_RUNNERS = {"airy": airy_suite, "linear": linear_suite, "green": green_suite,
            "picard": picard_suite, "weakform": weakform_suite,
            "dependence": dependence_suite, "blowup-rate": blowup_suite}


def coverage(checks, waivers=None):
    """Anchors from ``ANCHORS`` that have neither a check nor a waiver."""
    seen = {c.anchor for c in checks}
    waived = set(waivers or ())
    return sorted(a for a in ANCHORS if a not in seen and a not in waived)


def run_all(cfg=None):
    cfg = cfg or SuiteConfig()
    report = VerificationReport()
    report.manifest = {"config_sha256": cfg.digest(), "suites": list(cfg.suites), "n": cfg.n,
                       "seed": cfg.seed, "numpy": np.__version__}
    np.random.seed(cfg.seed)
    for name in cfg.suites:
        t0 = time.perf_counter()
        try:
            report.extend(_RUNNERS[name](cfg))
        except (GKdVError, ValueError, ArithmeticError) as exc:
            report.checks.append(CheckRecord(name, f"{name}_aborted", "plumbing", float("nan"),
                                             "completes", 0.0, False, f"{type(exc).__name__}: {exc}"))
        report.timing[name] = time.perf_counter() - t0
    if set(cfg.suites) == set(SUITES):
        missing = coverage(report.checks)
        report.checks.append(CheckRecord("coverage", "anchor_coverage", "plumbing", float(len(missing)),
                                         "0", 0.0, not missing, ", ".join(missing)))
    if cfg.out_dir:
        report.write(cfg.out_dir)
    return report
