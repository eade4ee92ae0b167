"""Picard iteration for the nonlinear problem ``L u = gamma d/dx (u^2) + F``.

Each iterate solves the linear problem with the quadratic term frozen at the
previous iterate.  The admissible window length ``y1`` depends on the data only
through ``E0 = int (u0'')^2 + u0^2`` and the source size ``C5``; longer
intervals are covered by restarting from the last slice of each window.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .core import GridSpec, ProblemSpec, Trajectory, spectral_derivative
from .errors import (BoundViolationError, ConfigurationError, ConvergenceError, DivergenceError,
                     StructuralError)
from .spectral import build_symbol, solve_linear

GUARD_FACTOR = 1e6


@dataclass(frozen=True)
class PicardConfig:
    epsilon: float = 0.5
    C4: float = 1.0
    tol: float = 1e-10
    max_iter: int = 60
    window_policy: str = "single"

    def __post_init__(self):
        if not self.epsilon > 0 or not self.C4 > 0:
            raise ConfigurationError("epsilon and C4 must be positive")
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 2:
            raise ConfigurationError("max_iter must be an integer >= 2")
        if self.window_policy not in ("single", "auto"):
            raise ConfigurationError(f"unknown window policy {self.window_policy!r}")


@dataclass
class IterationTrace:
    """One record per Picard iterate (all windows appended in order)."""

    records: list = field(default_factory=list)
    windows: list = field(default_factory=list)

    COLUMNS = ("window", "m", "sup_norm2", "sup_d2_norm2", "diff", "wall_time")

    def append(self, **rec):
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    def column(self, name, window=None):
        return np.array([r[name] for r in self.records if window is None or r["window"] == window])

    def ratios(self, window=0):
        """Successive ratios of iterate differences within one window."""
        d = self.column("diff", window)
        with np.errstate(divide="ignore", invalid="ignore"):
            return d[1:] / d[:-1]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.COLUMNS)
            for r in self.records:
                w.writerow([r[c] for c in self.COLUMNS])


def _source_values(F):
    if F is None:
        return None
    return np.asarray(F.values if isinstance(F, Trajectory) else F, dtype=float)


def data_energy(u0, grid):
    """``E0 = int (u0'')^2 + u0^2`` with spectral second derivative."""
    u0 = np.asarray(u0, dtype=float)
    d2 = spectral_derivative(u0, grid, 2)
    return float(np.sum(d2 * d2 + u0 * u0) * grid.dx)


def source_constant(F, grid, epsilon):
    """``C5 = (1/epsilon) sup_y int F^2 + F_xx^2``; zero without a source."""
    fv = _source_values(F)
    if fv is None or not np.any(fv):
        return 0.0
    d2 = spectral_derivative(fv, grid, 2)
    return float(np.max(np.sum(fv * fv + d2 * d2, axis=1)) * grid.dx / epsilon)


def compute_y1(u0, F, cfg, spec, grid):
    E0 = data_energy(u0, grid)
    C5 = source_constant(F, grid, cfg.epsilon)
    if E0 == 0.0 and C5 == 0.0:
        return float("inf")
    return (E0 + C5) / (4.0 * cfg.C4 * E0 ** 2 + 2.0 * C5 ** 2 + C5)


def energy_ceiling(u0, F, grid, epsilon=0.5):
    """``2 E0 + C5``: the a-priori bound on ``sup_y int (u_xx)^2 + u^2`` within a window."""
    return 2.0 * data_energy(u0, grid) + source_constant(F, grid, epsilon)


def dealias_mask(grid):
    j = np.abs(np.fft.fftfreq(grid.N, d=1.0 / grid.N))
    return j <= grid.N // 3


def dealiased_square(values, grid):
    """``u^2`` with the top third of modes removed before and after the product."""
    mask = dealias_mask(grid)
    uh = np.fft.fft(np.atleast_2d(values), axis=-1) * mask
    u = np.fft.ifft(uh, axis=-1).real
    sq = np.fft.fft(u * u, axis=-1) * mask
    return np.fft.ifft(sq, axis=-1).real


def nonlinear_source(values, spec, grid, F=None):
    src = spec.gamma * spectral_derivative(dealiased_square(values, grid), grid, 1)
    fv = _source_values(F)
    if fv is not None:
        src = src + fv
    if not np.all(np.isfinite(src)):
        raise DivergenceError("non-finite nonlinear source", history=[])
    return src


def picard_step(prev, u0, F, spec, grid, sym=None):
    """One iterate ``L u_m = gamma d/dx (u_{m-1}^2) + F`` with ``u_m(0) = u0``."""
    pv = np.asarray(prev.values if isinstance(prev, Trajectory) else prev, dtype=float)
    if pv.shape != (grid.M, grid.N):
        raise StructuralError(f"previous iterate shape {pv.shape} does not match {(grid.M, grid.N)}")
    if spec.gamma == 0.0 and F is None:
        return solve_linear(u0, None, spec, grid, acknowledge_growth=True, sym=sym)
    src = nonlinear_source(pv, spec, grid, F)
    return solve_linear(u0, Trajectory(src, grid.ygrid(spec.y0)), spec, grid,
                        acknowledge_growth=True, sym=sym)


def _st_norm(values, grid, dy):
    return float(np.sqrt(np.sum(values * values) * grid.dx * dy))


def _iterate_window(u0, F, spec, grid, cfg, trace, window, ceiling):
    sym = build_symbol(spec, grid)
    dy = grid.dy(spec.y0)
    prev = Trajectory.zeros(grid, spec.y0)
    history = []
    for m in range(1, cfg.max_iter + 1):
        t0 = time.perf_counter()
        cur = picard_step(prev, u0, F, spec, grid, sym)
        diff = _st_norm(cur.values - prev.values, grid, dy)
        sq = np.sum(cur.values ** 2, axis=1) * grid.dx
        d2 = spectral_derivative(cur.values, grid, 2)
        trace.append(window=window, m=m, sup_norm2=float(sq.max()),
                     sup_d2_norm2=float(np.max(np.sum(d2 * d2, axis=1)) * grid.dx),
                     diff=diff, wall_time=time.perf_counter() - t0)
        history.append(diff)
        if not np.isfinite(diff):
            raise DivergenceError("Picard iterate became non-finite", history=history)
        if ceiling > 0 and sq.max() > GUARD_FACTOR * ceiling:
            raise BoundViolationError(
                f"sup ||u_m||^2 = {sq.max():.3e} exceeds {GUARD_FACTOR:.0e} x ceiling {ceiling:.3e}",
                trace=trace)
        prev = cur
        if diff < cfg.tol:
            return cur
    raise ConvergenceError(f"Picard iteration did not reach tol={cfg.tol:g} in {cfg.max_iter} "
                           f"iterations (window {window}, last diff {history[-1]:.3e})", trace=trace)


def _window_steps(y1, dy, remaining):
    steps = int(np.floor(min(y1, remaining * dy) / dy + 1e-9))
    return int(min(max(steps, 2), remaining))


def solve_nonlinear(u0, F, spec, grid, cfg=None):
    """Picard solve on ``[0, y0]``; returns ``(Trajectory, IterationTrace)``.

    With ``window_policy="auto"`` the interval is split into windows of length
    ``min(y1, remaining)`` (rounded down to whole y-steps, at least two) with
    ``y1`` recomputed from each window's initial slice.
    """
    cfg = PicardConfig() if cfg is None else cfg
    if not spec.wellposed_condition:
        raise ConfigurationError("nonlinear solves require the well-posedness condition on b")
    u0 = np.asarray(u0, dtype=float)
    fv = _source_values(F)
    ygrid = grid.ygrid(spec.y0)
    dy = grid.dy(spec.y0)
    trace = IterationTrace()
    if cfg.window_policy == "single":
        ceiling = energy_ceiling(u0, fv, grid, cfg.epsilon)
        y1 = compute_y1(u0, fv, cfg, spec, grid)
        sol = _iterate_window(u0, fv, spec, grid, cfg, trace, 0, ceiling)
        trace.windows.append({"start": 0.0, "end": spec.y0, "y1": y1})
        return Trajectory(sol.values, ygrid, {"y1": y1, "windows": trace.windows}), trace

    out = np.empty((grid.M, grid.N))
    out[0] = u0
    start, window, data = 0, 0, u0
    while start < grid.M - 1:
        fw = None if fv is None else fv[start:]
        y1 = compute_y1(data, fw, cfg, spec, grid)
        steps = _window_steps(y1, dy, grid.M - 1 - start) if np.isfinite(y1) else grid.M - 1 - start
        fw = None if fv is None else fv[start: start + steps + 1]
        wspec = ProblemSpec(spec.n, spec.b, spec.gamma, steps * dy)
        wgrid = GridSpec(grid.L, grid.N, steps + 1)
        ceiling = energy_ceiling(data, fw, grid, cfg.epsilon)
        sol = _iterate_window(data, fw, wspec, wgrid, cfg, trace, window, ceiling)
        out[start + 1: start + steps + 1] = sol.values[1:]
        trace.windows.append({"start": float(ygrid[start]), "end": float(ygrid[start + steps]),
                              "y1": y1, "clamped": bool(steps * dy > y1)})
        data = sol.values[-1]
        start += steps
        window += 1
    return Trajectory(out, ygrid, {"windows": trace.windows}), trace


def energy_diagnostics(traj, spec, grid, F=None, epsilon=0.5):
    """Per-level ``||u||^2``, ``int u`` and ``||u_xx||^2`` plus the ceiling ``2 E0 + C5``."""
    v = traj.values
    d2 = spectral_derivative(v, grid, 2)
    return {
        "y": np.asarray(traj.ygrid),
        "norm2": np.sum(v * v, axis=1) * grid.dx,
        "mean": np.sum(v, axis=1) * grid.dx,
        "d2_norm2": np.sum(d2 * d2, axis=1) * grid.dx,
        "ceiling": energy_ceiling(v[0], F, grid, epsilon),
    }


def summary_json(traj, trace, cfg, converged=True):
    return json.dumps({"converged": converged, "iterations": len(trace),
                       "windows": trace.windows, "config": cfg.__dict__}, indent=2, sort_keys=True)
