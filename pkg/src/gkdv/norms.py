"""Weights, weighted moments, semi-norms, the mollifier and weak-form checks."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp
from scipy import integrate

from .core import Trajectory, spectral_derivative
from .errors import ConfigurationError, DomainError, TestFunctionError


# ---------------------------------------------------------------- weights

@dataclass(frozen=True)
class WeightSpec:
    kind: str  # "psi", "rho" or "rho_r"
    alpha: float = 0.0
    r: float = 1.0

    def __post_init__(self):
        if self.kind not in ("psi", "rho", "rho_r"):
            raise DomainError(f"unknown weight kind {self.kind!r}")
        if self.alpha < 0:
            raise DomainError("alpha must be nonnegative")
        if self.kind == "rho_r" and not self.r > 0:
            raise DomainError("r must be positive")


def _sigma(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(x):
    """C-infinity step: 0 for x <= 1/2, 1 for x >= 1, strictly increasing between."""
    x = np.asarray(x, dtype=float)
    a = _sigma(x - 0.5)
    b = _sigma(1.0 - x)
    return a / (a + b)


def smoothstep_derivative(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    mid = (x > 0.5) & (x < 1.0)
    t = x[mid]
    a = np.exp(-1.0 / (t - 0.5))
    b = np.exp(-1.0 / (1.0 - t))
    out[mid] = a * b * (1.0 / (t - 0.5) ** 2 + 1.0 / (1.0 - t) ** 2) / (a + b) ** 2
    return out


def _as_spec(w):
    if isinstance(w, WeightSpec):
        return w
    return WeightSpec(*w)


def weight_eval(w, x):
    w = _as_spec(w)
    x = np.asarray(x, dtype=float)
    if w.kind == "psi":
        out = np.zeros_like(x)
        pos = x > 0.5
        out[pos] = x[pos] ** w.alpha * smoothstep(x[pos])
        return out
    rho = np.where(x > 0, np.exp(-np.clip(x, 0, None)), (1.0 - np.minimum(x, 0)) ** w.alpha)
    if w.kind == "rho_r":
        rho = np.where(x < -w.r, (1.0 + w.r) ** w.alpha, rho)
    return rho


def psi_derivative(alpha, x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0.5
    xp = x[pos]
    out[pos] = alpha * xp ** (alpha - 1) * smoothstep(xp) + xp ** alpha * smoothstep_derivative(xp)
    return out


# ---------------------------------------------------------------- functionals

def N_alpha(v, alpha, grid):
    """``int |x|^alpha v^2 dx`` over the whole (truncated) line."""
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    v = np.asarray(v, dtype=float)
    return float(np.sum(np.abs(grid.x) ** alpha * v * v) * grid.dx)


def sq_norm(v, grid):
    """``int v^2 dx``."""
    return N_alpha(v, 0.0, grid)


def seminorm(u, k, s, j, grid, uy=None):
    """``sup_y [ int |d_x^k d_y^j u|^2 + int (1+x^2)^s |d_y^j u|^2 ]``.

    For ``j = 1`` the y-derivative trajectory ``uy`` must be supplied (see
    :func:`gkdv.spectral.y_derivative`).
    """
    if j not in (0, 1):
        raise DomainError("j must be 0 or 1")
    if j == 1 and uy is None:
        raise ConfigurationError("seminorm with j=1 needs the y-derivative trajectory")
    base = (uy if j == 1 else u).values
    dk = spectral_derivative(base, grid, k) if k else base
    weight = (1.0 + grid.x ** 2) ** s
    per_level = (np.sum(dk * dk, axis=1) + np.sum(weight * base * base, axis=1)) * grid.dx
    return float(per_level.max()) if per_level.size else 0.0


def M_functional(u, n, grid):
    """``max_y [ int u^2 + N_{3+1/n}(u) ]``; finite values define the uniqueness class."""
    a = 3.0 + 1.0 / n
    vals = u.values
    per_level = np.sum((1.0 + np.abs(grid.x) ** a) * vals * vals, axis=1) * grid.dx
    return float(per_level.max()) if per_level.size else 0.0


# ---------------------------------------------------------------- mollifier

def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


@lru_cache(maxsize=1)
def _bump_mass():
    val, _ = integrate.quad(lambda t: float(_bump(np.array(t))), -1, 1, epsabs=1e-14, epsrel=1e-14)
    return val


def mollifier_kernel(x):
    """Standard normalized bump supported on [-1, 1]."""
    return _bump(x) / _bump_mass()


@dataclass(frozen=True)
class MollifierSpec:
    h: float

    def __post_init__(self):
        if not 0 < self.h < 1:
            raise DomainError("h must lie in (0, 1)")


def mollify(u0, m, grid):
    """Convolve with the scaled bump, then apply the two-sided smooth cutoff at ``|x| ~ 1/h``.

    The sampled kernel is renormalized to unit discrete mass, which makes the
    operation an exact L2 contraction on the grid.
    """
    h = m.h if isinstance(m, MollifierSpec) else MollifierSpec(m).h
    if 1.0 / h >= grid.L:
        raise DomainError(f"cutoff 1/h = {1 / h:.3g} must lie inside the domain L = {grid.L:.3g}")
    half = int(np.ceil(h / grid.dx))
    offs = grid.dx * np.arange(-half, half + 1)
    kern = mollifier_kernel(offs / h) / h
    mass = kern.sum() * grid.dx
    if mass <= 0:
        kern = np.zeros_like(kern)
        kern[half] = 1.0 / grid.dx
        mass = 1.0
    kern = kern / mass
    smooth = np.convolve(np.asarray(u0, dtype=float), kern, mode="same") * grid.dx
    x = grid.x
    cutoff = smoothstep(x + 1.0 / h) * smoothstep(1.0 / h - x)
    return smooth * cutoff


# ---------------------------------------------------------------- test functions

@lru_cache(maxsize=None)
def _bump_derivative_fn(k):
    t = sp.symbols("t")
    expr = sp.diff(sp.exp(-1 / (1 - t ** 2)), t, k)
    return sp.lambdify(t, expr, "numpy")


@dataclass(frozen=True)
class Bump:
    """``exp(-1/(1-t^2))`` with ``t = (z - center)/halfwidth``; exact derivatives."""

    center: float
    halfwidth: float

    @property
    def support(self):
        return self.center - self.halfwidth, self.center + self.halfwidth

    def __call__(self, z, k=0):
        z = np.asarray(z, dtype=float)
        t = (z - self.center) / self.halfwidth
        out = np.zeros_like(t)
        inside = np.abs(t) < 1
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            vals = _bump_derivative_fn(k)(t[inside])
        out[inside] = np.nan_to_num(vals) / self.halfwidth ** k
        return out


@dataclass(frozen=True)
class TestFunction:
    """Separable ``phi(y, x) = a(y) c(x)``."""

    ybump: Bump
    xbump: Bump

    __test__ = False

    def check(self, y0, L):
        ya, yb = self.ybump.support
        xa, xb = self.xbump.support
        if not (0 < ya and yb < y0 and -L < xa and xb < L):
            raise TestFunctionError("test function support must lie strictly inside (0,y0) x (-L,L)")

    def fields(self, ygrid, x, kx=0, ky=0):
        return np.outer(self.ybump(ygrid, ky), self.xbump(x, kx))


def default_test_function(spec, grid, x_center=0.0, x_halfwidth=3.0):
    return TestFunction(Bump(0.5 * spec.y0, 0.4 * spec.y0), Bump(x_center, x_halfwidth))


def adjoint_applied(phi, spec, ygrid, x):
    """``L* phi = -d^(2n+1) phi - (-1)^n d_y phi + sum_k (-1)^k b_k d^k phi``."""
    n = spec.n
    out = -phi.fields(ygrid, x, kx=2 * n + 1) - spec.sign * phi.fields(ygrid, x, ky=1)
    for k, b in enumerate(spec.b):
        if b != 0.0:
            out += (-1) ** k * b * phi.fields(ygrid, x, kx=k)
    return out


def weak_residual(u, phi, spec, grid, source=None):
    """``int int (u L*phi + gamma u^2 d_x phi - F phi) dx dy`` by the trapezoid rule."""
    phi.check(spec.y0, grid.L)
    ygrid = u.ygrid
    x = grid.x
    uv = u.values
    integrand = uv * adjoint_applied(phi, spec, ygrid, x)
    if spec.gamma:
        integrand += spec.gamma * uv * uv * phi.fields(ygrid, x, kx=1)
    if source is not None:
        fv = source.values if isinstance(source, Trajectory) else np.asarray(source)
        integrand -= fv * phi.fields(ygrid, x)
    per_level = integrand.sum(axis=1) * grid.dx
    return float(np.trapezoid(per_level, ygrid))


def initial_attainment(u, u0, omega, grid, levels=5):
    """Gaps ``|int u(y_i) w - int u0 w|`` and ``||u(y_i) - u0||`` for the first y-levels."""
    w = omega(grid.x) if callable(omega) else np.asarray(omega, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    idx = range(1, min(levels, len(u) - 1) + 1)
    weak = np.array([abs(np.sum((u.values[i] - u0) * w) * grid.dx) for i in idx])
    strong = np.array([np.sqrt(np.sum((u.values[i] - u0) ** 2) * grid.dx) for i in idx])
    return weak, strong
