"""Green function of the full linear operator built from the fundamental solution.

Moving the lower-order terms to the right-hand side turns the Cauchy problem
into ``u = w + J u`` with

    J v (y, x) = (-1)^(n+1) int_0^y int sum_k b_k d^k U(y - eta, x - xi) v(eta, xi) dxi deta,

where ``w`` is the model-equation solution.  The kernel of the resolvent series
``G = U + J U + J^2 U + ...`` is assembled term by term: by the semigroup
property the x-convolutions of kernel families collapse, and the ``m``-th
iterate is ``(y^m / m!) B^m U`` with ``B = (-1)^(n+1) sum b_k d^k``.  Fields are
convolved with sampled kernels by the trapezoid rule (done with FFTs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import airy
from .core import Trajectory, check_field, spectral_derivative
from .errors import ConfigurationError, DivergenceError, DomainError, InsufficientDataError
from .norms import weight_eval


@dataclass(frozen=True)
class ResolventConfig:
    max_terms: int = 60
    series_tol: float = 1e-13

    def __post_init__(self):
        if self.max_terms < 1:
            raise ConfigurationError("max_terms must be >= 1")
        if not self.series_tol > 0:
            raise ConfigurationError("series_tol must be positive")


def kernel_polynomial(spec):
    """Coefficients (by derivative order) of ``B = (-1)^(n+1) sum b_k d^k``."""
    s = (-1) ** (spec.n + 1)
    return npoly.polytrim(np.array([s * b for b in spec.b]) if any(spec.b) else np.zeros(1), tol=0)


@dataclass
class GreenTable:
    """``G`` and ``dG/dx`` sampled on the y-grid times all grid offsets.

    ``coefficients[m]`` holds the derivative-order coefficients of ``B^m``; the
    table can therefore also be evaluated off-grid through :meth:`evaluate`.
    """

    G: airy.KernelTable
    dG: airy.KernelTable
    iterate_norms: list
    converged: bool
    coefficients: list
    spec: object
    grid: object
    quad_tol: float = 1e-12
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.spec.n

    def combined_coefficients(self, y):
        """``c_j(y) = sum_m y^m/m! (B^m)_j`` for each requested y (array)."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        width = max(c.size for c in self.coefficients)
        out = np.zeros((y.size, width))
        for m, c in enumerate(self.coefficients):
            out[:, : c.size] += np.outer(y ** m / math.factorial(m), c)
        return out

    def evaluate(self, y, x, deriv=0):
        """``d^deriv/dx^deriv G(y, x)`` at y > 0 (scalar) and an array of x."""
        if y <= 0:
            raise DomainError("G is evaluated at y > 0 only")
        c = self.combined_coefficients(y)[0]
        orders = [j + deriv for j in range(c.size) if c[j] != 0.0]
        if not orders:
            return np.zeros_like(np.asarray(x, dtype=float))
        vals = airy.fundamental_derivatives(self.n, orders, y, x, self.quad_tol)
        weights = [c[j - deriv] for j in orders]
        return np.tensordot(weights, vals, axes=1)

    def save(self, path):
        """Binary block + JSON sidecar for G, with the iterate-norm history embedded."""
        self.G.meta.update(iterate_norms=self.iterate_norms, converged=self.converged,
                           coefficients=[c.tolist() for c in self.coefficients])
        self.G.save_binary(path)


def build_green(spec, grid, cfg=None, utables=None, quad_tol=1e-12):
    if cfg is None:
        cfg = ResolventConfig()
    if not spec.wellposed_condition:
        raise ConfigurationError("the resolvent series is only built for specs satisfying "
                                 "the well-posedness condition")
    beta = kernel_polynomial(spec)
    tables = dict(utables or {})

    def table(order):
        if order not in tables:
            tables.update(airy.build_u_tables(spec, grid, (order,), quad_tol))
        return tables[order].values

    ygrid = grid.ygrid(spec.y0)
    G = table(0).copy()
    dG = table(1).copy()
    coefficients = [np.array([1.0])]
    norms = []
    converged = not np.any(beta)
    power = np.array([1.0])
    for m in range(1, cfg.max_terms + 1):
        if converged:
            break
        power = npoly.polymul(power, beta)
        coefficients.append(power)
        scale = (ygrid ** m / math.factorial(m))[:, None]
        term = np.zeros_like(G)
        dterm = np.zeros_like(G)
        for j, c in enumerate(power):
            if c != 0.0:
                term += c * table(j)
                dterm += c * table(j + 1)
        term *= scale
        dterm *= scale
        G += term
        dG += dterm
        norms.append(float(np.max(np.abs(term))))
        if norms[-1] < cfg.series_tol:
            converged = True
            break
        if len(norms) >= 4 and all(norms[-i] >= norms[-i - 1] for i in range(1, 4)):
            raise DivergenceError("resolvent series iterates stopped decreasing", history=norms)
    xg = airy.offsets(grid)
    return GreenTable(airy.KernelTable(G, ygrid, xg, "G", 0, spec.n),
                      airy.KernelTable(dG, ygrid, xg, "G", 1, spec.n),
                      norms, converged, coefficients, spec, grid, quad_tol)


# ---------------------------------------------------------------- convolutions

class _Convolver:
    """Trapezoid sums ``sum_j K(x_i - x_j) v_j dx`` via zero-padded FFTs."""

    def __init__(self, grid):
        self.N = grid.N
        self.dx = grid.dx
        self.size = 1 << int(np.ceil(np.log2(3 * grid.N - 2)))

    def kernel_hat(self, rows):
        return np.fft.rfft(np.atleast_2d(rows), n=self.size, axis=-1)

    def field_hat(self, rows):
        return np.fft.rfft(np.atleast_2d(rows), n=self.size, axis=-1)

    def back(self, prod):
        full = np.fft.irfft(prod, n=self.size, axis=-1)
        return full[..., self.N - 1: 2 * self.N - 1] * self.dx


def _trapezoid_weights(m, h):
    w = np.full(m + 1, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _duhamel_trapezoid(Khat, Vhat, conv, values, ygrid, at_zero):
    M = values.shape[0]
    h = ygrid[1] - ygrid[0]
    out = np.zeros_like(values)
    for m in range(1, M):
        w = _trapezoid_weights(m, h)
        # lag m - i for i = 0..m-1; lag 0 handled exactly
        acc = np.einsum("i,ij->j", w[:m], Khat[m:0:-1] * Vhat[:m])
        out[m] = conv.back(acc) + w[m] * at_zero(values[m])
    return out


def _combined_u_kernel(spec, grid, utables):
    beta = [((-1) ** (spec.n + 1)) * b for b in spec.b]
    rows = None
    for k, c in enumerate(beta):
        if c == 0.0:
            continue
        if k not in utables:
            raise ConfigurationError(f"missing U derivative table of order {k}")
        part = c * utables[k].values
        rows = part if rows is None else rows + part
    return beta, rows


def apply_J(v, spec, grid, utables):
    """Quadrature version of the lower-order correction operator on a trajectory."""
    values = np.asarray(v.values if isinstance(v, Trajectory) else v, dtype=float)
    if utables is None:
        raise ConfigurationError("U derivative tables are required")
    beta, rows = _combined_u_kernel(spec, grid, utables)
    ygrid = grid.ygrid(spec.y0)
    if rows is None or not np.any(values):
        return Trajectory(np.zeros_like(values), ygrid)

    def at_zero(f):
        return sum(c * spectral_derivative(f, grid, k) for k, c in enumerate(beta) if c != 0.0)

    conv = _Convolver(grid)
    out = _duhamel_trapezoid(conv.kernel_hat(rows), conv.field_hat(values), conv, values, ygrid,
                             at_zero)
    return Trajectory(out, ygrid)


def model_solution(u0, spec, grid, utables):
    """``U * u0`` at every y-level (the ``b = 0`` evolution by quadrature)."""
    u0 = check_field(np.asarray(u0, dtype=float), grid)
    conv = _Convolver(grid)
    out = conv.back(conv.kernel_hat(utables[0].values[1:]) * conv.field_hat(u0))
    return Trajectory(np.vstack([u0, out]), grid.ygrid(spec.y0))


def solve_integral_equation(u0, spec, grid, utables, iterations=30, tol=1e-12):
    """Neumann iteration ``u <- U*u0 + J u`` of the integral equation on fields."""
    w = model_solution(u0, spec, grid, utables)
    u = w
    history = []
    for _ in range(iterations):
        new = Trajectory(w.values + apply_J(u, spec, grid, utables).values, w.ygrid)
        history.append(float(np.max(np.abs(new.values - u.values))))
        u = new
        if history[-1] < tol:
            break
    return u, history


def solve_linear_green(u0, f, gt):
    """``u = G * u0 + (-1)^n int G(y - eta) * f(eta) deta`` by trapezoid sums."""
    if not gt.converged:
        raise ConfigurationError("Green table did not converge; refusing to solve with it")
    spec, grid = gt.spec, gt.grid
    u0 = check_field(np.asarray(u0, dtype=float), grid)
    conv = _Convolver(grid)
    Ghat = conv.kernel_hat(gt.G.values)
    values = np.empty((grid.M, grid.N))
    values[0] = u0
    values[1:] = conv.back(Ghat[1:] * conv.field_hat(u0))
    if f is not None:
        fv = np.asarray(f.values if isinstance(f, Trajectory) else f, dtype=float)
        src = _duhamel_trapezoid(Ghat, conv.field_hat(fv), conv, fv, gt.G.ygrid, lambda g: g)
        values += spec.sign * src
    return Trajectory(values, gt.G.ygrid)


# ---------------------------------------------------------------- estimates

def verify_green_estimates(gt, y=None, count=4000):
    """Fit the decay of ``G`` and ``dG/dx`` at one y on both sides.

    Left side: stretched exponent (expected ``(2n+1)/(2n)``).  Right side: raw
    envelope power of the oscillation peaks, reported only.
    """
    y = gt.spec.y0 if y is None else y
    s = y ** (1.0 / (2 * gt.n + 1))
    report = {"y": y, "n": gt.n, "target_stretch": (2 * gt.n + 1) / (2 * gt.n)}
    xl = -np.linspace(0.3 * s, 60.0 * s, count)[::-1]
    xr = np.linspace(1.0 * s, 200.0 * s, 2 * count)
    for k in (0, 1):
        left = airy.fit_decay_exponents(None, "left", x=xl, values=gt.evaluate(y, xl, k), n=gt.n)
        try:
            right = airy.fit_decay_exponents(None, "right", x=xr, values=gt.evaluate(y, xr, k), n=gt.n)
            right_power = right.power
        except InsufficientDataError:
            right_power = None
        report[f"k{k}"] = {"left_stretch": left.stretch, "left_power": left.power,
                           "left_residual": left.residual, "right_envelope_power": right_power}
    return report


def gamma_weighted_energy(gt, alpha, r, y, eta, xi, points_per_wave=24, tail=40.0):
    """``int (dG/dx (y - eta, x - xi))^2 rho_{alpha,r}(x) dx`` by the trapezoid rule.

    The x-grid is built for the lag ``y - eta`` so the oscillating tail of the
    kernel is resolved; the x > 0 side is cut where the weight is below e^-tail.
    """
    tau = y - eta
    if tau <= 0:
        raise DomainError("gamma-weighted energy needs eta < y")
    p = 2 * gt.n + 1
    s = tau ** (1.0 / p)
    right = max(xi, 0.0) + tail + 1.0
    left = xi - 40.0 * s - 1.0
    if alpha > 0:
        left = min(left, -r - 1.0)
    reach = max(right - xi, 1.0)
    freq = (reach / (p * tau)) ** (1.0 / (p - 1))
    count = int(min(4e5, max(2000, (right - left) * freq * points_per_wave / (2 * np.pi))))
    x = np.linspace(left, right, count)
    g = gt.evaluate(tau, x - xi, 1)
    w = weight_eval(("rho_r", alpha, r), x)
    return float(np.trapezoid(g * g * w, x))
