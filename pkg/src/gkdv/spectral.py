"""Spectral solver for the linear problem.

With coefficients defined through ``exp(-i lam x)``, ``d/dx`` acts as ``i lam``,
so mode ``lam`` evolves by ``d/dy u = P(i lam) u + (-1)^n f``.  The table keeps
the values ``P(-i lam_j)`` and propagates with their conjugates
``P(i lam_j) = conj(P(-i lam_j))`` (``P`` has real coefficients).  Real parts,
hence growth and decay, are identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Trajectory, check_field, from_spectral, spectral_derivative, to_spectral
from .errors import GrowthError, StructuralError

EXP_LIMIT = 700.0


def horner(coeffs, z):
    """Evaluate ``sum coeffs[k] z^k`` by Horner's rule (coeffs low to high)."""
    acc = np.zeros_like(z, dtype=complex)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def symbol_polynomial(spec):
    """Coefficients (low to high) of ``P(mu) = (-1)^(n+1) [mu^(2n+1) + sum b_k mu^k]``."""
    coeffs = list(spec.b) + [0.0, 1.0]
    s = (-1) ** (spec.n + 1)
    return [s * c for c in coeffs]


@dataclass(frozen=True)
class SymbolTable:
    values: np.ndarray  # P(-i lam_j)
    wavenumbers: np.ndarray
    spec: object
    grid: object

    @property
    def multiplier(self):
        """Per-mode rate ``P(i lam_j)`` used by the propagator.

        The unpaired Nyquist mode keeps only the real part so real fields stay real.
        """
        rate = np.conj(self.values)
        nyq = rate.size // 2
        rate[nyq] = rate[nyq].real
        return rate

    @property
    def real_part(self):
        return self.values.real


def build_symbol(spec, grid):
    lam = grid.wavenumbers
    values = horner(symbol_polynomial(spec), -1j * lam)
    return SymbolTable(values, lam, spec, grid)


def even_part(spec, lam):
    """``Re P(-i lam) = -sum_k (-1)^(n+k) b_2k lam^(2k)`` evaluated directly."""
    lam = np.asarray(lam, dtype=float)
    return -sum(c * lam ** (2 * k) for k, c in enumerate(spec.even_coefficients()))


@dataclass(frozen=True)
class WellPosednessVerdict:
    wellposed_condition: bool
    spectrum_bounded: bool
    growth_bound: float


def classify_wellposedness(spec, grid):
    """Literal condition of the well-posedness theorem plus the grid growth bound.

    ``spectrum_bounded`` asks whether ``Re P(-i lam)`` is bounded above on the
    real line (decided by its leading nonconstant coefficient);
    ``growth_bound`` is the maximum of ``Re P`` over the wavenumber grid.
    """
    coeffs = spec.even_coefficients()
    bounded = True
    for c in reversed(coeffs[1:]):
        if c != 0.0:
            bounded = c > 0
            break
    growth = float(np.max(even_part(spec, grid.wavenumbers)))
    return WellPosednessVerdict(spec.wellposed_condition, bounded, growth)


def propagate(s, sym, dy):
    """Multiply each mode by ``exp(P(i lam_j) dy)``."""
    if dy < 0:
        raise StructuralError("dy must be nonnegative")
    if dy == 0:
        return np.array(s, dtype=complex, copy=True)
    return np.asarray(s) * growth_factor(sym, dy)


def growth_factor(sym, dy):
    rate = sym.multiplier
    expo = rate.real * dy
    if np.any(expo > EXP_LIMIT):
        j = int(np.argmax(expo))
        raise GrowthError(f"exp(P y) overflows at wavenumber {sym.wavenumbers[j]:.6g} "
                          f"(Re P * y = {expo[j]:.3g})", wavenumber=float(sym.wavenumbers[j]))
    return np.exp(rate * dy)


# ---------------------------------------------------------------- Duhamel weights

def psi(z, k):
    """``int_0^1 exp(z t) t^k dt`` for complex arrays, stable near ``z = 0``."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 0.5
    zs = z[small]
    term = np.ones_like(zs)
    acc = term / (k + 1)
    for m in range(1, 30):
        term = term * zs / m
        acc = acc + term / (m + k + 1)
    out[small] = acc
    zl = z[~small]
    with np.errstate(over="ignore", invalid="ignore"):
        ez = np.exp(zl)
        if k == 0:
            v = (ez - 1) / zl
        elif k == 1:
            v = (ez * (zl - 1) + 1) / zl ** 2
        elif k == 2:
            v = (ez * (zl * zl - 2 * zl + 2) - 2) / zl ** 3
        else:
            raise ValueError("k must be 0, 1 or 2")
    out[~small] = v
    return out


class DuhamelWeights:
    """Exponentially weighted Simpson/trapezoid rules on a uniform y-grid.

    The source is interpolated by a quadratic on each double panel (linear on a
    trailing single panel) and integrated exactly against ``exp(P (y - eta))``.
    For ``P = 0`` the rules are Simpson's and the trapezoid rule.
    """

    def __init__(self, rate, h):
        self.h = h
        H = 2 * h
        z2 = rate * H
        p0, p1, p2 = psi(z2, 0), psi(z2, 1), psi(z2, 2)
        # weights for s at eta = y-2h, y-h, y (t = (y-eta)/H = 1, 1/2, 0)
        self.simpson = (H * (2 * p2 - p1), H * (4 * p1 - 4 * p2), H * (2 * p2 - 3 * p1 + p0))
        z1 = rate * h
        q0, q1 = psi(z1, 0), psi(z1, 1)
        self.trapezoid = (h * q1, h * (q0 - q1))
        self.e1 = np.exp(rate * h)
        self.e2 = np.exp(rate * H)


def duhamel(shat, rate, h):
    """Cumulative ``I_m = int_0^{y_m} exp(P (y_m - eta)) s(eta) deta`` for all levels.

    ``shat`` has shape ``(M, N)``.  Even levels use composite exponential
    Simpson; odd levels add one exponential trapezoid panel to the previous
    even level.
    """
    M = shat.shape[0]
    w = DuhamelWeights(rate, h)
    out = np.zeros_like(shat, dtype=complex)
    for m in range(1, M):
        if m % 2 == 0:
            a, b, c = w.simpson
            out[m] = w.e2 * out[m - 2] + a * shat[m - 2] + b * shat[m - 1] + c * shat[m]
        else:
            a, b = w.trapezoid
            out[m] = w.e1 * out[m - 1] + a * shat[m - 1] + b * shat[m]
    return out


# ---------------------------------------------------------------- linear solve

def _row_phase(grid):
    j = np.fft.fftfreq(grid.N, d=1.0 / grid.N).astype(int)
    return np.where(j % 2, -1.0, 1.0)


def rows_to_spectral(values, grid):
    return np.fft.fft(np.asarray(values, dtype=float), axis=-1) * _row_phase(grid) / grid.N


def rows_from_spectral(coeffs, grid):
    return np.fft.ifft(coeffs * _row_phase(grid) * grid.N, axis=-1).real


def solve_linear(u0, f, spec, grid, acknowledge_growth=None, sym=None):
    """Exact-in-y propagation of ``u0`` plus the Duhamel integral of the source.

    ``f`` is the physical right-hand side of the equation (a Trajectory on the
    grid's y-levels, or None).  Specs failing the well-posedness condition need
    ``acknowledge_growth=True``.
    """
    u0 = check_field(np.asarray(u0, dtype=float), grid)
    if not spec.wellposed_condition and not acknowledge_growth:
        raise GrowthError("spec violates the well-posedness condition; pass acknowledge_growth=True")
    sym = build_symbol(spec, grid) if sym is None else sym
    ygrid = grid.ygrid(spec.y0)
    rate = sym.multiplier
    uhat0 = to_spectral(u0, grid)
    coeffs = np.empty((grid.M, grid.N), dtype=complex)
    for m, y in enumerate(ygrid):
        coeffs[m] = uhat0 * growth_factor(sym, y)
    if f is not None:
        fv = f.values if isinstance(f, Trajectory) else np.asarray(f, dtype=float)
        if fv.shape != (grid.M, grid.N):
            raise StructuralError(f"source shape {fv.shape} does not match grid {(grid.M, grid.N)}")
        if grid.M < 3:
            raise StructuralError("source quadrature needs at least 3 y-levels")
        shat = spec.sign * rows_to_spectral(fv, grid)
        growth_factor(sym, 2 * grid.dy(spec.y0))
        coeffs += duhamel(shat, rate, grid.dy(spec.y0))
    return Trajectory(rows_from_spectral(coeffs, grid), ygrid)


def apply_operator(values, spec, grid, include_y=False):
    """``d^(2n+1) u + sum b_k d^k u`` applied spectrally to each row."""
    lam = grid.wavenumbers
    vh = np.fft.fft(np.atleast_2d(values), axis=-1)
    mult = horner(list(spec.b) + [0.0, 1.0], 1j * lam)
    mult[grid.N // 2] = mult[grid.N // 2].real
    out = np.fft.ifft(vh * mult, axis=-1).real
    return out if np.ndim(values) == 2 else out[0]


def y_derivative(traj, spec, grid, source=None):
    """``d/dy u`` computed from the equation: ``(-1)^n [rhs - D u]``.

    ``rhs`` is ``gamma d/dx (u^2) + source``.
    """
    u = traj.values
    rhs = spec.gamma * spectral_derivative(u * u, grid, 1) if spec.gamma else np.zeros_like(u)
    if source is not None:
        rhs = rhs + (source.values if isinstance(source, Trajectory) else source)
    return Trajectory(spec.sign * (rhs - apply_operator(u, spec, grid)), traj.ygrid)


def energy_rate(s, sym):
    """``d/dy sum |s_j|^2 = 2 sum Re P |s_j|^2`` for the homogeneous flow."""
    return float(2.0 * np.sum(sym.real_part * np.abs(s) ** 2))


__all__ = ["SymbolTable", "WellPosednessVerdict", "build_symbol", "classify_wellposedness",
           "propagate", "solve_linear", "duhamel", "psi", "y_derivative", "apply_operator",
           "rows_to_spectral", "rows_from_spectral", "even_part", "horner", "energy_rate"]
