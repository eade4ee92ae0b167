"""Generalized Airy function ``Ain(x) = int_0^inf cos(lam^p - lam x) dlam`` with ``p = 2n+1``.

The integral is not absolutely convergent on the real axis.  Because ``p`` is odd
the integrand is the real part of an entire function that decays in the sector
``0 < arg(lam) < pi/p``, so the ray ``[0, inf)`` can be deformed:

* ``x <= split_point``: onto the ray ``arg(lam) = pi/(2p)`` where
  ``exp(i lam^p) = exp(-t^p)``;
* ``x > split_point``: onto a path through the real saddle
  ``lam_s = (x/p)^(1/(p-1))`` that leaves it at 45 degrees (steepest descent
  direction) and ends on the ``pi/(2p)`` valley.  Written in the scaled variable
  ``lam = lam_s mu`` the path is independent of ``x``, so many arguments are
  integrated with one adaptive vector quadrature.

Derivatives insert the factor ``(-i lam)^j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import optimize, signal
from scipy.integrate import quad_vec

from .errors import DomainError, InsufficientDataError, QuadratureError, StructuralError

NOISE_FLOOR = 1e-14

# scaled saddle contour: 0 -> (1-i)/2 -> 1 (saddle) -> 1 + e^{i pi/4}/2 -> valley ray
_SADDLE_VERTICES = np.array([0.0, 0.5 - 0.5j, 1.0, 1.0 + 0.5 * np.exp(0.25j * np.pi)])


@dataclass(frozen=True)
class AinEvaluator:
    n: int
    quad_tol: float = 1e-12
    split_point: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if self.quad_tol < 1e-12:
            raise DomainError("quad_tol below 1e-12 is not supported")

    @property
    def p(self):
        return 2 * self.n + 1

    def __call__(self, x, orders=(0,)):
        """Return an array ``(len(orders),) + shape(x)`` of ``Ain^(j)(x)``."""
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        orders = tuple(int(j) for j in orders)
        if any(j < 0 for j in orders):
            raise DomainError("derivative order must be nonnegative")
        out = np.empty((len(orders), flat.size))
        # unique arguments only; tables contain many repeats
        uniq, inverse = np.unique(flat, return_inverse=True)
        vals = np.empty((len(orders), uniq.size))
        ray = uniq <= self.split_point
        if ray.any():
            vals[:, ray] = self._ray(uniq[ray], orders)
        if (~ray).any():
            vals[:, ~ray] = self._saddle(uniq[~ray], orders)
        out[:] = vals[:, inverse]
        return out.reshape((len(orders),) + x.shape)

    def _ray(self, X, orders):
        p = self.p
        theta = np.pi / (2 * p)
        e = np.exp(1j * theta)
        xmax = max(float(X.max()), 0.0)
        T = 60.0 ** (1.0 / p)
        while T ** p - T * xmax * np.sin(theta) < 60.0 + max(orders) * np.log(T + 1):
            T *= 1.2
        js = np.asarray(orders)[:, None]

        def integrand(t):
            lam = t * e
            return ((-1j * lam) ** js * np.exp(-t ** p - 1j * lam * X[None, :]) * e).real

        return self._integrate(integrand, 0.0, T, None)

    def _saddle(self, X, orders):
        p = self.p
        s0 = (X / p) ** (1.0 / (p - 1))
        omega = s0 ** p
        d = np.exp(1j * np.pi / (2 * p))
        B = _SADDLE_VERTICES[-1]
        R = 1.0
        om_min = float(omega.min())
        while om_min * np.imag((B + R * d) ** p - p * (B + R * d)) < 60.0 + max(orders) * np.log(R + 2):
            R *= 1.3
        seg = np.abs(np.diff(_SADDLE_VERTICES))
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        units = np.diff(_SADDLE_VERTICES) / seg
        js = np.asarray(orders)[:, None]

        def integrand(s):
            if s >= cum[-1]:
                mu, dmu = B + (s - cum[-1]) * d, d
            else:
                k = min(int(np.searchsorted(cum, s, side="right")) - 1, seg.size - 1)
                mu, dmu = _SADDLE_VERTICES[k] + (s - cum[k]) * units[k], units[k]
            phase = np.exp(1j * omega[None, :] * (mu ** p - p * mu))
            return ((-1j * mu) ** js * phase * s0[None, :] * dmu).real

        # integrate with the natural scale s0^j divided out; the tolerance is relative to it
        return self._integrate(integrand, 0.0, cum[-1] + R, list(cum[1:])) * s0[None, :] ** js

    def _integrate(self, f, a, b, points):
        val, err = quad_vec(f, a, b, epsabs=0.1 * self.quad_tol, epsrel=0.0, norm="max",
                            limit=20000, points=points)
        if not err <= self.quad_tol:
            raise QuadratureError(f"Ain quadrature error estimate {err:.2e} exceeds {self.quad_tol:.1e}",
                                  partial=val, error_estimate=err)
        return val


@lru_cache(maxsize=16)
def evaluator(n, quad_tol=1e-12):
    return AinEvaluator(n, quad_tol)


def ain(n, x, quad_tol=1e-12):
    """Generalized Airy function; scalar in, scalar out (arrays accepted)."""
    v = evaluator(n, quad_tol)(x)[0]
    return float(v) if np.ndim(v) == 0 else v


def ain_deriv(n, j, x, quad_tol=1e-12):
    if not 0 <= j <= 2 * n:
        raise DomainError(f"derivative order must be in 0..{2 * n}, got {j}")
    v = evaluator(n, quad_tol)(x, (j,))[0]
    return float(v) if np.ndim(v) == 0 else v


def ode_residual(n, x, quad_tol=1e-12):
    """``z^(2n) - (-1)^n x z / (2n+1)`` for ``z = Ain``; zero up to quadrature error."""
    x = np.asarray(x, dtype=float)
    z = evaluator(n, quad_tol)(x, (0, 2 * n))
    r = z[1] - (-1) ** n * x * z[0] / (2 * n + 1)
    return float(r) if r.ndim == 0 else r


def fundamental_solution(n, j, y, x, quad_tol=1e-12, max_order=None):
    """``d^j/dx^j U(y, x)`` with ``U = y^(-1/p) Ain(x y^(-1/p)) / pi``.

    ``j`` is limited to ``0..2n-1`` unless ``max_order`` widens it (the Green
    series needs higher orders).
    """
    limit = 2 * n - 1 if max_order is None else max_order
    if not 0 <= j <= limit:
        raise DomainError(f"derivative order must be in 0..{limit}, got {j}")
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("fundamental solution needs y > 0")
    p = 2 * n + 1
    scale = y ** (-1.0 / p)
    x = np.asarray(x, dtype=float)
    v = evaluator(n, quad_tol)(x * scale, (j,))[0] * scale ** (j + 1) / np.pi
    return float(v) if np.ndim(v) == 0 else v


def fundamental_derivatives(n, orders, y, x, quad_tol=1e-12):
    """All requested x-derivatives of U at once; shape ``(len(orders),) + broadcast(y, x)``."""
    y, x = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(x, dtype=float))
    if np.any(y <= 0):
        raise DomainError("fundamental solution needs y > 0")
    p = 2 * n + 1
    scale = y ** (-1.0 / p)
    vals = evaluator(n, quad_tol)(x * scale, tuple(orders))
    powers = np.array([j + 1 for j in orders]).reshape((-1,) + (1,) * y.ndim)
    return vals * scale[None] ** powers / np.pi


# ---------------------------------------------------------------- kernel tables

@dataclass
class KernelTable:
    """Sampled kernel over (y-level, x-offset).

    Row ``m`` holds ``K(ygrid[m], xgrid)``.  Kernels that reduce to a delta at
    ``y = 0`` carry ``delta_at_zero=True`` and a zero first row; consumers treat
    that row as the identity (or the ``order``-th derivative).
    """

    values: np.ndarray
    ygrid: np.ndarray
    xgrid: np.ndarray
    kernel: str = "U"
    order: int = 0
    n: int = 1
    delta_at_zero: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (np.size(self.ygrid), np.size(self.xgrid)):
            raise StructuralError(f"kernel table shape {self.values.shape} does not match grids")
        if not np.all(np.isfinite(self.values)):
            raise StructuralError("kernel table has non-finite entries")

    def header(self):
        return {"kernel": self.kernel, "order": self.order, "n": self.n,
                "dims": list(self.values.shape), "dtype": "float64", "byteorder": "little",
                "delta_at_zero": self.delta_at_zero,
                "ygrid": self.ygrid.tolist(), "x_start": float(self.xgrid[0]),
                "x_step": float(self.xgrid[1] - self.xgrid[0]) if self.xgrid.size > 1 else 0.0,
                "meta": self.meta}

    def save_binary(self, path):
        """Raw little-endian float64 block plus ``<path>.json`` sidecar."""
        path = Path(path)
        self.values.astype("<f8").tofile(path)
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(self.header(), indent=2))

    @classmethod
    def load_binary(cls, path):
        path = Path(path)
        hdr = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        rows, cols = hdr["dims"]
        values = np.fromfile(path, dtype="<f8").reshape(rows, cols)
        xgrid = hdr["x_start"] + hdr["x_step"] * np.arange(cols)
        return cls(values, np.array(hdr["ygrid"]), xgrid, hdr["kernel"], hdr["order"], hdr["n"],
                   hdr["delta_at_zero"], hdr.get("meta", {}))

    def save_csv(self, path):
        Y, X = np.meshgrid(self.ygrid, self.xgrid, indexing="ij")
        np.savetxt(path, np.column_stack([Y.ravel(), X.ravel(), self.values.ravel()]),
                   delimiter=",", header="y,x,value", comments="", fmt="%.17g")


def offsets(grid):
    """Grid differences ``x_i - x_j`` as a sorted array of ``2N-1`` values."""
    return grid.dx * np.arange(-(grid.N - 1), grid.N)


def build_u_tables(spec, grid, orders=None, quad_tol=1e-12):
    """KernelTables of ``d^j U`` over the trajectory y-grid and all grid offsets."""
    n = spec.n
    orders = tuple(range(2 * n)) if orders is None else tuple(orders)
    ygrid = grid.ygrid(spec.y0)
    xg = offsets(grid)
    vals = np.zeros((len(orders), ygrid.size, xg.size))
    Y, X = np.meshgrid(ygrid[1:], xg, indexing="ij")
    vals[:, 1:, :] = fundamental_derivatives(n, orders, Y, X, quad_tol)
    return {j: KernelTable(vals[i], ygrid, xg, "U", j, n) for i, j in enumerate(orders)}


# ---------------------------------------------------------------- decay fits

@dataclass(frozen=True)
class DecayFit:
    side: str
    power: float
    stretch: float | None
    residual: float
    samples: int


def _usable(x, v, side, floor):
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    mask = (x > 0) if side == "right" else (x < 0)
    mask &= np.abs(v) > floor
    return np.abs(x[mask]), np.abs(v[mask]), v[mask]


def _envelope(ax, av, sv):
    """Local maxima of |v| when the samples oscillate, all samples otherwise."""
    order = np.argsort(ax)
    ax, av, sv = ax[order], av[order], sv[order]
    if np.any(np.diff(np.sign(sv)) != 0):
        peaks, _ = signal.find_peaks(av)
        return ax[peaks], av[peaks]
    return ax, av


def fit_decay_exponents(table, side, level=-1, floor=NOISE_FLOOR, x=None, values=None, n=None):
    """Fit the decay law of a kernel row.

    ``right``: ``log|K| ~ a + power * log x`` on the oscillation peaks.
    ``left``:  ``log|K| ~ a + power * log|x| - c |x|^stretch`` (on peaks if the
    samples change sign).
    ``table`` may be a KernelTable (row ``level``) or None with explicit
    ``x``/``values``.
    """
    if side not in ("left", "right"):
        raise DomainError("side must be 'left' or 'right'")
    if table is not None:
        x, values, n = table.xgrid, table.values[level], table.n
    ax, av, sv = _usable(x, values, side, floor)
    if ax.size < 8:
        raise InsufficientDataError(f"only {ax.size} samples above the noise floor on the {side} side")
    ex, ev = _envelope(ax, av, sv)
    if side == "right":
        if ex.size < 3:
            raise InsufficientDataError("too few oscillation peaks for an envelope fit")
        A = np.column_stack([np.ones_like(ex), np.log(ex)])
        coef, res, *_ = np.linalg.lstsq(A, np.log(ev), rcond=None)
        resid = float(np.sqrt(np.mean((A @ coef - np.log(ev)) ** 2)))
        return DecayFit(side, float(coef[1]), None, resid, int(ax.size))
    if ex.size < 5:
        raise InsufficientDataError("too few envelope samples for a stretched-exponential fit")
    guess_s = (2 * n + 1) / (2 * n) if n else 1.5

    def model(t, a, pw, c, s):
        return a + pw * np.log(t) - c * t ** s

    ly = np.log(ev)
    # initial c from the end points with the guessed stretch
    c0 = max((ly[0] - ly[-1]) / (ex[-1] ** guess_s - ex[0] ** guess_s), 1e-3)
    try:
        popt, _ = optimize.curve_fit(model, ex, ly, p0=(ly[0] + c0 * ex[0] ** guess_s, 0.0, c0, guess_s),
                                     maxfev=20000)
    except RuntimeError as exc:
        raise InsufficientDataError(f"stretched-exponential fit failed: {exc}") from None
    resid = float(np.sqrt(np.mean((model(ex, *popt) - ly) ** 2)))
    return DecayFit(side, float(popt[1]), float(popt[3]), resid, int(ax.size))
