"""Problem definition, grids, fields and the discrete Fourier convention.

Fields are plain 1-D float arrays sampled at ``x_j = -L + j dx``.  Spectral
fields are complex arrays in numpy FFT order; coefficient ``j`` approximates
``(1/2L) * int f(x) exp(-i lam_j x) dx`` with ``lam_j = pi * j / L``.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .errors import StructuralError, SymmetryError

DECAY_THRESHOLD = 1e-14
IMAG_RESIDUE_TOL = 1e-12


@dataclass(frozen=True)
class ProblemSpec:
    """Order ``2n+1`` equation with lower-order coefficients ``b[0..2n-1]``."""

    n: int
    b: tuple = ()
    gamma: float = 0.0
    y0: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise StructuralError(f"n must be a positive integer, got {self.n!r}")
        b = tuple(float(v) for v in self.b) if len(self.b) else (0.0,) * (2 * self.n)
        if len(b) != 2 * self.n:
            raise StructuralError(f"b must have exactly 2n={2 * self.n} entries, got {len(b)}")
        if not all(np.isfinite(b)):
            raise StructuralError("b entries must be finite")
        if not (np.isfinite(self.y0) and self.y0 > 0):
            raise StructuralError(f"y0 must be positive, got {self.y0!r}")
        if not np.isfinite(self.gamma):
            raise StructuralError("gamma must be finite")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "y0", float(self.y0))

    @property
    def order(self):
        return 2 * self.n + 1

    @property
    def sign(self):
        """The factor (-1)^n multiplying the y-derivative."""
        return -1 if self.n % 2 else 1

    def even_coefficients(self):
        """Return ``[(-1)^(n+k) b_{2k} for k = 0..n-1]``."""
        return [(-1) ** (self.n + k) * self.b[2 * k] for k in range(self.n)]

    @property
    def wellposed_condition(self):
        # leading nonzero (-1)^(n+k) b_2k, scanned from the highest k, decides
        for c in reversed(self.even_coefficients()):
            if c != 0.0:
                return c > 0
        return True

    @property
    def strictly_dissipative(self):
        """All ``(-1)^(n+k) b_2k > 0``; the hypothesis of the nonlinear theory."""
        return all(c > 0 for c in self.even_coefficients())

    def with_b(self, b):
        return ProblemSpec(self.n, tuple(b), self.gamma, self.y0)


@dataclass(frozen=True)
class GridSpec:
    L: float
    N: int
    M: int

    def __post_init__(self):
        if not (self.L > 0 and np.isfinite(self.L)):
            raise StructuralError(f"L must be positive, got {self.L!r}")
        N = int(self.N)
        if N != self.N or N < 16 or N & (N - 1):
            raise StructuralError(f"N must be a power of two >= 16, got {self.N!r}")
        if int(self.M) != self.M or self.M < 2:
            raise StructuralError(f"M must be an integer >= 2, got {self.M!r}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "M", int(self.M))

    @property
    def dx(self):
        return 2.0 * self.L / self.N

    @property
    def x(self):
        return -self.L + self.dx * np.arange(self.N)

    @property
    def wavenumbers(self):
        """Wavenumbers ``pi j / L`` in numpy FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.dx)

    def dy(self, y0):
        return y0 / (self.M - 1)

    def ygrid(self, y0):
        return np.linspace(0.0, y0, self.M)

    def refined(self, factor_x=1, factor_y=1):
        return GridSpec(self.L, self.N * factor_x, (self.M - 1) * factor_y + 1)


@dataclass(frozen=True)
class Trajectory:
    """A y-indexed sequence of fields; ``values[m]`` is the field at ``ygrid[m]``."""

    values: np.ndarray
    ygrid: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        ygrid = np.asarray(self.ygrid, dtype=float)
        if values.ndim != 2 or values.shape[0] != ygrid.size:
            raise StructuralError(
                f"trajectory shape {values.shape} does not match {ygrid.size} y-levels")
        if ygrid.size > 1 and not np.all(np.diff(ygrid) > 0):
            raise StructuralError("ygrid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise StructuralError("trajectory contains non-finite values")
        values.setflags(write=False)
        ygrid.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ygrid", ygrid)

    def __len__(self):
        return self.ygrid.size

    def __getitem__(self, m):
        return self.values[m]

    @classmethod
    def constant(cls, f, ygrid):
        f = np.asarray(f, dtype=float)
        return cls(np.tile(f, (len(ygrid), 1)), ygrid)

    @classmethod
    def zeros(cls, grid, y0):
        return cls(np.zeros((grid.M, grid.N)), grid.ygrid(y0))


def check_field(f, grid):
    f = np.asarray(f)
    if f.ndim != 1 or f.size != grid.N:
        raise StructuralError(f"field of shape {f.shape} does not match grid N={grid.N}")
    if not np.all(np.isfinite(f)):
        raise StructuralError("field contains non-finite values")
    return f


def check_decay(f, grid, name="field", threshold=DECAY_THRESHOLD):
    """Warn when a field is not negligible at the domain boundary."""
    f = np.asarray(f)
    edge = max(abs(f[0]), abs(f[-1]))
    if edge >= threshold:
        warnings.warn(f"{name} is {edge:.2e} at |x|=L; periodic truncation may pollute the solution",
                      RuntimeWarning, stacklevel=2)
    return edge


def _phase(grid):
    # exp(i lam_j L) = (-1)^j for lam_j = pi j / L
    j = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
    return np.where(j.astype(int) % 2, -1.0, 1.0)


def to_spectral(f, grid):
    f = check_field(np.asarray(f, dtype=float), grid)
    return np.fft.fft(f) * _phase(grid) / grid.N


def hermitian_defect(s):
    s = np.asarray(s)
    mirrored = np.conj(np.roll(s[::-1], 1))
    return np.max(np.abs(s - mirrored)) if s.size else 0.0


def from_spectral(s, grid, tol=IMAG_RESIDUE_TOL):
    s = np.asarray(s, dtype=complex)
    if s.ndim != 1 or s.size != grid.N:
        raise StructuralError(f"spectral field of shape {s.shape} does not match grid N={grid.N}")
    scale = max(np.max(np.abs(s)), np.finfo(float).tiny)
    if hermitian_defect(s) > tol * scale:
        raise SymmetryError("coefficients are not Hermitian-symmetric")
    f = np.fft.ifft(s * _phase(grid) * grid.N)
    return f.real.copy()


def spectral_derivative(f, grid, order=1):
    """Exact derivative of the trigonometric interpolant; Nyquist mode dropped for odd orders."""
    if order == 0:
        return np.asarray(f, dtype=float).copy()
    lam = grid.wavenumbers
    fh = np.fft.fft(np.asarray(f, dtype=float), axis=-1)
    mult = (1j * lam) ** order
    if order % 2:
        mult[grid.N // 2] = 0.0
    return np.fft.ifft(fh * mult, axis=-1).real


def l2_norm(f, grid):
    return float(np.sqrt(np.sum(np.abs(f) ** 2) * grid.dx))


# ---------------------------------------------------------------- persistence

def problem_to_dict(spec, grid):
    return {"n": spec.n, "b": list(spec.b), "gamma": spec.gamma, "y0": spec.y0,
            "L": grid.L, "N": grid.N, "M": grid.M}


def problem_from_dict(d):
    try:
        spec = ProblemSpec(int(d["n"]), tuple(d.get("b", ())), float(d.get("gamma", 0.0)),
                           float(d["y0"]))
        grid = GridSpec(float(d["L"]), int(d["N"]), int(d["M"]))
    except KeyError as exc:
        raise StructuralError(f"problem description lacks key {exc}") from None
    return spec, grid


def save_problem(path, spec, grid):
    Path(path).write_text(json.dumps(problem_to_dict(spec, grid), indent=2))


def load_problem(path):
    return problem_from_dict(json.loads(Path(path).read_text()))


def save_field(path, f, grid):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "value"])
        for xi, vi in zip(grid.x, f):
            w.writerow([repr(float(xi)), repr(float(vi))])


def load_field(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def save_trajectory(path, traj, x):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"] + [repr(float(y)) for y in traj.ygrid])
        for j, xj in enumerate(x):
            w.writerow([repr(float(xj))] + [repr(float(v)) for v in traj.values[:, j]])


def load_trajectory(path):
    """Return ``(x, Trajectory)`` from the CSV layout written by :func:`save_trajectory`."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    ygrid = np.array([float(v) for v in header[1:]])
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], Trajectory(data[:, 1:].T, ygrid)


def grid_from_x(x, M):
    """Recover the GridSpec matching an x column written by :func:`save_trajectory`."""
    N = x.size
    dx = x[1] - x[0]
    L = N * dx / 2.0
    if not np.isclose(x[0], -L, rtol=0, atol=1e-9 * max(1.0, L)):
        raise StructuralError("x column does not start at -L")
    return GridSpec(L, N, M)


__all__ = [
    "ProblemSpec", "GridSpec", "Trajectory", "to_spectral", "from_spectral",
    "spectral_derivative", "check_field", "check_decay", "hermitian_defect", "l2_norm",
    "save_problem", "load_problem", "problem_to_dict", "problem_from_dict",
    "save_field", "load_field", "save_trajectory", "load_trajectory", "grid_from_x", "asdict",
]
