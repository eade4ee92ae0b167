"""Manufactured solutions: pick ``u*(y, x)`` and derive the source symbolically."""

from __future__ import annotations

import numpy as np
import sympy as sp

from .core import Trajectory

y_sym, x_sym = sp.symbols("y x", real=True)


def operator_expr(u, spec):
    """``(-1)^n u_y + d^(2n+1) u + sum b_k d^k u`` as a sympy expression."""
    expr = spec.sign * sp.diff(u, y_sym) + sp.diff(u, x_sym, spec.order)
    for k, b in enumerate(spec.b):
        if b != 0.0:
            expr += sp.Float(b) * (sp.diff(u, x_sym, k) if k else u)
    return expr


def source_expr(u, spec):
    """``F = L u - gamma d/dx (u^2)``."""
    return sp.simplify(operator_expr(u, spec) - sp.Float(spec.gamma) * sp.diff(u * u, x_sym))


def sample(expr, grid, ygrid):
    f = sp.lambdify((y_sym, x_sym), expr, "numpy")
    Y, X = np.meshgrid(ygrid, grid.x, indexing="ij")
    return np.broadcast_to(np.asarray(f(Y, X), dtype=float), Y.shape).copy()


def gaussian_decay(a=1.0, width=1.0, center=0.0):
    """``exp(-a y) exp(-(x - center)^2 / width^2)``."""
    return sp.exp(-a * y_sym) * sp.exp(-((x_sym - center) ** 2) / width ** 2)


def manufactured_problem(u, spec, grid):
    """Return ``(u0, F, exact)`` sampled on the grid for the solution expression ``u``."""
    ygrid = grid.ygrid(spec.y0)
    exact = Trajectory(sample(u, grid, ygrid), ygrid)
    F = Trajectory(sample(source_expr(u, spec), grid, ygrid), ygrid)
    return exact.values[0].copy(), F, exact
