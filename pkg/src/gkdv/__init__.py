"""Solvers and diagnostics for generalized KdV-type equations of odd order 2n+1."""

from .airy import AinEvaluator, KernelTable, ain, ain_deriv, build_u_tables, fit_decay_exponents, \
    fundamental_solution, ode_residual
from .core import GridSpec, ProblemSpec, Trajectory, from_spectral, spectral_derivative, to_spectral
from .errors import *  # noqa: F401,F403
from .green import GreenTable, ResolventConfig, apply_J, build_green, solve_linear_green
from .norms import MollifierSpec, WeightSpec, M_functional, N_alpha, mollify, seminorm, weak_residual, \
    weight_eval
from .picard import IterationTrace, PicardConfig, compute_y1, energy_diagnostics, picard_step, \
    solve_nonlinear
from .spectral import build_symbol, classify_wellposedness, propagate, solve_linear

__version__ = "0.1.0"
