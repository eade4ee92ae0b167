import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from gkdv import GridSpec, ProblemSpec, airy
from gkdv.errors import DomainError, InsufficientDataError

# mpmath (30 digits), integral rotated onto the ray arg(lam) = pi/(2p)
MPMATH_VALUES = [
    (2, -2.0, 0.26113852810818574391),
    (2, 0.7, 1.0004717775392858832),
    (2, 1.5, 0.95509403577281776765),
    (3, -1.0, 0.63238025440543498473),
    (3, 0.5, 0.97733473796346490253),
    (1, -3.0, 0.067287264777035522425),
]


@pytest.mark.parametrize("n,x,expected", MPMATH_VALUES)
def test_ain_against_mpmath(n, x, expected):
    assert abs(airy.ain(n, x) - expected) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_ain_derivative_at_zero(n):
    # int lam sin(lam^p) dlam = Gamma(2/p) sin(pi/p) / p
    p = 2 * n + 1
    assert abs(airy.ain_deriv(n, 1, 0.0) - special.gamma(2 / p) * math.sin(math.pi / p) / p) < 1e-11


def test_ain_classical_derivative():
    x = np.linspace(-8, 8, 81)
    c = 3 ** (-1 / 3)
    expected = -math.pi * c * c * special.airy(-c * x)[1]
    assert np.max(np.abs(airy.ain_deriv(1, 1, x) - expected)) < 1e-10


def test_ain_scalar_and_array_shapes():
    assert isinstance(airy.ain(1, 0.3), float)
    assert airy.ain(1, np.zeros((2, 3))).shape == (2, 3)


def test_ain_deriv_order_limit():
    with pytest.raises(DomainError):
        airy.ain_deriv(1, 3, 0.0)


def test_evaluator_rejects_tiny_tolerance():
    with pytest.raises(DomainError):
        airy.AinEvaluator(1, quad_tol=1e-14)


@given(st.floats(-6.0, 6.0))
def test_ode_residual_small(x):
    for n in (1, 2):
        assert abs(airy.ode_residual(n, x)) < 1e-9


def test_split_point_continuity():
    ev = airy.evaluator(2)
    lo, hi = ev(np.array([1.0, np.nextafter(1.0, 2.0)]), (0, 1, 4)).T
    assert np.allclose(lo, hi, atol=1e-11)


def test_fundamental_solution_scaling():
    # U(y, x) = y^(-1/3) U(1, x y^(-1/3))
    y = 0.3
    x = np.linspace(-4, 4, 9)
    s = y ** (-1 / 3)
    assert np.allclose(airy.fundamental_solution(1, 0, y, x), s * airy.fundamental_solution(1, 0, 1.0, s * x),
                       atol=1e-13)


def test_fundamental_solution_requires_positive_y():
    with pytest.raises(DomainError):
        airy.fundamental_solution(1, 0, 0.0, 1.0)
    with pytest.raises(DomainError):
        airy.fundamental_solution(1, 2, 1.0, 1.0)


def test_u_tables_and_binary_roundtrip(tmp_path):
    spec = ProblemSpec(1)
    grid = GridSpec(4.0, 16, 3)
    tables = airy.build_u_tables(spec, grid)
    assert set(tables) == {0, 1}
    t = tables[1]
    assert t.values.shape == (3, 31) and np.all(t.values[0] == 0.0)
    t.save_binary(tmp_path / "U1.bin")
    back = airy.KernelTable.load_binary(tmp_path / "U1.bin")
    assert np.array_equal(back.values, t.values) and back.order == 1
    assert np.allclose(back.xgrid, t.xgrid, rtol=0, atol=1e-12)
    t.save_csv(tmp_path / "U1.csv")
    assert np.loadtxt(tmp_path / "U1.csv", delimiter=",", skiprows=1).shape == (3 * 31, 3)


@pytest.mark.parametrize("n,target", [(1, 1.5), (2, 1.25)])
def test_left_stretch_fit(n, target):
    x = -np.linspace(0.3, 60.0, 4000)[::-1]
    fit = airy.fit_decay_exponents(None, "left", x=x, values=airy.fundamental_solution(n, 0, 1.0, x), n=n)
    assert abs(fit.stretch / target - 1) < 0.1


def test_right_envelope_power_n1():
    # Ai(-z) ~ z^(-1/4) envelope
    x = np.linspace(1.0, 200.0, 8000)
    fit = airy.fit_decay_exponents(None, "right", x=x, values=airy.fundamental_solution(1, 0, 1.0, x), n=1)
    assert abs(fit.power + 0.25) < 0.01


def test_fit_needs_samples():
    with pytest.raises(InsufficientDataError):
        airy.fit_decay_exponents(None, "left", x=np.array([-1.0, -2.0]), values=np.array([1.0, 0.5]), n=1)
