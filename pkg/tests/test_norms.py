import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from gkdv import GridSpec, ProblemSpec, Trajectory, norms, spectral
from gkdv import manufactured as mf
from gkdv.errors import ConfigurationError, DomainError, TestFunctionError

SQRT_HALF_PI = math.sqrt(math.pi / 2)
alphas = st.floats(0.0, 5.0)


@given(alphas)
def test_psi_values(alpha):
    assert norms.weight_eval(("psi", alpha), np.array([2.0]))[0] == pytest.approx(2.0 ** alpha)
    assert norms.weight_eval(("psi", alpha), np.array([0.25]))[0] == 0.0


@given(alphas)
def test_psi_monotone_with_nonnegative_derivative(alpha):
    x = np.linspace(-1, 3, 4001)
    w = norms.weight_eval(norms.WeightSpec("psi", alpha), x)
    assert np.all(np.diff(w) >= -1e-15)
    assert np.all(norms.psi_derivative(alpha, x) >= 0)


def test_psi_derivative_matches_finite_difference():
    x = np.linspace(0.55, 2.0, 50)
    h = 1e-6
    fd = (norms.weight_eval(("psi", 1.5), x + h) - norms.weight_eval(("psi", 1.5), x - h)) / (2 * h)
    assert np.allclose(norms.psi_derivative(1.5, x), fd, atol=1e-6)


def test_smoothstep_ends():
    assert np.all(norms.smoothstep(np.array([-3.0, 0.5])) == 0.0)
    assert np.all(norms.smoothstep(np.array([1.0, 7.0])) == 1.0)
    assert norms.smoothstep(np.array([0.75]))[0] == pytest.approx(0.5)


@given(alphas, st.floats(0.1, 5.0))
def test_rho_r(alpha, r):
    assert norms.weight_eval(("rho_r", alpha, r), np.array([-2 * r]))[0] == pytest.approx((1 + r) ** alpha)
    x = np.linspace(-r, 5, 200)
    assert np.allclose(norms.weight_eval(("rho_r", alpha, r), x), norms.weight_eval(("rho", alpha), x))


def test_rho_branches():
    assert norms.weight_eval(("rho", 2.0), np.array([1.0]))[0] == pytest.approx(math.exp(-1))
    assert norms.weight_eval(("rho", 2.0), np.array([-1.0]))[0] == pytest.approx(4.0)


@pytest.mark.parametrize("bad", [("phi", 1.0), ("psi", -1.0), ("rho_r", 1.0, 0.0)])
def test_weight_spec_validation(bad):
    with pytest.raises(DomainError):
        norms.WeightSpec(*bad)


def test_N_alpha_gaussian_moment(grid, gaussian):
    assert norms.N_alpha(gaussian, 2.0, grid) == pytest.approx(0.25 * SQRT_HALF_PI, rel=1e-12)
    assert norms.N_alpha(gaussian, 0.0, grid) == pytest.approx(SQRT_HALF_PI, rel=1e-12)
    assert norms.N_alpha(np.zeros(grid.N), 3.0, grid) == 0.0


@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_N_alpha_comparison(a, b):
    g = GridSpec(10.0, 128, 2)
    v = np.exp(-(g.x - 1) ** 2) * (1 + g.x)
    lo, hi = min(a, b), max(a, b)
    assert norms.N_alpha(v, lo, g) <= norms.N_alpha(v, hi, g) + norms.sq_norm(v, g) + 1e-12


def test_seminorm_examples(grid, gaussian):
    t = Trajectory.constant(gaussian, grid.ygrid(1.0))
    n2 = norms.sq_norm(gaussian, grid)
    assert norms.seminorm(t, 0, 0, 0, grid) == pytest.approx(2 * n2, rel=1e-12)
    assert norms.seminorm(t, 0, 1, 0, grid) == pytest.approx(2 * n2 + 0.25 * SQRT_HALF_PI, rel=1e-12)
    assert norms.seminorm(Trajectory.zeros(grid, 1.0), 3, 2, 0, grid) == 0.0


def test_seminorm_j1_needs_derivative(grid, gaussian):
    t = Trajectory.constant(gaussian, grid.ygrid(1.0))
    with pytest.raises(ConfigurationError):
        norms.seminorm(t, 1, 0, 1, grid)
    uy = spectral.y_derivative(t, ProblemSpec(1), grid)
    assert norms.seminorm(t, 1, 0, 1, grid, uy=uy) > 0


def test_M_functional_gaussian(grid, gaussian):
    # int e^{-2x^2} = sqrt(pi/2), int x^4 e^{-2x^2} = (3/16) sqrt(pi/2)
    t = Trajectory.constant(gaussian, grid.ygrid(1.0))
    assert norms.M_functional(t, 1, grid) == pytest.approx(SQRT_HALF_PI * (1 + 3 / 16), rel=1e-12)
    assert norms.M_functional(Trajectory.constant(3 * gaussian, grid.ygrid(1.0)), 1, grid) == \
        pytest.approx(9 * SQRT_HALF_PI * (1 + 3 / 16), rel=1e-12)
    assert norms.M_functional(Trajectory.zeros(grid, 1.0), 2, grid) == 0.0


def test_mollifier_kernel_unit_mass():
    mass = integrate.quad(lambda t: norms.mollifier_kernel(np.array(t)), -1, 1, epsabs=1e-14)[0]
    assert abs(mass - 1) < 1e-10
    assert np.all(norms.mollifier_kernel(np.array([-1.0, 1.0, 1.5])) == 0)


MGRID = GridSpec(32.0, 4096, 2)


@given(st.floats(0.05, 0.9), st.integers(0, 2 ** 32 - 1))
def test_mollify_contraction_and_linearity(h, seed):
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=(2, MGRID.N))
    mu, mv = norms.mollify(u, h, MGRID), norms.mollify(v, h, MGRID)
    assert np.linalg.norm(mu) <= np.linalg.norm(u) * (1 + 1e-12)
    assert np.allclose(norms.mollify(2 * u - v, h, MGRID), 2 * mu - mv, atol=1e-12)


def test_mollify_converges_as_h_shrinks():
    rough = np.where(np.abs(MGRID.x) < 2, 1.0, 0.0)
    gaps = [np.linalg.norm(norms.mollify(rough, h, MGRID) - rough) for h in (0.2, 0.1, 0.05)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert not np.any(norms.mollify(np.zeros(MGRID.N), 0.1, MGRID))


def test_mollify_second_order_on_smooth_data():
    u0 = np.exp(-MGRID.x ** 2)
    errs = [np.sqrt(MGRID.dx) * np.linalg.norm(norms.mollify(u0, h, MGRID) - u0) for h in (0.4, 0.2, 0.1)]
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(orders > 1.8)


def test_mollify_domain_check():
    with pytest.raises(DomainError):
        norms.mollify(np.zeros(MGRID.N), 0.02, MGRID)
    with pytest.raises(DomainError):
        norms.MollifierSpec(1.0)


def test_bump_derivatives_match_finite_differences():
    b = norms.Bump(0.2, 1.5)
    z = np.linspace(-1.0, 1.4, 41)
    h = 1e-5
    for k in range(3):
        fd = (b(z + h, k) - b(z - h, k)) / (2 * h)
        assert np.allclose(b(z, k + 1), fd, atol=1e-5)


def test_weak_residual_zero_and_linear(grid):
    spec = ProblemSpec(1, (-0.3, 0.2), 0.8)
    phi1 = norms.TestFunction(norms.Bump(0.5, 0.3), norms.Bump(0.0, 3.0))
    phi2 = norms.TestFunction(norms.Bump(0.5, 0.3), norms.Bump(1.0, 2.0))
    assert norms.weak_residual(Trajectory.zeros(grid, 1.0), phi1, spec, grid) == 0.0
    u = spectral.solve_linear(np.exp(-grid.x ** 2), None, ProblemSpec(1, (-0.3, 0.2)), grid)
    lin = norms.weak_residual(u, phi1, spec, grid) + 2 * norms.weak_residual(u, phi2, spec, grid)
    # phi1 + 2 phi2 as one integrand, assembled from the adjoint pieces directly
    y, x = grid.ygrid(1.0), grid.x
    comb = norms.adjoint_applied(phi1, spec, y, x) + 2 * norms.adjoint_applied(phi2, spec, y, x)
    dx = phi1.fields(y, x, kx=1) + 2 * phi2.fields(y, x, kx=1)
    direct = np.trapezoid(np.sum(u.values * comb + spec.gamma * u.values ** 2 * dx, axis=1) * grid.dx, y)
    assert lin == pytest.approx(direct, rel=1e-12)


def test_weak_residual_support_check(grid):
    spec = ProblemSpec(1)
    bad = norms.TestFunction(norms.Bump(0.1, 0.2), norms.Bump(0.0, 1.0))
    with pytest.raises(TestFunctionError):
        norms.weak_residual(Trajectory.zeros(grid, 1.0), bad, spec, grid)


def test_weak_residual_converges_for_solver_output():
    spec = ProblemSpec(1, (-0.3, 0.2))
    phi = norms.TestFunction(norms.Bump(0.5, 0.45), norms.Bump(0.0, 5.0))
    res = []
    for M in (41, 81, 161):
        g = GridSpec(12.0, 128, M)
        u0, F, _ = mf.manufactured_problem(mf.gaussian_decay(), spec, g)
        res.append(abs(norms.weak_residual(spectral.solve_linear(u0, F, spec, g), phi, spec, g, F)))
    assert np.all(np.log2(np.array(res[:-1]) / res[1:]) > 2)


def test_initial_attainment(grid, gaussian):
    const = Trajectory.constant(gaussian, grid.ygrid(1.0))
    weak, strong = norms.initial_attainment(const, gaussian, norms.Bump(0.0, 3.0), grid)
    assert not np.any(weak) and not np.any(strong)
    spec = ProblemSpec(1, (-0.3, 0.2), 0.0, 1e-3)
    firsts = []
    for M in (11, 21):
        g = GridSpec(20.0, 256, M)
        u = spectral.solve_linear(np.exp(-g.x ** 2), None, spec, g)
        weak, strong = norms.initial_attainment(u, np.exp(-g.x ** 2), norms.Bump(0.0, 3.0), g)
        assert np.all(np.diff(weak) > 0) and np.all(np.diff(strong) > 0)
        firsts.append(strong[0])
    # first gap is O(dy)
    assert firsts[0] / firsts[1] == pytest.approx(2.0, rel=0.05)
