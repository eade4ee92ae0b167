import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gkdv import GridSpec, ProblemSpec, Trajectory, picard, spectral
from gkdv import manufactured as mf
from gkdv.errors import BoundViolationError, ConfigurationError, ConvergenceError

GRID = GridSpec(20.0, 256, 51)
SPEC = ProblemSpec(1, (-0.1, 0.0), 1.0, 0.5)


def gauss(g=GRID):
    return np.exp(-g.x ** 2)


def test_y1_gaussian_oracle():
    # E0 = int e^{-2x^2} (1 + (4x^2 - 2)^2) = 4 sqrt(pi/2)
    cfg = picard.PicardConfig(C4=2.0)
    y1 = picard.compute_y1(gauss(), None, cfg, SPEC, GRID)
    assert y1 == pytest.approx(1 / (4 * 2.0 * 4 * math.sqrt(math.pi / 2)), rel=1e-12)


@given(st.floats(0.1, 10.0))
def test_y1_scales_inverse_square(eps):
    cfg = picard.PicardConfig()
    base = picard.compute_y1(gauss(), None, cfg, SPEC, GRID)
    assert picard.compute_y1(eps * gauss(), None, cfg, SPEC, GRID) == pytest.approx(base / eps ** 2, rel=1e-10)


def test_y1_zero_data():
    assert picard.compute_y1(np.zeros(GRID.N), None, picard.PicardConfig(), SPEC, GRID) == math.inf


def test_y1_with_source():
    cfg = picard.PicardConfig(epsilon=0.25)
    F = Trajectory.constant(gauss(), GRID.ygrid(0.5))
    E0 = picard.data_energy(gauss(), GRID)
    C5 = E0 / 0.25
    expected = (E0 + C5) / (4 * E0 ** 2 + 2 * C5 ** 2 + C5)
    assert picard.compute_y1(gauss(), F, cfg, SPEC, GRID) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("kwargs", [dict(tol=0.0), dict(max_iter=1), dict(C4=-1.0),
                                    dict(window_policy="adaptive")])
def test_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        picard.PicardConfig(**kwargs)


@given(st.integers(0, 2 ** 32 - 1))
def test_dealiased_square_is_exact_for_band_limited_input(seed):
    g = GridSpec(5.0, 64, 2)
    rng = np.random.default_rng(seed)
    j = np.fft.fftfreq(g.N, 1 / g.N)
    uh = (rng.normal(size=g.N) + 1j * rng.normal(size=g.N)) * (np.abs(j) <= g.N // 3)
    u = np.fft.ifft(uh).real
    # exact square via zero padding to 2N, then truncated to the kept band
    pad = np.zeros(2 * g.N, complex)
    uh_r = np.fft.fft(u)
    pad[: g.N // 2] = uh_r[: g.N // 2]
    pad[-g.N // 2:] = uh_r[-g.N // 2:]
    fine = np.fft.ifft(pad).real * 2
    sq = np.fft.fft(fine ** 2)[np.r_[0: g.N // 2, 2 * g.N - g.N // 2: 2 * g.N]] / 2
    exact = np.fft.ifft(sq * (np.abs(j) <= g.N // 3)).real
    assert np.allclose(picard.dealiased_square(u, g)[0], exact, atol=1e-12)


def test_step_without_nonlinearity_is_linear_solve():
    spec = ProblemSpec(1, (-0.1, 0.0), 0.0, 0.5)
    prev = Trajectory(np.random.default_rng(0).normal(size=(GRID.M, GRID.N)), GRID.ygrid(0.5))
    out = picard.picard_step(prev, gauss(), None, spec, GRID)
    assert np.array_equal(out.values, spectral.solve_linear(gauss(), None, spec, GRID).values)


def test_step_from_zero_is_homogeneous_evolution():
    out = picard.picard_step(Trajectory.zeros(GRID, 0.5), gauss(), None, SPEC, GRID)
    ref = spectral.solve_linear(gauss(), None, SPEC, GRID)
    assert np.allclose(out.values, ref.values, atol=1e-15)


def test_zero_data_converges_immediately():
    u, trace = picard.solve_nonlinear(np.zeros(GRID.N), None, SPEC, GRID)
    assert len(trace) == 1 and not np.any(u.values)


def test_linear_case_reproduces_solve_linear():
    spec = ProblemSpec(1, (-0.1, 0.0), 0.0, 0.5)
    u, trace = picard.solve_nonlinear(gauss(), None, spec, GRID)
    assert np.array_equal(u.values, spectral.solve_linear(gauss(), None, spec, GRID).values)
    assert len(trace) == 2


def test_requires_wellposed_spec():
    with pytest.raises(ConfigurationError):
        picard.solve_nonlinear(gauss(), None, ProblemSpec(1, (0.1, 0.0), 1.0), GRID)


def test_nonconvergence_raises_with_trace():
    with pytest.raises(ConvergenceError) as info:
        picard.solve_nonlinear(gauss(), None, SPEC, GRID, picard.PicardConfig(max_iter=2))
    assert len(info.value.trace) == 2


def test_guard(monkeypatch):
    monkeypatch.setattr(picard, "GUARD_FACTOR", 1e-3)
    with pytest.raises(BoundViolationError):
        picard.solve_nonlinear(gauss(), None, SPEC, GRID)


def test_manufactured_order():
    spec = ProblemSpec(1, (-0.5, 0.2), -1.0)
    errs = []
    for M in (11, 21, 41):
        g = GridSpec(12.0, 128, M)
        u0, F, exact = mf.manufactured_problem(mf.gaussian_decay(), spec, g)
        u, _ = picard.solve_nonlinear(u0, F, spec, g, picard.PicardConfig(tol=1e-12))
        errs.append(np.max(np.abs(u.values - exact.values)))
    assert np.all(np.log2(np.array(errs[:-1]) / errs[1:]) >= 2)


def test_fixed_point_and_ceiling():
    cfg = picard.PicardConfig(tol=1e-11)
    u, trace = picard.solve_nonlinear(gauss(), None, SPEC, GRID, cfg)
    again = picard.picard_step(u, gauss(), None, SPEC, GRID)
    assert picard._st_norm(again.values - u.values, GRID, GRID.dy(0.5)) < cfg.tol
    d = picard.energy_diagnostics(u, SPEC, GRID)
    assert np.max(d["norm2"] + d["d2_norm2"]) <= d["ceiling"]
    assert np.all(trace.ratios()[2:] < 1)


@given(st.sampled_from([-1.5, -0.5, 0.5, 1.5]))
def test_gamma_sign_symmetry(gamma):
    spec = ProblemSpec(1, (-0.1, 0.0), gamma, 0.5)
    u, _ = picard.solve_nonlinear(gauss(), None, spec, GRID)
    v, _ = picard.solve_nonlinear(-gauss(), None, ProblemSpec(1, (-0.1, 0.0), -gamma, 0.5), GRID)
    assert np.array_equal(u.values, -v.values)


def test_energy_conserved_without_dissipation():
    spec = ProblemSpec(1, (), 1.0)
    g = GridSpec(20.0, 256, 201)
    u, _ = picard.solve_nonlinear(gauss(g), None, spec, g, picard.PicardConfig(window_policy="auto"))
    d = picard.energy_diagnostics(u, spec, g)
    assert np.max(np.abs(d["norm2"] / d["norm2"][0] - 1)) < 1e-5


def test_mean_mode_decay():
    u, _ = picard.solve_nonlinear(gauss(), None, SPEC, GRID)
    d = picard.energy_diagnostics(u, SPEC, GRID)
    assert np.allclose(d["mean"], d["mean"][0] * np.exp(-0.1 * d["y"]), rtol=1e-12)


def test_diagnostics_of_zero():
    d = picard.energy_diagnostics(Trajectory.zeros(GRID, 0.5), SPEC, GRID)
    assert not np.any(d["norm2"]) and not np.any(d["mean"]) and d["ceiling"] == 0.0


def test_auto_windows_chain_and_agree_with_single():
    cfg_auto = picard.PicardConfig(tol=1e-12, window_policy="auto")
    gaps = []
    for M in (101, 201):
        g = GridSpec(20.0, 256, M)
        ua, trace = picard.solve_nonlinear(gauss(g), None, SPEC, g, cfg_auto)
        us, _ = picard.solve_nonlinear(gauss(g), None, SPEC, g, picard.PicardConfig(tol=1e-12))
        starts = [w["start"] for w in trace.windows]
        ends = [w["end"] for w in trace.windows]
        assert starts[0] == 0.0 and ends[-1] == pytest.approx(0.5) and starts[1:] == ends[:-1]
        gaps.append(np.max(np.abs(ua.values - us.values)))
    # both are consistent discretizations: the gap is time-stepping error
    assert gaps[0] < 1e-4 and gaps[1] < gaps[0] / 4


def test_trace_csv(tmp_path):
    _, trace = picard.solve_nonlinear(gauss(), None, SPEC, GRID)
    trace.to_csv(tmp_path / "trace.csv")
    rows = (tmp_path / "trace.csv").read_text().strip().splitlines()
    assert rows[0] == ",".join(picard.IterationTrace.COLUMNS) and len(rows) == len(trace) + 1
