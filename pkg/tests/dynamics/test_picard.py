import pytest
import numpy as np

from gkdvlab.dynamics import (
    DynamicsError,
    InitialDataConfig,
    NoisePath,
    NonContractionError,
    SimConfig,
    duhamel_trapezoid,
    initial_field,
    integrate,
    picard_solve,
)
from gkdvlab.noise import CovarianceOperator, RngStream
from gkdvlab.spectral import Field, Grid, airy_multiplier, apply_multiplier, to_samples

@pytest.fixture
def setup():
    cfg = SimConfig(k=2, n=64, L=20.0, dt=1e-3, T=0.05, scheme="exp-euler", initial=InitialDataConfig(amplitude=0.1))
    phi = CovarianceOperator.power_law(cfg.grid, amplitude=0.01)
    path = NoisePath.sample(phi, cfg.dt, cfg.n_steps, RngStream(17))
    return cfg, phi, path

def test_duhamel_of_constant_forcing():
    """Test the trapezoid Duhamel sum integrates a constant exactly with S = 1"""
    N = np.ones((6, 4), dtype=complex)
    out = duhamel_trapezoid(N, np.ones(4), 0.1)
    assert np.allclose(out[:, 0], 0.1 * np.arange(6))

def test_zero_data_converges_immediately(torus_grid):
    """Test zero data and noise is a fixed point after one iteration"""
    zeros = np.zeros((11, torus_grid.n), dtype=complex)
    result = picard_solve(Field.zeros(torus_grid), zeros, 2, 0.1, 10)
    assert result.report.iterations == 1
    assert result.report.differences == [0.0]
    assert np.all(result.coeffs == 0.0)

def test_linear_solution(setup):
    """Test nonlinear=False returns S(t) u0 + v after one iteration"""
    cfg, phi, path = setup
    u0 = initial_field(cfg)
    result = picard_solve(u0, path.convolution(), 2, cfg.T, cfg.n_steps, nonlinear=False)
    assert result.report.iterations == 1
    expected = apply_multiplier(u0, airy_multiplier(cfg.grid, cfg.T)).samples + to_samples(path.convolution()[-1], cfg.grid)
    assert np.allclose(to_samples(result.coeffs[-1], cfg.grid), expected, atol=1e-12)

def test_small_data_contracts(setup):
    """Test small data converges with a contraction factor well below one"""
    cfg, phi, path = setup
    result = picard_solve(initial_field(cfg), path.convolution(), 2, cfg.T, cfg.n_steps)
    report = result.report
    assert report.converged
    assert report.sigma == 0.25
    assert report.differences[-1] < 1e-10
    assert report.contraction_factor < 0.5

def test_matches_integrator_on_same_noise(setup):
    """Test the Picard fixed point agrees with exponential Euler on the same path"""
    cfg, phi, path = setup
    result = picard_solve(initial_field(cfg), path.convolution(), 2, cfg.T, cfg.n_steps)
    tr = integrate(cfg, phi, noise_path=path)
    gap = np.max(np.abs(result.trajectory.samples - tr.samples))
    assert gap < 1e-4

def test_trajectory_view(setup):
    """Test the result exposes a view on the uniform lattice"""
    cfg, phi, path = setup
    result = picard_solve(initial_field(cfg), path.convolution(), 2, cfg.T, cfg.n_steps)
    view = result.trajectory
    assert view.is_uniform
    assert view.horizon == pytest.approx(cfg.T)

def test_max_iter_exhausted(setup):
    """Test failing to reach tol raises with the differences so far"""
    cfg, phi, path = setup
    with pytest.raises(NonContractionError) as info:
        picard_solve(initial_field(cfg), path.convolution(), 2, cfg.T, cfg.n_steps, tol=1e-30, max_iter=2)
    assert len(info.value.differences) == 2

def test_v_path_shape_checked(torus_grid):
    """Test a convolution path of the wrong length is rejected"""
    with pytest.raises(DynamicsError):
        picard_solve(Field.zeros(torus_grid), np.zeros((5, torus_grid.n)), 2, 0.1, 10)

def test_v_path_as_fields(torus_grid):
    """Test Field sequences are accepted and checked for the grid"""
    path = [Field.zeros(torus_grid) for _ in range(3)]
    assert picard_solve(Field.zeros(torus_grid), path, 3, 0.1, 2).report.sigma == pytest.approx(1 / 12)
    other = [Field.zeros(Grid(n=32, length=1.0)) for _ in range(3)]
    with pytest.raises(ValueError):
        picard_solve(Field.zeros(torus_grid), other, 3, 0.1, 2)

@pytest.mark.slow
def test_large_data_fails_to_contract():
    """Test a large soliton on a long horizon does not contract"""
    g = Grid(n=128, length=30.0)
    u0 = Field.from_function(g, lambda x: 20.0 / np.cosh(x))
    with pytest.raises(NonContractionError):
        picard_solve(u0, np.zeros((201, g.n), dtype=complex), 2, 2.0, 200, max_iter=15)
