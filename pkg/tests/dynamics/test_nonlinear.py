import math
import pytest
import numpy as np

from gkdvlab.dynamics import DealiasingError, check_pad_factor, nonlinear_rhs, nonlinear_rhs_coeffs
from gkdvlab.spectral import Field, Grid, to_coeffs
from tests.conftest import make_random_field

def test_constant_field_has_no_nonlinearity(torus_grid):
    """Test the derivative of a constant power vanishes"""
    u = Field(grid=torus_grid, samples=np.full(torus_grid.n, 0.7))
    assert np.max(np.abs(nonlinear_rhs(u, 2, 1, 2).samples)) < 1e-14

@pytest.mark.parametrize("k,pad", [(2, 2), (3, 3)])
def test_trigonometric_oracle(torus_grid, k, pad):
    """Test -d/dx(sin^(k+1)/(k+1)) = -sin^k cos"""
    u = Field.from_function(torus_grid, np.sin)
    x = torus_grid.x
    expected = -np.sin(x) ** k * np.cos(x)
    assert np.allclose(nonlinear_rhs(u, k, 1, pad).samples, expected, atol=1e-12)

def test_sign_follows_mu(torus_grid):
    """Test defocusing flips the sign"""
    u = Field.from_function(torus_grid, lambda x: np.sin(x) + 0.5 * np.cos(2 * x))
    plus = nonlinear_rhs(u, 2, 1, 2).samples
    minus = nonlinear_rhs(u, 2, -1, 2).samples
    assert np.allclose(plus, -minus)

@pytest.mark.parametrize("k,pad", [(2, 2), (3, 3), (2, 4)])
def test_mass_neutrality(k, pad, rng):
    """Test (u, N(u)) vanishes for random fields"""
    g = Grid(n=64, length=10.0)
    u = Field(grid=g, samples=rng.normal(size=g.n))
    N = nonlinear_rhs(u, k, 1, pad)
    inner = float(np.sum(u.samples * N.samples) * g.dx)
    scale = float(np.sum(u.samples ** 2) * g.dx) ** ((k + 2) / 2)
    assert abs(inner) <= 1e-12 * scale

def test_nyquist_slot_stays_empty(torus_grid, rng):
    """Test the nonlinearity never feeds the Nyquist mode"""
    u = Field(grid=torus_grid, samples=rng.normal(size=torus_grid.n))
    c = to_coeffs(nonlinear_rhs(u, 2, 1, 2).samples, torus_grid)
    assert abs(c[torus_grid.nyquist_index]) < 1e-13

@pytest.mark.parametrize("k,pad", [(2, 1), (3, 2)])
def test_pad_factor_threshold(k, pad, torus_grid):
    """Test pad factors below the exact-dealiasing threshold are rejected"""
    with pytest.raises(DealiasingError):
        check_pad_factor(k, pad)
    with pytest.raises(ValueError):
        nonlinear_rhs(Field.zeros(torus_grid), k, 1, pad)

def test_batched_matches_single(torus_grid, rng):
    """Test the coefficient-level routine handles batch axes row by row"""
    fields = [make_random_field(torus_grid, rng) for _ in range(3)]
    batch = np.stack([f.coeffs for f in fields])
    out = nonlinear_rhs_coeffs(batch, torus_grid, 2, 1, 2)
    for row, f in zip(out, fields):
        assert np.allclose(row, nonlinear_rhs(f, 2, 1, 2).coeffs, atol=1e-14)
