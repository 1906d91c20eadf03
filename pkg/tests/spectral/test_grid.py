import math
import pytest
import numpy as np
from pydantic import ValidationError

from gkdvlab.spectral import (
    Field,
    Grid,
    GridMismatchError,
    boundary_mass_fraction,
    forward_transform,
    imaginary_residue,
    inverse_transform,
    real_orthonormal_basis,
    spectral_projection,
)
from tests.conftest import make_random_field

# Grid Tests

@pytest.mark.parametrize("n", [6, 7, 9, 0, -8])
def test_grid_rejects_bad_sizes(n):
    """Test Grid rejects odd or too small sample counts"""
    with pytest.raises(ValueError):
        Grid(n=n, length=1.0)

def test_grid_rejects_nonpositive_length():
    """Test Grid rejects L <= 0"""
    with pytest.raises(ValueError):
        Grid(n=8, length=0.0)

def test_grid_accepts_L_alias():
    """Test the period can be given under its short name"""
    assert Grid(n=16, L=3.0).length == 3.0

def test_grid_tables(torus_grid):
    """Test wavenumber table symmetry and spacing"""
    g = torus_grid
    assert g.xi[0] == 0.0
    assert abs(g.dx * g.n - g.length) <= 1e-15 * g.length
    inner = np.arange(g.n) != g.nyquist_index
    assert np.allclose(g.xi[g.conjugate_index()][inner], -g.xi[inner])
    assert g.xi_odd[g.nyquist_index] == 0.0
    assert g.x[0] == pytest.approx(-math.pi)
    assert g.modes[g.nyquist_index] == -g.n // 2

def test_grid_tables_read_only(torus_grid):
    """Test shared mode tables cannot be mutated"""
    with pytest.raises(ValueError):
        torus_grid.xi[1] = 5.0

def test_grid_require_same():
    """Test grid comparison raises on mismatch"""
    Grid(n=16, length=2.0).require_same(Grid(n=16, length=2.0))
    with pytest.raises(GridMismatchError):
        Grid(n=16, length=2.0).require_same(Grid(n=32, length=2.0))

# Field Tests

def test_field_shape_validation(torus_grid):
    """Test Field rejects sample arrays of the wrong length"""
    with pytest.raises(ValidationError):
        Field(grid=torus_grid, samples=np.zeros(torus_grid.n + 2))

def test_field_samples_are_frozen(torus_grid):
    """Test Field samples are an owned read-only copy"""
    source = np.ones(torus_grid.n)
    f = Field(grid=torus_grid, samples=source)
    source[0] = 7.0
    assert f.samples[0] == 1.0
    with pytest.raises(ValueError):
        f.samples[0] = 2.0

def test_field_arithmetic(random_field):
    """Test Field addition, subtraction and scaling"""
    doubled = random_field + random_field
    assert np.allclose(doubled.samples, (2 * random_field).samples)
    assert np.allclose((doubled - random_field).samples, random_field.samples)

# Transform Tests

def test_constant_field_coefficients(torus_grid):
    """Test u = 1 has c_0 = 1 and nothing else"""
    c = forward_transform(Field(grid=torus_grid, samples=np.ones(torus_grid.n)))
    assert c[0] == pytest.approx(1.0)
    assert np.max(np.abs(c[1:])) < 1e-15

def test_single_harmonic_coefficients(torus_grid):
    """Test cos(xi_1 x) has c_1 = c_-1 = 1/2"""
    c = Field.from_function(torus_grid, np.cos).coeffs
    assert c[1] == pytest.approx(0.5, abs=1e-15)
    assert c[-1] == pytest.approx(0.5, abs=1e-15)
    mask = np.ones(torus_grid.n, dtype=bool)
    mask[[1, -1]] = False
    assert np.max(np.abs(c[mask])) < 1e-15

def test_round_trip(torus_grid, rng):
    """Test inverse_transform(forward_transform(f)) == f"""
    f = Field(grid=torus_grid, samples=rng.normal(size=torus_grid.n))
    back = inverse_transform(torus_grid, forward_transform(f))
    error = np.linalg.norm(back.samples - f.samples) / np.linalg.norm(f.samples)
    assert error < 1e-12

def test_conjugate_symmetry(torus_grid, rng):
    """Test coefficients of real samples are conjugate-symmetric"""
    c = Field(grid=torus_grid, samples=rng.normal(size=torus_grid.n)).coeffs
    assert np.allclose(c[torus_grid.conjugate_index()], np.conj(c), atol=1e-15)
    assert abs(c[0].imag) < 1e-15
    assert imaginary_residue(c, torus_grid) < 1e-12

def test_parseval(wide_grid, rng):
    """Test sum u_j^2 dx == L sum |c_m|^2"""
    f = Field(grid=wide_grid, samples=rng.normal(size=wide_grid.n))
    physical = np.sum(f.samples ** 2) * wide_grid.dx
    spectral = wide_grid.length * np.sum(np.abs(f.coeffs) ** 2)
    assert spectral == pytest.approx(physical, rel=1e-12)

def test_batched_transforms_match_single(torus_grid, rng):
    """Test array helpers act on the last axis of batches"""
    from gkdvlab.spectral import to_coeffs
    batch = rng.normal(size=(3, torus_grid.n))
    stacked = to_coeffs(batch, torus_grid)
    for row, samples in zip(stacked, batch):
        assert np.allclose(row, Field(grid=torus_grid, samples=samples).coeffs)

# Helper Tests

def test_spectral_projection(random_field):
    """Test projection removes high modes and is identity past Nyquist"""
    g = random_field.grid
    low = spectral_projection(random_field, 3)
    c = low.coeffs
    assert np.max(np.abs(c[np.abs(g.modes) > 3])) < 1e-15
    assert np.allclose(c[np.abs(g.modes) <= 3], random_field.coeffs[np.abs(g.modes) <= 3])
    same = spectral_projection(random_field, g.n // 2)
    assert np.allclose(same.samples, random_field.samples)

@pytest.mark.parametrize("length", [2 * math.pi, 10.0])
def test_real_orthonormal_basis(length):
    """Test the real trigonometric basis is orthonormal for the discrete product"""
    g = Grid(n=16, length=length)
    basis, modes = real_orthonormal_basis(g)
    assert basis.shape == (16, 16)
    gram = basis @ basis.T * g.dx
    assert np.allclose(gram, np.eye(16), atol=1e-12)
    assert sorted(modes.tolist()) == [0] + sorted(list(range(1, 8)) * 2) + [8]

def test_boundary_mass_fraction(wide_grid):
    """Test localized data has negligible strip mass and flat data does not"""
    bump = Field.from_function(wide_grid, lambda x: np.exp(-x ** 2))
    assert boundary_mass_fraction(bump) < 1e-8
    flat = Field(grid=wide_grid, samples=np.ones(wide_grid.n))
    assert boundary_mass_fraction(flat, strip=0.05) == pytest.approx(0.1, abs=2.0 / wide_grid.n)
    assert boundary_mass_fraction(Field.zeros(wide_grid)) == 0.0

def test_helper_fields_are_real(torus_grid, rng):
    """Test the shared random-field helper yields zero-mean fields on request"""
    f = make_random_field(torus_grid, rng, mean=False)
    assert abs(f.coeffs[0]) < 1e-15
