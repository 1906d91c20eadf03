import os
import sys
import math
import pytest
import numpy as np
from unittest.mock import patch

# Add project root to PYTHONPATH
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from gkdvlab.spectral import Field, Grid

@pytest.fixture(autouse=True)
def mock_env_vars(tmp_path):
    """Point output and logging environment at test-local values"""
    with patch.dict(os.environ, {
        'LOG_LEVEL': 'WARNING',
        'GKDV_OUTPUT_DIR': str(tmp_path / "runs"),
    }):
        yield

@pytest.fixture
def rng():
    """Seeded numpy generator for test data (never for simulation noise)"""
    return np.random.default_rng(20240601)

@pytest.fixture
def torus_grid():
    """2*pi-periodic grid, so xi_1 = 1"""
    return Grid(n=64, length=2 * math.pi)

@pytest.fixture
def tiny_grid():
    """Smallest admissible grid, for brute-force basis oracles"""
    return Grid(n=8, length=2 * math.pi)

@pytest.fixture
def wide_grid():
    """The default L = 100 torus"""
    return Grid(n=256, length=100.0)

@pytest.fixture
def random_field(torus_grid, rng):
    """Smooth random real field: a handful of low modes with random amplitudes"""
    coeffs = np.zeros(torus_grid.n, dtype=complex)
    for m in range(1, 9):
        value = (rng.normal() + 1j * rng.normal()) / m ** 2
        coeffs[m] = value
        coeffs[-m] = np.conj(value)
    coeffs[0] = rng.normal()
    return Field.from_coeffs(torus_grid, coeffs)

def make_random_field(grid, rng, n_modes=8, mean=True):
    """Helper shared by test modules that need several independent fields"""
    coeffs = np.zeros(grid.n, dtype=complex)
    for m in range(1, n_modes + 1):
        value = (rng.normal() + 1j * rng.normal()) / m ** 2
        coeffs[m] = value
        coeffs[-m] = np.conj(value)
    if mean:
        coeffs[0] = rng.normal()
    return Field.from_coeffs(grid, coeffs)
