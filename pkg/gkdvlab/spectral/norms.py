"""Sobolev and Lebesgue norms on the periodic grid"""
import numpy as np

from gkdvlab.spectral.grid import Field, Grid, InvalidExponentError, to_coeffs

def sobolev_norm_sq_coeffs(coeffs: np.ndarray, grid: Grid, sigma: float) -> np.ndarray:
    """L * sum_m (1 + xi_m^2)^sigma |c_m|^2 over the last axis."""
    weights = (1.0 + grid.xi ** 2) ** sigma
    return grid.length * np.sum(weights * np.abs(coeffs) ** 2, axis=-1)

def sobolev_norm(f: Field, sigma: float) -> float:
    """Inhomogeneous H^sigma norm. Negative sigma is accepted and gives the dual norm."""
    return float(np.sqrt(sobolev_norm_sq_coeffs(to_coeffs(f.samples, f.grid), f.grid, sigma)))

def lp_norm_samples(samples: np.ndarray, grid: Grid, p: float) -> np.ndarray:
    """(sum_j |u_j|^p dx)^(1/p) over the last axis; p = inf gives max |u_j|."""
    if p < 1:
        raise InvalidExponentError(f"Lebesgue exponent must be >= 1, got {p}")
    if np.isinf(p):
        return np.max(np.abs(samples), axis=-1)
    return (np.sum(np.abs(samples) ** p, axis=-1) * grid.dx) ** (1.0 / p)

def lp_norm(f: Field, p: float) -> float:
    return float(lp_norm_samples(f.samples, f.grid, p))
