"""Conservative pseudospectral nonlinearity -mu d/dx (u^(k+1) / (k+1))"""
import numpy as np

from gkdvlab.spectral.dealias import dealiased_power_coeffs, default_pad_factor, pad_threshold
from gkdvlab.spectral.grid import Field, Grid, to_coeffs

class DynamicsError(RuntimeError):
    """Base exception for time-integration errors"""
    pass

class DealiasingError(DynamicsError, ValueError):
    """Raised when the padded grid is too small for the nonlinear product"""
    pass

def check_pad_factor(k: int, pad_factor: int) -> None:
    if pad_factor < 2 or 2 * pad_factor < k + 2:
        raise DealiasingError(
            f"pad_factor={pad_factor} is below the exact-dealiasing threshold "
            f"max(2, (k+2)/2) = {max(2.0, pad_threshold(k)):g} for k={k}"
        )

def nonlinear_rhs_coeffs(coeffs: np.ndarray, grid: Grid, k: int, mu: int, pad_factor: int) -> np.ndarray:
    """Coefficient-level nonlinearity; leading batch axes allowed, pad factor not rechecked."""
    power = dealiased_power_coeffs(coeffs, grid, k + 1, pad_factor)
    return (-mu / (k + 1)) * 1j * grid.xi_odd * power

def nonlinear_rhs(u: Field, k: int, mu: int, pad_factor: int) -> Field:
    """-mu d/dx (u^(k+1) / (k+1)), dealiased by zero padding."""
    check_pad_factor(k, pad_factor)
    coeffs = nonlinear_rhs_coeffs(to_coeffs(u.samples, u.grid), u.grid, k, mu, pad_factor)
    return Field.from_coeffs(u.grid, coeffs)
