"""Initial data: zero, Gaussian bumps, travelling solitons and explicit tables"""
from typing import Optional, Sequence

import numpy as np

from gkdvlab.dynamics.config import InitialDataConfig, SimConfig
from gkdvlab.dynamics.nonlinear import DynamicsError
from gkdvlab.spectral.grid import Field, Grid, boundary_mass_fraction, to_coeffs, to_samples
from gkdvlab.spectral.norms import sobolev_norm
from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

SOLITON_RESIDUAL_TOL = 1e-8
BOUNDARY_MASS_TOL = 1e-8

class UnknownInitialDataError(DynamicsError, ValueError):
    """Raised for an unrecognized initial data kind"""
    pass

class InvalidInitialDataError(DynamicsError, ValueError):
    """Raised when initial data parameters are inconsistent"""
    pass

def soliton_constants(k: int, c: float):
    """(amplitude, inverse width) of Q(x) = A sech^(2/k)(theta x).

    Substituting Q(x - ct) into u_t + u_xxx + u^k u_x = 0 and integrating once
    gives -cQ + Q'' + Q^(k+1)/(k+1) = 0, solved by
    A = ((k+1)(k+2) c / 2)^(1/k) and theta = k sqrt(c) / 2.
    """
    amplitude = ((k + 1) * (k + 2) * c / 2.0) ** (1.0 / k)
    theta = 0.5 * k * np.sqrt(c)
    return amplitude, theta

def periodic_offset(x: np.ndarray, center: float, length: float) -> np.ndarray:
    """x - center wrapped into [-L/2, L/2)"""
    return np.mod(x - center + 0.5 * length, length) - 0.5 * length

def exact_soliton(grid: Grid, k: int, c: float, x0: float = 0.0, t: float = 0.0) -> Field:
    """Soliton profile transported to time t, wrapped on the torus."""
    amplitude, theta = soliton_constants(k, c)
    z = theta * periodic_offset(grid.x, x0 + c * t, grid.length)
    return Field(grid=grid, samples=amplitude / np.cosh(z) ** (2.0 / k))

def soliton_residual(u: Field, c: float, k: int) -> float:
    """L2 norm of -cQ + Q'' + Q^(k+1)/(k+1), with Q'' taken spectrally."""
    g = u.grid
    second = to_samples(-(g.xi ** 2) * to_coeffs(u.samples, g), g)
    residual = -c * u.samples + second + u.samples ** (k + 1) / (k + 1)
    return float(np.sqrt(np.sum(residual ** 2) * g.dx))

def initial_data(
    kind: str,
    grid: Grid,
    k: int = 2,
    mu: int = 1,
    amplitude: float = 1.0,
    width: float = 1.0,
    center: float = 0.0,
    speed: float = 1.0,
    values: Optional[Sequence[float]] = None,
    target_norm: Optional[float] = None,
    target_sigma: float = 0.0
) -> Field:
    """Build u_0 on the grid.

    Raises:
        UnknownInitialDataError: kind is not zero, gaussian, soliton or custom-table
        InvalidInitialDataError: soliton requested for defocusing mu, or a table of the wrong length
    """
    if kind == "zero":
        field = Field.zeros(grid)
    elif kind == "gaussian":
        offset = periodic_offset(grid.x, center, grid.length)
        field = Field(grid=grid, samples=amplitude * np.exp(-offset ** 2 / (2.0 * width ** 2)))
    elif kind == "soliton":
        if mu != 1:
            raise InvalidInitialDataError("Soliton data exists only for focusing mu = +1")
        field = exact_soliton(grid, k, speed, center)
        residual = soliton_residual(field, speed, k)
        if residual > SOLITON_RESIDUAL_TOL:
            logger.warning(
                f"Soliton residual {residual:.3e} exceeds {SOLITON_RESIDUAL_TOL:g}; refine the grid"
            )
    elif kind == "custom-table":
        table = np.asarray(values if values is not None else [], dtype=np.float64)
        if table.shape != (grid.n,):
            raise InvalidInitialDataError(f"custom-table needs {grid.n} values, got {table.shape}")
        field = Field(grid=grid, samples=table)
    else:
        raise UnknownInitialDataError(f"Unknown initial data kind: {kind}")

    if target_norm is not None:
        norm = sobolev_norm(field, target_sigma)
        if norm == 0.0:
            if target_norm > 0:
                raise InvalidInitialDataError("Cannot rescale zero initial data to a positive norm")
        else:
            field = field * (target_norm / norm)

    fraction = boundary_mass_fraction(field)
    if fraction > BOUNDARY_MASS_TOL:
        logger.warning(f"Initial data puts {fraction:.2e} of its mass in the boundary strips")
    return field

def initial_field(cfg: SimConfig) -> Field:
    """u_0 described by cfg.initial on cfg.grid"""
    spec: InitialDataConfig = cfg.initial
    return initial_data(grid=cfg.grid, k=cfg.k, mu=cfg.mu, **spec.model_dump())
