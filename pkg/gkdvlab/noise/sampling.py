"""Wiener increments Phi dW and exact sampling of the stochastic convolution.

Every increment consumes n - 1 standard normals from its stream, in the order
g_0, a_1 .. a_{n/2-1}, b_1 .. b_{n/2-1}, and builds

    c_0 = phi_0 g_0 sqrt(dt / L),    c_m = phi_m (a_m - i b_m) sqrt(dt / (2 L)),
    c_{-m} = conj(c_m),               c_{-n/2} = 0,

so that E ||Phi dW||^2 = dt hs_norm(Phi, 0)^2. Since the Airy group is unitary
on every mode, v <- S(dt) v + eta reproduces the law of v(t + dt) given v(t)
with no time-discretization bias.
"""
from typing import List, Optional, Sequence

import numpy as np

from gkdvlab.noise.covariance import CovarianceOperator, InvalidIncrementError
from gkdvlab.noise.rng import RngStream
from gkdvlab.spectral.grid import Field, Grid, to_samples
from gkdvlab.spectral.multipliers import airy_values
from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

def draws_per_increment(grid: Grid) -> int:
    return grid.n - 1

def increment_from_normals(phi: CovarianceOperator, dt: float, normals: np.ndarray) -> np.ndarray:
    """Coefficients of Phi dW from pre-drawn normals of shape (..., n - 1)."""
    g = phi.grid
    half = g.n // 2
    if normals.shape[-1] != g.n - 1:
        raise InvalidIncrementError(f"Need {g.n - 1} normals per increment, got {normals.shape[-1]}")
    coeffs = np.zeros(normals.shape[:-1] + (g.n,), dtype=np.complex128)
    coeffs[..., 0] = phi.profile[0] * normals[..., 0] * np.sqrt(dt / g.length)
    a = normals[..., 1:half]
    b = normals[..., half:]
    coeffs[..., 1:half] = phi.profile[1:half] * (a - 1j * b) * np.sqrt(dt / (2.0 * g.length))
    coeffs[..., half + 1:] = np.conj(coeffs[..., half - 1:0:-1])
    return coeffs

def sample_increment_coeffs(phi: CovarianceOperator, dt: float, rng: RngStream) -> np.ndarray:
    if dt <= 0:
        raise InvalidIncrementError(f"Increment needs dt > 0, got {dt}")
    return increment_from_normals(phi, dt, rng.normal(draws_per_increment(phi.grid)))

def sample_increment(phi: CovarianceOperator, dt: float, rng: RngStream) -> Field:
    """One real increment Phi (W(t + dt) - W(t))."""
    return Field(grid=phi.grid, samples=to_samples(sample_increment_coeffs(phi, dt, rng), phi.grid))

def convolution_step(v: Field, phi: CovarianceOperator, dt: float, rng: RngStream) -> Field:
    """S(dt) v + Phi dW over [t, t + dt]."""
    v.grid.require_same(phi.grid)
    eta = sample_increment_coeffs(phi, dt, rng)
    coeffs = airy_values(v.grid, dt) * v.coeffs + eta
    return Field.from_coeffs(v.grid, coeffs)

def convolution_path(phi: CovarianceOperator, T: float, n_steps: int, rng: RngStream) -> List[Field]:
    """Snapshots v(t_i), t_i = i T / n_steps, starting from v(0) = 0."""
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    path = [Field.zeros(phi.grid)]
    if T == 0:
        return path
    dt = T / n_steps
    for _ in range(n_steps):
        path.append(convolution_step(path[-1], phi, dt, rng))
    return path

def convolution_batch(
    phi: CovarianceOperator,
    T: float,
    n_steps: int,
    rngs: Sequence[RngStream],
    keep_path: bool = False
) -> np.ndarray:
    """Vectorized exact sampler over independent streams.

    Each stream draws exactly what n_steps calls of convolution_step would, so
    row i equals convolution_path(phi, T, n_steps, rngs[i]) coefficient-wise.

    Returns:
        Coefficients of shape (n_streams, n) for v(T), or
        (n_streams, n_steps + 1, n) with v(0) = 0 when keep_path is set.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    g = phi.grid
    dt = T / n_steps
    if dt <= 0:
        raise InvalidIncrementError(f"Horizon must be positive, got T={T}")
    normals = np.stack([rng.normal((n_steps, g.n - 1)) for rng in rngs])
    increments = increment_from_normals(phi, dt, normals)
    propagator = airy_values(g, dt)
    v = np.zeros((len(rngs), g.n), dtype=np.complex128)
    path: Optional[np.ndarray] = None
    if keep_path:
        path = np.zeros((len(rngs), n_steps + 1, g.n), dtype=np.complex128)
    for i in range(n_steps):
        v = propagator * v + increments[:, i]
        if path is not None:
            path[:, i + 1] = v
    return path if path is not None else v
