"""Periodic-domain Fourier toolbox"""
from .grid import (
    Field,
    Grid,
    GridMismatchError,
    InvalidExponentError,
    InvalidOrderError,
    SpectralError,
    boundary_mass_fraction,
    forward_transform,
    imaginary_residue,
    inverse_transform,
    real_orthonormal_basis,
    spectral_projection,
    to_coeffs,
    to_samples,
)
from .dealias import (
    dealiased_power_coeffs,
    dealiased_power_integral,
    default_pad_factor,
    pad_coeffs,
    pad_threshold,
    padded_samples,
    truncate_coeffs,
)
from .multipliers import (
    SpectralMultiplier,
    airy_multiplier,
    airy_values,
    apply_multiplier,
    bessel_multiplier,
    derivative_multiplier,
    fractional_derivative_dx_multiplier,
    fractional_derivative_multiplier,
    hilbert_multiplier,
    identity_multiplier,
)
from .norms import lp_norm, lp_norm_samples, sobolev_norm, sobolev_norm_sq_coeffs
