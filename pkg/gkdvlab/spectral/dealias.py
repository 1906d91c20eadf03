"""Zero-padded evaluation of polynomial powers.

Powers are taken on a grid with M = pad_factor * n points. Coefficients with
|m| < n/2 of u^p are exact when M >= (p + 1) n / 2. The Nyquist mode is passive:
it is left out of the product, so (u, d/dx P(u^p)) vanishes for every field.

Translation commutes with pointwise powers, so the padded transforms work on
plain FFT coefficients and skip the x_0 = -L/2 phase.
"""
import numpy as np

from gkdvlab.spectral.grid import Grid

def pad_threshold(k: int) -> float:
    """Smallest pad factor that dealiases the degree-(k+1) product exactly."""
    return (k + 2) / 2

def default_pad_factor(k: int) -> int:
    return 2 if k == 2 else 3

def pad_coeffs(coeffs: np.ndarray, n: int, M: int) -> np.ndarray:
    """Embed FFT-order coefficients of length n into length M, dropping Nyquist."""
    half = n // 2
    padded = np.zeros(coeffs.shape[:-1] + (M,), dtype=np.complex128)
    padded[..., :half] = coeffs[..., :half]
    padded[..., M - half + 1:] = coeffs[..., half + 1:]
    return padded

def truncate_coeffs(padded: np.ndarray, n: int) -> np.ndarray:
    """Keep the modes |m| < n/2 of a length-M coefficient array."""
    half = n // 2
    M = padded.shape[-1]
    out = np.zeros(padded.shape[:-1] + (n,), dtype=np.complex128)
    out[..., :half] = padded[..., :half]
    out[..., half + 1:] = padded[..., M - half + 1:]
    return out

def padded_samples(coeffs: np.ndarray, grid: Grid, pad_factor: int) -> np.ndarray:
    """Samples of the trigonometric interpolant on the padded grid (batched on leading axes)."""
    M = pad_factor * grid.n
    plain = coeffs * grid.phase
    return np.fft.ifft(pad_coeffs(plain, grid.n, M), axis=-1).real * M

def dealiased_power_coeffs(coeffs: np.ndarray, grid: Grid, power: int, pad_factor: int) -> np.ndarray:
    """Coefficients (phased, FFT order, Nyquist zero) of the projection of u^power."""
    M = pad_factor * grid.n
    w = padded_samples(coeffs, grid, pad_factor) ** power
    return truncate_coeffs(np.fft.fft(w, axis=-1) / M, grid.n) * grid.phase

def dealiased_power_integral(coeffs: np.ndarray, grid: Grid, power: int, pad_factor: int) -> np.ndarray:
    """int u^power dx, evaluated on the padded grid."""
    return grid.length * np.mean(padded_samples(coeffs, grid, pad_factor) ** power, axis=-1)
