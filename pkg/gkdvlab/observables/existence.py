"""Radius and time of the local contraction argument"""
from typing import Optional

import numpy as np
from scipy.optimize import bisect

from gkdvlab.observables.constants import ExistenceConstants
from gkdvlab.observables.mixed_norms import sup_sobolev_samples, xk_norm
from gkdvlab.observables.trajectory import ObservableError, TrajectoryView
from gkdvlab.spectral.grid import Field
from gkdvlab.spectral.norms import sobolev_norm
from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

INITIAL_SIGMA = {2: 0.25, 3: 1.0 / 12.0}
BISECT_RTOL = 1e-12

def _check_k(k: int) -> None:
    if k not in INITIAL_SIGMA:
        raise ObservableError(f"Only k in (2, 3) is supported, got {k}")

def local_radius(
    u0: Field,
    v_tr: Optional[TrajectoryView],
    k: int,
    consts: Optional[ExistenceConstants] = None
) -> float:
    """R_k = 2 (c_k ||u0||_{H^sigma(k)} + ||v||_{X_k^T}); v_tr = None means v = 0."""
    _check_k(k)
    consts = consts or ExistenceConstants()
    noise_part = 0.0 if v_tr is None else xk_norm(v_tr, k, consts).value
    return 2.0 * (consts.c_k * sobolev_norm(u0, INITIAL_SIGMA[k]) + noise_part)

def _k3_constraint(R: float, consts: ExistenceConstants):
    scale = max(2.0 * consts.C_tilde * R ** 3, 4.0 * consts.C_bar * R ** 2)
    return lambda T: scale * T ** (1.0 / 18.0) * (1.0 + T) ** consts.rho - 1.0

def local_time(R: float, k: int, consts: Optional[ExistenceConstants] = None) -> float:
    """Largest T admitted by the contraction constraints at radius R.

    k = 2: min((2 C~ R^2)^-2, (4 C- R^2)^-2).
    k = 3: largest T with 2 C~ T^(1/18) (1+T)^rho R^3 <= 1 and 4 C- T^(1/18) (1+T)^rho R^2 <= 1,
    by bisection to 1e-12 relative; the returned time sits just inside the feasible side.
    """
    _check_k(k)
    if not R > 0:
        raise ObservableError(f"Radius must be positive, got {R}")
    consts = consts or ExistenceConstants()
    if k == 2:
        return min((2.0 * consts.C_tilde * R ** 2) ** -2, (4.0 * consts.C_bar * R ** 2) ** -2)

    g = _k3_constraint(R, consts)
    hi = 1.0
    if g(hi) < 0:
        while g(hi) < 0:
            hi *= 2.0
        lo = hi / 2.0
    else:
        while g(hi) >= 0:
            hi /= 2.0
            if hi == 0.0:
                return 0.0
        lo, hi = hi, 2.0 * hi
    root = bisect(g, lo, hi, xtol=np.finfo(float).tiny, rtol=BISECT_RTOL, maxiter=500)
    return root * (1.0 - 2.0 * BISECT_RTOL)

def extended_radius(
    u0: Field,
    u_tr: TrajectoryView,
    v_tr: Optional[TrajectoryView],
    k: int,
    consts: Optional[ExistenceConstants] = None
) -> float:
    """2 [c_k (||u0||_{H^1} + sup_t ||u(t)||_{H^1}) + ||v||_{X_k^T}]"""
    _check_k(k)
    consts = consts or ExistenceConstants()
    sup_h1 = float(sup_sobolev_samples(u_tr.samples, u_tr.grid, 1.0, homogeneous=False))
    noise_part = 0.0 if v_tr is None else xk_norm(v_tr, k, consts).value
    return 2.0 * (consts.c_k * (sobolev_norm(u0, 1.0) + sup_h1) + noise_part)

def extended_time(
    u0: Field,
    u_tr: TrajectoryView,
    v_tr: Optional[TrajectoryView],
    k: int,
    consts: Optional[ExistenceConstants] = None
) -> float:
    """local_time at the extended radius"""
    return local_time(extended_radius(u0, u_tr, v_tr, k, consts), k, consts)
