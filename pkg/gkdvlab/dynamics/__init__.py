"""Time integration of the stochastic gKdV equation and the Picard solver"""
from .config import InitialDataConfig, SimConfig, State
from .initial_data import (
    InvalidInitialDataError,
    UnknownInitialDataError,
    exact_soliton,
    initial_data,
    initial_field,
    soliton_constants,
    soliton_residual,
)
from .integrators import (
    BlowUpError,
    NoisePath,
    Trajectory,
    exp_euler_step,
    integrate,
    integrate_batch,
    strang_step,
)
from .nonlinear import (
    DealiasingError,
    DynamicsError,
    check_pad_factor,
    default_pad_factor,
    nonlinear_rhs,
    nonlinear_rhs_coeffs,
    pad_threshold,
)
from .picard import NonContractionError, PicardReport, PicardResult, duhamel_trapezoid, picard_solve
