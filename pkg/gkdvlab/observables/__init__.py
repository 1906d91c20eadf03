"""Mass, Hamiltonian, Ito drifts, mixed space-time norms and local-existence formulas"""
from .constants import ILLUSTRATIVE, ExistenceConstants
from .conserved import (
    hamiltonian,
    hamiltonian_coeffs,
    hamiltonian_ito_drift,
    hamiltonian_ito_drift_by_basis,
    hamiltonian_ito_drift_coeffs,
    hamiltonian_second_variation,
    mass,
    mass_coeffs,
    mass_cross_term_by_basis,
    mass_cross_term_coeffs,
    mass_moment_drift,
    mass_moment_drift_coeffs,
)
from .existence import extended_radius, extended_time, local_radius, local_time
from .mixed_norms import (
    XK_COMPONENTS,
    XK_MOMENT_BOUNDS,
    MixedNormSpec,
    XkComponent,
    XkNorm,
    mixed_norm,
    mixed_norm_samples,
    sup_sobolev_samples,
    xk_component,
    xk_components_samples,
    xk_norm,
)
from .registry import ObservableContext, ObservableRegistry, default_registry
from .trajectory import EmptyTrajectoryError, ObservableError, TrajectoryView, UnknownObservableError
