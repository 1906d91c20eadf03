"""Monte Carlo ensembles, statistical checks of the stochastic identities, scaling and contraction studies"""
from .checks import (
    ConservationRow,
    ConservationStudy,
    SolitonTransportReport,
    convolution_step_independence_check,
    convolution_variance_check,
    deterministic_conservation_study,
    hamiltonian_ito_check,
    mass_ito_check,
    moment_balance_check,
    soliton_transport_check,
)
from .contraction import ContractionStudy, PicardRow, picard_contraction_study
from .ensemble import (
    EnsembleResult,
    EnsembleSpec,
    final_increments,
    integrated,
    map_chunks,
    map_chunks_async,
    run_ensemble,
    run_ensemble_async,
)
from .scaling import ScalingQuantity, ScalingStudy, lemma_scaling_study
from .stats import Summary, bootstrap_slope, confidence_interval, loglog_fit, standard_error, summarize
from .verdict import CheckReport, ExperimentError, InsufficientHorizonsError, Verdict, within_band
