import math
import pytest
import numpy as np

from gkdvlab.dynamics import InitialDataConfig, SimConfig
from gkdvlab.experiments.checks import (
    convolution_step_independence_check,
    convolution_variance_check,
    deterministic_conservation_study,
    hamiltonian_ito_check,
    mass_ito_check,
    moment_balance_check,
    soliton_transport_check,
)
from gkdvlab.experiments.ensemble import EnsembleSpec
from gkdvlab.experiments.verdict import ExperimentError
from gkdvlab.noise import CovarianceOperator

def small_config(**overrides):
    settings = dict(k=2, n=32, L=20.0, dt=1e-3, T=0.01, initial=InitialDataConfig(amplitude=0.5))
    settings.update(overrides)
    return SimConfig(**settings)

# Convolution Variance Tests
def test_single_mode_variance_target(torus_grid):
    """Test phi_{+-1} = 1 on the 2 pi torus gives E||v(2)||^2 = 4"""
    phi = CovarianceOperator.single_mode(torus_grid, 1)
    report = convolution_variance_check(phi, [0.0, 1.0], T=2.0, n_steps=4, n_traj=2000, master_seed=1)
    low, high = report.verdicts
    assert low.target == pytest.approx(4.0)
    assert high.target == pytest.approx(8.0)
    for verdict in report.verdicts:
        assert abs(verdict.estimate - verdict.target) <= 5 * verdict.se
        assert verdict.details["skewness"] is not None

def test_zero_noise_variance_passes_exactly(torus_grid):
    """Test Phi = 0 gives estimate 0 with zero SE and a PASS"""
    report = convolution_variance_check(CovarianceOperator.zero(torus_grid), [0.0], T=1.0, n_steps=2, n_traj=10)
    verdict = report.verdicts[0]
    assert verdict.estimate == 0.0
    assert verdict.se == 0.0
    assert report.passed

def test_variance_check_rejects_infinite_sigma(torus_grid):
    """Test Sobolev indices must be finite"""
    with pytest.raises(ExperimentError):
        convolution_variance_check(CovarianceOperator.zero(torus_grid), [math.inf], T=1.0, n_steps=2, n_traj=10)

def test_variance_check_reproducible(torus_grid):
    """Test the same seed gives the same estimate, with any thread count"""
    phi = CovarianceOperator.power_law(torus_grid)
    a = convolution_variance_check(phi, [0.5], T=1.0, n_steps=3, n_traj=300, master_seed=4, batch_size=64)
    b = convolution_variance_check(phi, [0.5], T=1.0, n_steps=3, n_traj=300, master_seed=4, batch_size=64, threads=3)
    assert a.verdicts[0].estimate == b.verdicts[0].estimate

def test_step_independence(torus_grid):
    """Test the law of v(T) does not depend on the step count"""
    phi = CovarianceOperator.power_law(torus_grid)
    verdict = convolution_step_independence_check(phi, 0.0, T=1.0, n_traj=1000, steps=(1, 16), master_seed=2)
    assert abs(verdict.estimate - verdict.target) <= 5 * verdict.se
    assert verdict.details["steps"] == [1, 16]

def test_step_independence_needs_two_counts(torus_grid):
    """Test exactly two step counts are compared"""
    with pytest.raises(ExperimentError):
        convolution_step_independence_check(CovarianceOperator.zero(torus_grid), 0.0, 1.0, 10, steps=(1, 2, 4))

# Ito Identity Tests
def test_mass_ito_zero_noise_linear():
    """Test without noise or nonlinearity the mass increment is exactly zero"""
    cfg = small_config(nonlinear=False)
    spec = EnsembleSpec(base=cfg, n_traj=4)
    verdict = mass_ito_check(spec, CovarianceOperator.zero(cfg.grid))
    assert verdict.target == 0.0
    assert verdict.bias_estimate == 0.0
    assert verdict.passed

def test_mass_ito_linear_flow():
    """Test E||u(T)||^2 - ||u0||^2 = T ||Phi||^2 for the linear stochastic flow"""
    cfg = small_config(nonlinear=False, T=0.5, dt=0.05)
    phi = CovarianceOperator.power_law(cfg.grid, amplitude=0.5)
    verdict = mass_ito_check(EnsembleSpec(base=cfg, n_traj=2000, master_seed=7), phi)
    assert verdict.target == pytest.approx(0.5 * phi.hs_norm(0.0) ** 2)
    assert abs(verdict.estimate - verdict.target) <= 5 * verdict.se
    assert verdict.details["n_blowup"] == 0

def test_mass_ito_nonlinear_levels_share_noise():
    """Test the nonlinear check runs dt, dt/2 and dt/4 on one path per stream and reports each gap"""
    cfg = small_config(T=0.01)
    phi = CovarianceOperator.power_law(cfg.grid, amplitude=0.2)
    verdict = mass_ito_check(EnsembleSpec(base=cfg, n_traj=16, batch_size=4, master_seed=3), phi)
    details = verdict.details
    assert details["dts"] == pytest.approx([1e-3, 5e-4, 2.5e-4])
    assert details["dt"] == pytest.approx(cfg.dt / 4)
    assert len(details["biases"]) == 3
    assert verdict.bias_estimate == pytest.approx(abs(details["biases"][1]))
    assert details["bias_shrinks"] is True
    assert details["n_blowup"] == 0
    assert verdict.target == pytest.approx(cfg.T * phi.hs_norm(0.0) ** 2)

def test_mass_ito_paired_gaps_are_small():
    """Test levels driven by one Brownian path differ far less than the Monte Carlo spread"""
    cfg = small_config(T=0.01)
    phi = CovarianceOperator.power_law(cfg.grid, amplitude=0.2)
    verdict = mass_ito_check(EnsembleSpec(base=cfg, n_traj=16, master_seed=4), phi)
    assert all(se < 0.1 * verdict.se for se in verdict.details["bias_ses"])

def test_mass_ito_bias_halves_for_first_order_scheme():
    """Test exp-Euler mass bias shrinks about twofold each time dt is halved"""
    cfg = small_config(T=0.05, scheme="exp-euler", initial=InitialDataConfig(amplitude=1.0, center=10.0))
    verdict = mass_ito_check(EnsembleSpec(base=cfg, n_traj=2), CovarianceOperator.zero(cfg.grid))
    coarse, half, _ = verdict.details["biases"]
    assert coarse > 0 and half > 0
    assert verdict.details["bias_ratio"] == pytest.approx(2.0, rel=0.1)
    assert verdict.details["bias_shrinks"] is True

def test_mass_ito_is_reproducible_across_threads():
    """Test the paired check gives identical numbers for one and three threads"""
    cfg = small_config(T=0.005)
    phi = CovarianceOperator.power_law(cfg.grid, amplitude=0.2)
    spec = EnsembleSpec(base=cfg, n_traj=6, batch_size=2, master_seed=9)
    one = mass_ito_check(spec, phi)
    three = mass_ito_check(spec, phi, threads=3)
    assert one.estimate == three.estimate
    assert one.details["biases"] == three.details["biases"]

def test_hamiltonian_ito_matches_drift():
    """Test E H(u(T)) - H(u0) matches the integrated Ito drift within the band"""
    cfg = small_config(T=0.01)
    phi = CovarianceOperator.power_law(cfg.grid, amplitude=0.2)
    verdict = hamiltonian_ito_check(EnsembleSpec(base=cfg, n_traj=200, master_seed=11), phi)
    assert verdict.check == "hamiltonian_ito"
    assert verdict.target > 0
    assert verdict.se > 0
    assert verdict.details["dt"] == pytest.approx(cfg.dt / 2)
    assert verdict.details["n_blowup"] == 0
    assert verdict.passed

def test_hamiltonian_ito_zero_noise():
    """Test without noise the drift vanishes and H is conserved up to the scheme error"""
    cfg = small_config(T=0.01)
    verdict = hamiltonian_ito_check(EnsembleSpec(base=cfg, n_traj=2), CovarianceOperator.zero(cfg.grid))
    assert verdict.target == 0.0
    assert verdict.se == 0.0
    assert verdict.estimate == pytest.approx(0.0, abs=1e-6)
    assert verdict.passed

def test_moment_balance_rejects_order():
    """Test only q in (1, 2, 3) is supported"""
    cfg = small_config()
    with pytest.raises(ExperimentError, match="q must be"):
        moment_balance_check(EnsembleSpec(base=cfg, n_traj=2), CovarianceOperator.zero(cfg.grid), q=4)

def test_moment_balance_needs_three_times():
    """Test a run saving only t = 0 and T is refused"""
    cfg = small_config(T=0.002, save_every=2)
    with pytest.raises(ExperimentError, match="three saved times"):
        moment_balance_check(EnsembleSpec(base=cfg, n_traj=2), CovarianceOperator.zero(cfg.grid), q=1)

@pytest.mark.slow
def test_moment_balance_linear_flow():
    """Test d/dt E||u||^2 matches the drift for the linear stochastic flow"""
    cfg = small_config(nonlinear=False, T=0.2, dt=0.01, save_every=5)
    phi = CovarianceOperator.power_law(cfg.grid, amplitude=0.5)
    verdict = moment_balance_check(EnsembleSpec(base=cfg, n_traj=1000, master_seed=9), phi, q=1)
    assert len(verdict.details["times"]) == 3
    assert abs(verdict.estimate - verdict.target) <= 5 * verdict.se

# Deterministic Study Tests
def test_conservation_study_rows():
    """Test one row per dt, coarse to fine, with small mass drift"""
    study = deterministic_conservation_study(small_config(), [2e-3, 1e-3])
    assert [row.dt for row in study.rows] == [2e-3, 1e-3]
    assert len(study.mass_orders) == 1
    assert study.rows[-1].mass_drift <= 1e-8
    assert "pass" in study.to_report()

def test_conservation_study_needs_dt():
    """Test an empty dt list is refused"""
    with pytest.raises(ExperimentError):
        deterministic_conservation_study(small_config(), [])

def test_conservation_study_records_blowup():
    """Test a blow-up becomes a row instead of an exception"""
    study = deterministic_conservation_study(small_config(blowup_threshold=1e-3), [1e-3])
    assert study.rows[0].blowup_time == pytest.approx(1e-3)
    assert not study.passed

def test_soliton_transport_needs_soliton():
    """Test transport checks refuse Gaussian data"""
    with pytest.raises(ExperimentError, match="soliton"):
        soliton_transport_check(small_config())

@pytest.mark.slow
def test_soliton_transport_mkdv():
    """Test the mKdV soliton is transported at speed c"""
    cfg = SimConfig(k=2, n=512, L=100.0, dt=1e-3, T=0.5, initial=InitialDataConfig(kind="soliton", speed=1.0))
    report = soliton_transport_check(cfg, error_tol=1e-3)
    assert report.residual <= 1e-8
    assert report.passed
