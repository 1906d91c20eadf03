"""Monte Carlo checks of the variance and Ito identities, and deterministic conservation studies.

Every verdict uses a 3 standard error band, widened by the discretization bias
estimate where the identity is checked through a time-stepping scheme.
"""
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from gkdvlab.dynamics.config import SimConfig
from gkdvlab.dynamics.initial_data import exact_soliton, initial_field, soliton_residual
from gkdvlab.dynamics.integrators import BlowUpError, NoisePath, integrate
from gkdvlab.experiments.ensemble import EnsembleResult, EnsembleSpec, final_increments, integrated, map_chunks, run_ensemble
from gkdvlab.experiments.stats import combined_se, standard_error, summarize
from gkdvlab.experiments.verdict import SE_BAND, CheckReport, ExperimentError, Verdict, within_band
from gkdvlab.noise.covariance import CovarianceOperator
from gkdvlab.noise.rng import RngStream, make_streams
from gkdvlab.noise.sampling import convolution_batch
from gkdvlab.observables.conserved import hamiltonian, mass
from gkdvlab.spectral.grid import Field
from gkdvlab.spectral.norms import sobolev_norm_sq_coeffs
from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

MASS_LEVELS = 3

def _log_verdict(verdict: Verdict) -> Verdict:
    status = "PASS" if verdict.passed else "FAIL"
    logger.info(
        f"{verdict.check}: {status} estimate={verdict.estimate:.6g} target={verdict.target:.6g} "
        f"se={verdict.se:.3g} bias={verdict.bias_estimate:.3g}"
    )
    return verdict

def _final_convolutions(
    phi: CovarianceOperator,
    T: float,
    n_steps: int,
    n_traj: int,
    master_seed: int,
    first_stream: int = 0,
    batch_size: int = 256,
    threads: int = 1
) -> np.ndarray:
    """Coefficients of v(T), one row per stream first_stream .. first_stream + n_traj - 1"""
    def chunk(ids: List[int]) -> np.ndarray:
        return convolution_batch(phi, T, n_steps, make_streams(master_seed, [first_stream + i for i in ids]))

    return np.concatenate(map_chunks(chunk, n_traj, batch_size, threads))

# Stochastic convolution
def convolution_variance_check(
    phi: CovarianceOperator,
    sigmas: Sequence[float],
    T: float,
    n_steps: int,
    n_traj: int,
    master_seed: int = 0,
    batch_size: int = 256,
    threads: int = 1
) -> CheckReport:
    """E ||v(T)||^2_{H^sigma} = T ||Phi||^2_{L2^{0,sigma}} for every sigma.

    Uses the exact sampler, so the only error is Monte Carlo error.
    """
    if not all(math.isfinite(s) for s in sigmas):
        raise ExperimentError(f"Sobolev indices must be finite, got {list(sigmas)}")
    v = _final_convolutions(phi, T, n_steps, n_traj, master_seed, batch_size=batch_size, threads=threads)
    verdicts = []
    for sigma in sigmas:
        summary = summarize(sobolev_norm_sq_coeffs(v, phi.grid, sigma), shape=True)
        target = T * phi.hs_norm(sigma) ** 2
        se = 0.0 if math.isnan(summary.se) else summary.se
        verdicts.append(_log_verdict(Verdict(
            check=f"convolution_variance[sigma={sigma:g}]",
            target=target,
            estimate=summary.mean,
            se=se,
            passed=within_band(summary.mean, target, se),
            details={
                "sigma": sigma,
                "ci_low": summary.ci_low,
                "ci_high": summary.ci_high,
                "skewness": summary.skewness,
                "excess_kurtosis": summary.excess_kurtosis,
            }
        )))
    return CheckReport(
        check="convolution_variance",
        verdicts=verdicts,
        details={"T": T, "n_steps": n_steps, "n_traj": n_traj, "master_seed": master_seed}
    )

def convolution_step_independence_check(
    phi: CovarianceOperator,
    sigma: float,
    T: float,
    n_traj: int,
    steps: Sequence[int] = (1, 64),
    master_seed: int = 0,
    batch_size: int = 256,
    threads: int = 1
) -> Verdict:
    """The law of v(T) does not depend on the step count of the exact sampler.

    The two runs use disjoint stream ranges, so they are independent samples.
    """
    if len(steps) != 2:
        raise ExperimentError(f"Need exactly two step counts, got {list(steps)}")
    summaries = []
    for j, n_steps in enumerate(steps):
        v = _final_convolutions(phi, T, n_steps, n_traj, master_seed, j * n_traj, batch_size, threads)
        summaries.append(summarize(sobolev_norm_sq_coeffs(v, phi.grid, sigma)))
    coarse, fine = summaries
    se = combined_se(*(0.0 if math.isnan(s.se) else s.se for s in summaries))
    return _log_verdict(Verdict(
        check=f"convolution_step_independence[sigma={sigma:g}]",
        target=coarse.mean,
        estimate=fine.mean,
        se=se,
        passed=within_band(fine.mean, coarse.mean, se),
        details={"steps": list(steps), "means": [s.mean for s in summaries], "ses": [s.se for s in summaries]}
    ))

# Ito identities through the integrators
def _ensemble_pair(spec: EnsembleSpec, phi: CovarianceOperator, u0: Optional[Field], threads: int, halve: bool):
    """(run at dt/2, run at dt) when halving, else (run at dt, None)"""
    if not halve:
        return run_ensemble(spec, phi, u0, threads), None
    fine = run_ensemble(spec.model_copy(update={"base": spec.base.with_dt(spec.base.dt / 2)}), phi, u0, threads)
    return fine, run_ensemble(spec, phi, u0, threads)

def _mean_se(x: np.ndarray):
    if x.size == 0:
        raise ExperimentError("Every trajectory blew up; nothing to average")
    se = float(standard_error(x)) if x.size >= 2 else 0.0
    return float(np.mean(x)), 0.0 if math.isnan(se) else se

def _mass_increments_by_level(
    cfg: SimConfig,
    phi: CovarianceOperator,
    u0: Field,
    master_seed: int,
    ids: List[int],
    levels: int
) -> np.ndarray:
    """||u(T)||^2 - ||u0||^2 at dt, dt/2, .. dt/2^(levels-1), all driven by one Brownian path per stream.

    Rows of a stream that blew up at any level are NaN.
    """
    n_steps = cfg.n_steps
    horizon = n_steps * cfg.dt
    finest = 2 ** (levels - 1)
    m0 = mass(u0)
    out = np.full((len(ids), levels), np.nan)
    for row, stream in enumerate(ids):
        path = NoisePath.sample(phi, cfg.dt / finest, finest * n_steps, RngStream(master_seed, stream))
        paths = [path]
        for _ in range(levels - 1):
            paths.insert(0, paths[0].coarsen())
        try:
            for level, level_path in enumerate(paths):
                run = cfg.model_copy(update={"T": horizon, "dt": level_path.dt, "save_every": level_path.n_steps})
                out[row, level] = mass(integrate(run, phi, u0=u0, noise_path=level_path).final_state.u) - m0
        except BlowUpError:
            out[row] = np.nan
    return out

def mass_ito_check(
    spec: EnsembleSpec,
    phi: CovarianceOperator,
    u0: Optional[Field] = None,
    threads: int = 1
) -> Verdict:
    """E ||u(T)||^2 - ||u0||^2 = T ||Phi||^2_{L2^{0,0}}.

    With the nonlinearity on, every trajectory is run at dt, dt/2 and dt/4 on
    one Brownian path (sampled at dt/4 and coarsened). The estimate is the dt/4
    mean; the paired mean gaps between consecutive levels are the bias at dt
    and at dt/2, and the dt/2 gap bounds the bias at dt/4. The check also needs
    the bias to shrink at least twofold from dt to dt/2, up to 3 SE of the gap.
    With the nonlinearity off the flow is unitary, so a single run at dt
    satisfies the identity exactly in distribution and no bias is added.
    """
    spec = spec.model_copy(update={"observables": ["mass"]})
    if not spec.base.nonlinear:
        result = run_ensemble(spec, phi, u0, threads)
        horizon = float(result.times[-1])
        target = horizon * phi.hs_norm(0.0) ** 2
        estimate, se = _mean_se(final_increments(result, "mass"))
        return _log_verdict(Verdict(
            check="mass_ito",
            target=target,
            estimate=estimate,
            se=se,
            passed=within_band(estimate, target, se),
            details={"T": horizon, "dt": spec.base.dt, **result.census()}
        ))

    cfg = spec.base
    u0 = initial_field(cfg) if u0 is None else u0
    u0.grid.require_same(cfg.grid)
    dts = [cfg.dt / 2 ** level for level in range(MASS_LEVELS)]
    logger.info(f"Mass Ito check: {spec.n_traj} paths at dt = {', '.join(f'{dt:g}' for dt in dts)}")
    increments = np.concatenate(map_chunks(
        lambda ids: _mass_increments_by_level(cfg, phi, u0, spec.master_seed, ids, MASS_LEVELS),
        spec.n_traj, spec.batch_size, threads
    ))
    alive = np.all(np.isfinite(increments), axis=1)
    blown = np.flatnonzero(~alive)
    if blown.size:
        logger.warning(f"{blown.size} of {spec.n_traj} trajectories blew up at some step size")
    survivors = increments[alive]

    horizon = cfg.n_steps * cfg.dt
    target = horizon * phi.hs_norm(0.0) ** 2
    estimate, se = _mean_se(survivors[:, -1])
    gaps = [_mean_se(survivors[:, j] - survivors[:, j + 1]) for j in range(MASS_LEVELS - 1)]
    (bias_coarse, _), (bias_half, se_half) = gaps[0], gaps[-1]
    bias_ratio = abs(bias_coarse) / abs(bias_half) if bias_half else math.inf
    bias_shrinks = abs(bias_half) <= 0.5 * abs(bias_coarse) + SE_BAND * se_half
    return _log_verdict(Verdict(
        check="mass_ito",
        target=target,
        estimate=estimate,
        se=se,
        bias_estimate=abs(bias_half),
        passed=within_band(estimate, target, se, bias_half) and bias_shrinks,
        details={
            "T": horizon,
            "dt": dts[-1],
            "dts": dts,
            "level_means": [float(m) for m in np.mean(survivors, axis=0)],
            "biases": [bias_coarse, bias_half, abs(bias_half)],
            "bias_ses": [s for _, s in gaps],
            "bias_ratio": bias_ratio,
            "bias_shrinks": bool(bias_shrinks),
            "n_traj": spec.n_traj,
            "n_blowup": int(blown.size),
            "blowup_fraction": float(blown.size / spec.n_traj),
            "blowup_streams": [int(i) for i in blown],
        }
    ))

def hamiltonian_ito_check(
    spec: EnsembleSpec,
    phi: CovarianceOperator,
    u0: Optional[Field] = None,
    threads: int = 1
) -> Verdict:
    """E H(u(T)) - H(u0) = E int_0^T (Ito drift of H)(u(t)) dt.

    The drift integral uses the trapezoid rule over the saved snapshots; the
    comparison is paired per trajectory.
    """
    spec = spec.model_copy(update={"observables": ["hamiltonian", "hamiltonian_ito_drift"]})
    fine, coarse = _ensemble_pair(spec, phi, u0, threads, halve=True)

    def residuals(result: EnsembleResult) -> np.ndarray:
        return final_increments(result, "hamiltonian") - integrated(result, "hamiltonian_ito_drift")

    residual, se = _mean_se(residuals(fine))
    target = float(np.mean(integrated(fine, "hamiltonian_ito_drift")))
    bias = residual - float(np.mean(residuals(coarse)))
    return _log_verdict(Verdict(
        check="hamiltonian_ito",
        target=target,
        estimate=target + residual,
        se=se,
        bias_estimate=bias,
        passed=within_band(residual, 0.0, se, bias),
        details={"T": float(fine.times[-1]), "dt": fine.spec.base.dt, **fine.census()}
    ))

def moment_balance_check(
    spec: EnsembleSpec,
    phi: CovarianceOperator,
    q: int,
    u0: Optional[Field] = None,
    threads: int = 1
) -> Verdict:
    """d/dt E ||u||^(2q) against E (drift of ||u||^(2q)) at every interior snapshot.

    The derivative is a centred difference of the ensemble mean. Passing needs
    agreement within 3 combined standard errors at every sampled time.
    """
    if q not in (1, 2, 3):
        raise ExperimentError(f"Moment order q must be 1, 2 or 3, got {q}")
    moment, drift = f"mass_moment:{q}", f"mass_moment_drift:{q}"
    spec = spec.model_copy(update={"observables": [moment, drift]})
    result = run_ensemble(spec, phi, u0, threads)
    t = result.times
    if t.size < 3:
        raise ExperimentError("Moment balance needs at least three saved times; lower save_every")
    values = result.values[moment][result.survivors]
    drifts = result.values[drift][result.survivors]
    span = t[2:] - t[:-2]
    difference = (values[:, 2:] - values[:, :-2]) / span
    fd_mean, fd_se = np.mean(difference, axis=0), np.nan_to_num(standard_error(difference))
    drift_mean = np.mean(drifts[:, 1:-1], axis=0)
    drift_se = np.nan_to_num(standard_error(drifts[:, 1:-1]))
    band = np.sqrt(fd_se ** 2 + drift_se ** 2)
    ok = [within_band(a, b, s) for a, b, s in zip(fd_mean, drift_mean, band)]
    worst = int(np.argmax(np.abs(fd_mean - drift_mean) - 3.0 * band))
    return _log_verdict(Verdict(
        check=f"moment_balance[q={q}]",
        target=float(drift_mean[worst]),
        estimate=float(fd_mean[worst]),
        se=float(band[worst]),
        passed=all(ok),
        details={
            "times": t[1:-1].tolist(),
            "fd_mean": fd_mean.tolist(),
            "drift_mean": drift_mean.tolist(),
            "combined_se": band.tolist(),
            "worst_time": float(t[1 + worst]),
            **result.census()
        }
    ))

# Deterministic studies
class ConservationRow(BaseModel):
    dt: float
    mass_drift: float
    hamiltonian_drift: float
    blowup_time: Optional[float] = None

class ConservationStudy(BaseModel):
    """Relative drifts of mass and Hamiltonian under dt refinement (Phi = 0)"""
    rows: List[ConservationRow]
    mass_orders: List[float]
    hamiltonian_orders: List[float]
    mass_tol: float
    hamiltonian_tol: float

    @property
    def passed(self) -> bool:
        finest = self.rows[-1]
        return finest.blowup_time is None and finest.mass_drift <= self.mass_tol and finest.hamiltonian_drift <= self.hamiltonian_tol

    def to_report(self) -> Dict:
        return {**self.model_dump(mode="json"), "pass": self.passed}

def _orders(dts: Sequence[float], drifts: Sequence[float]) -> List[float]:
    out = []
    for (h1, e1), (h2, e2) in zip(zip(dts, drifts), zip(dts[1:], drifts[1:])):
        out.append(math.log(e1 / e2) / math.log(h1 / h2) if e1 > 0 and e2 > 0 else float("nan"))
    return out

def deterministic_conservation_study(
    cfg: SimConfig,
    dts: Sequence[float],
    u0: Optional[Field] = None,
    mass_tol: float = 1e-8,
    hamiltonian_tol: float = 1e-6
) -> ConservationStudy:
    """Integrate without noise at each dt (coarse to fine) and measure relative drifts at T."""
    if len(dts) < 1:
        raise ExperimentError("Need at least one step size")
    phi = CovarianceOperator.zero(cfg.grid)
    u0 = initial_field(cfg) if u0 is None else u0
    m0 = mass(u0)
    h0 = hamiltonian(u0, cfg.k, cfg.mu, cfg.pad_factor)
    rows = []
    for dt in dts:
        run_cfg = cfg.with_dt(dt)
        try:
            final = integrate(run_cfg, phi, u0=u0).final_state.u
        except BlowUpError as e:
            rows.append(ConservationRow(dt=dt, mass_drift=float("nan"), hamiltonian_drift=float("nan"), blowup_time=e.time))
            continue
        rows.append(ConservationRow(
            dt=dt,
            mass_drift=abs(mass(final) - m0) / m0 if m0 > 0 else abs(mass(final)),
            hamiltonian_drift=abs(hamiltonian(final, cfg.k, cfg.mu, cfg.pad_factor) - h0) / max(abs(h0), 1e-300)
        ))
        logger.info(f"dt={dt:g}: mass drift {rows[-1].mass_drift:.3e}, Hamiltonian drift {rows[-1].hamiltonian_drift:.3e}")
    return ConservationStudy(
        rows=rows,
        mass_orders=_orders(list(dts), [r.mass_drift for r in rows]),
        hamiltonian_orders=_orders(list(dts), [r.hamiltonian_drift for r in rows]),
        mass_tol=mass_tol,
        hamiltonian_tol=hamiltonian_tol
    )

class SolitonTransportReport(BaseModel):
    residual: float
    l2_error: float
    speed: float
    horizon: float
    residual_tol: float
    error_tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.residual_tol and self.l2_error <= self.error_tol

    def to_report(self) -> Dict:
        return {**self.model_dump(mode="json"), "pass": self.passed}

def soliton_transport_check(cfg: SimConfig, residual_tol: float = 1e-8, error_tol: float = 1e-4) -> SolitonTransportReport:
    """Noise-free soliton run compared with the exactly transported profile."""
    if cfg.initial.kind != "soliton":
        raise ExperimentError(f"soliton_transport_check needs soliton initial data, got {cfg.initial.kind}")
    u0 = initial_field(cfg)
    c = cfg.initial.speed
    tr = integrate(cfg, CovarianceOperator.zero(cfg.grid), u0=u0)
    horizon = float(tr.times[-1])
    exact = exact_soliton(cfg.grid, cfg.k, c, cfg.initial.center, horizon)
    error = tr.final_state.u - exact
    report = SolitonTransportReport(
        residual=soliton_residual(u0, c, cfg.k),
        l2_error=float(np.sqrt(mass(error))),
        speed=c,
        horizon=horizon,
        residual_tol=residual_tol,
        error_tol=error_tol
    )
    logger.info(f"Soliton transport: residual {report.residual:.3e}, L2 error {report.l2_error:.3e}")
    return report
