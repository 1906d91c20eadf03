"""gkdv-lab command line: simulations, ensembles and Monte Carlo checks.

Exit status 0 on success or PASS, 1 on a FAIL verdict or a run that blew up,
2 on usage errors (bad flags, invalid configuration).
"""
import functools
import math
import time
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional

import click
import pandas as pd
from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.table import Table

from gkdvlab import __version__
from gkdvlab.cli.config import ConfigError, RunConfig, config_hash, parse_config
from gkdvlab.dynamics.initial_data import InvalidInitialDataError, UnknownInitialDataError, initial_field
from gkdvlab.dynamics.integrators import BlowUpError, Trajectory, integrate
from gkdvlab.dynamics.nonlinear import DealiasingError
from gkdvlab.experiments import (
    EnsembleSpec,
    ExperimentError,
    InsufficientHorizonsError,
    convolution_step_independence_check,
    convolution_variance_check,
    deterministic_conservation_study,
    hamiltonian_ito_check,
    lemma_scaling_study,
    mass_ito_check,
    moment_balance_check,
    picard_contraction_study,
    run_ensemble,
    soliton_transport_check,
)
from gkdvlab.noise.covariance import InvalidProfileError
from gkdvlab.observables.existence import extended_radius, extended_time, local_radius, local_time
from gkdvlab.observables.mixed_norms import xk_norm
from gkdvlab.observables.registry import ObservableContext, default_registry
from gkdvlab.observables.trajectory import UnknownObservableError
from gkdvlab.storage.artifact_store import ArtifactExistsError, ArtifactStore, ArtifactStoreError
from gkdvlab.utils.logging import configure_logging, get_logger

# Load environment variables from .env file
load_dotenv()

logger = get_logger(__name__)
console = Console()

class RunManifest(BaseModel):
    """Everything needed to repeat a run; wall-clock fields are the only non-reproducible bytes"""
    artifact_version: str
    command: str
    config_hash: str
    master_seed: int
    grid: Dict[str, float]
    noise: Dict[str, Any]
    scheme: Dict[str, Any]
    started_at: str
    wall_clock_seconds: float
    blowup_census: Optional[Dict[str, Any]] = None
    inventory: Dict[str, str]
    config: Dict[str, Any]

class RunContext:
    """Resolved configuration and output settings shared by the subcommands"""

    def __init__(self, config: RunConfig, out: Optional[str], threads: int, overwrite: bool):
        self.config = config
        self.out = out
        self.threads = threads
        self.overwrite = overwrite
        self.started_at = datetime.now(timezone.utc)
        self.clock = time.perf_counter()
        self._store: Optional[ArtifactStore] = None

    @property
    def store(self) -> ArtifactStore:
        if self._store is None:
            self._store = ArtifactStore(base_path=self.out, overwrite=self.overwrite)
        return self._store

    def ensemble_spec(self) -> EnsembleSpec:
        experiment = self.config.experiment
        try:
            return EnsembleSpec(
                base=self.config.sim,
                n_traj=experiment.n_traj,
                observables=experiment.observables,
                master_seed=self.config.simulation.seed,
                batch_size=experiment.batch_size
            )
        except ValidationError as e:
            first = e.errors()[0]
            raise click.UsageError(f"experiment.{'.'.join(str(p) for p in first['loc'])}: {first['msg']}")

    def manifest(self, command: str, census: Optional[Dict[str, Any]] = None) -> RunManifest:
        config = self.config
        sim = config.sim
        phi = config.phi()
        return RunManifest(
            artifact_version=__version__,
            command=command,
            config_hash=config_hash(config),
            master_seed=sim.seed,
            grid={"n": sim.n, "L": sim.L, "dx": sim.grid.dx},
            noise={**config.noise.model_dump(mode="json"), "hs_norm_L2": phi.hs_norm(0.0)},
            scheme={"scheme": sim.scheme, "dt": sim.dt, "T": sim.T, "n_steps": sim.n_steps,
                    "pad_factor": sim.pad_factor, "nonlinear": sim.nonlinear},
            started_at=self.started_at.isoformat(),
            wall_clock_seconds=time.perf_counter() - self.clock,
            blowup_census=census,
            inventory=self.store.inventory(),
            config=config.echo()
        )

def _print_summary(command: str, rows: Dict[str, Any], passed: bool) -> None:
    table = Table(title=f"gkdv-lab {command}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value")
    for name, value in rows.items():
        table.add_row(name, f"{value:.6g}" if isinstance(value, float) else str(value))
    console.print(table)
    console.print("[green]PASS[/green]" if passed else "[red]FAIL[/red]")

def _finish(
    ctx: click.Context,
    command: str,
    passed: bool,
    rows: Dict[str, Any],
    census: Optional[Dict[str, Any]] = None
) -> None:
    run: RunContext = ctx.obj
    manifest = run.manifest(command, census)
    run.store.write_json(ArtifactStore.MANIFEST_NAME, manifest.model_dump(mode="json"))
    _print_summary(command, {**rows, "output": str(run.store.base_path)}, passed)
    ctx.exit(0 if passed else 1)

INPUT_ERRORS = (
    ConfigError,
    ValidationError,
    UnknownObservableError,
    UnknownInitialDataError,
    InvalidInitialDataError,
    DealiasingError,
    InvalidProfileError,
    InsufficientHorizonsError,
)

def run_command(fn: Callable) -> Callable:
    """Map errors onto exit codes: invalid input is a usage error (2), anything else fails the run (1)."""
    @functools.wraps(fn)
    @click.pass_context
    def wrapper(ctx: click.Context, *args, **kwargs):
        try:
            return fn(ctx, *args, **kwargs)
        except (click.exceptions.Exit, click.exceptions.Abort, click.ClickException):
            raise
        except ArtifactExistsError as e:
            raise click.UsageError(f"{e}; pass --overwrite or choose another --out")
        except INPUT_ERRORS as e:
            raise click.UsageError(str(e))
        except (ArtifactStoreError, ExperimentError) as e:
            logger.error(f"{ctx.info_name} failed: {e}")
            raise click.ClickException(str(e))
        except Exception as e:
            logger.exception(f"{ctx.info_name} crashed: {e}")
            raise click.ClickException(f"{type(e).__name__}: {e}")
    return wrapper

def _observable_frame(tr: Trajectory, keys: List[str], ctx: ObservableContext) -> pd.DataFrame:
    registry = default_registry()
    columns: Dict[str, Any] = {"t": tr.times}
    for key in keys:
        columns[registry.header(key)] = registry.evaluate(key, tr.coeffs, ctx)
    return pd.DataFrame(columns)

@click.group()
@click.option('--config', '-c', 'config_path', help='Path to config file (TOML, YAML or JSON)')
@click.option('--out', '-o', help='Output directory (default: $GKDV_OUTPUT_DIR or ./gkdv-runs)')
@click.option('--seed', type=click.IntRange(min=0), help='Master seed, overrides simulation.seed')
@click.option('--traj', type=click.IntRange(min=2), help='Number of trajectories, overrides experiment.n_traj')
@click.option('--threads', type=click.IntRange(min=1), default=1, show_default=True,
              help='Worker threads; affects speed only')
@click.option('--overwrite', is_flag=True, help='Replace files in an existing output directory')
@click.option('--verbose/--no-verbose', default=False, help='Enable debug logging')
@click.version_option(__version__, prog_name="gkdv-lab")
@click.pass_context
def cli(ctx, config_path, out, seed, traj, threads, overwrite, verbose):
    """Stochastic generalized KdV simulator and Monte Carlo laboratory"""
    if verbose:
        configure_logging("DEBUG", force=True)
    try:
        config = parse_config(config_path).with_overrides(seed=seed, n_traj=traj)
    except ConfigError as e:
        raise click.BadParameter(str(e), param_hint="--config")
    ctx.obj = RunContext(config, out, threads, overwrite)

@cli.command()
@run_command
def simulate(ctx):
    """Integrate one trajectory and write its observables and field snapshots"""
    run: RunContext = ctx.obj
    cfg = run.config.sim
    phi = run.config.phi()
    blowup_time = None
    try:
        tr = integrate(cfg, phi)
    except BlowUpError as e:
        blowup_time = e.time
        tr = e.trajectory
    obs_ctx = ObservableContext(grid=cfg.grid, phi=phi, k=cfg.k, mu=cfg.mu, pad_factor=cfg.pad_factor)
    if tr is not None:
        run.store.write_csv("trajectory.csv", _observable_frame(tr, run.config.experiment.observables, obs_ctx))
        run.store.write_snapshots("snapshots.sgkv", cfg.grid, tr.samples)
    census = {"n_traj": 1, "n_blowup": int(blowup_time is not None), "blowup_time": blowup_time}
    rows = {"snapshots": 0 if tr is None else len(tr), "final time": float(tr.times[-1]) if tr is not None else 0.0}
    if blowup_time is not None:
        rows["blow-up time"] = blowup_time
    _finish(ctx, "simulate", blowup_time is None, rows, census)

@cli.command()
@run_command
def ensemble(ctx):
    """Run the Monte Carlo ensemble and write reduced and per-trajectory tables"""
    run: RunContext = ctx.obj
    result = run_ensemble(run.ensemble_spec(), run.config.phi(), threads=run.threads)
    run.store.write_csv("ensemble.csv", result.reduced_table())
    width = len(str(result.n_traj - 1))
    for i in range(result.n_traj):
        run.store.write_csv(f"trajectories/{i:0{width}d}.csv", result.trajectory_table(i))
    census = result.census()
    rows = {"trajectories": result.n_traj, "blow-up fraction": result.blowup_fraction}
    for key in result.spec.observables:
        rows[f"{key} mean at T"] = float(result.mean(key)[-1])
    _finish(ctx, "ensemble", True, rows, census)

@cli.command("conv-check")
@run_command
def conv_check(ctx):
    """Variance identity and step independence of the exact stochastic convolution"""
    run: RunContext = ctx.obj
    experiment = run.config.experiment
    cfg = run.config.sim
    phi = run.config.phi()
    variance = convolution_variance_check(
        phi, experiment.sigmas, cfg.T, experiment.conv_steps, experiment.n_traj,
        master_seed=cfg.seed, batch_size=experiment.batch_size, threads=run.threads
    )
    independence = convolution_step_independence_check(
        phi, experiment.sigmas[0], cfg.T, experiment.n_traj, steps=experiment.step_pair,
        master_seed=cfg.seed, batch_size=experiment.batch_size, threads=run.threads
    )
    passed = variance.passed and independence.passed
    run.store.write_json("conv_check.json", {
        "check": "conv_check",
        "pass": passed,
        "variance": variance.to_report(),
        "step_independence": independence.to_report(),
    })
    rows = {v.check: f"{v.estimate:.6g} vs {v.target:.6g} (se {v.se:.2g})" for v in variance.verdicts}
    rows[independence.check] = "pass" if independence.passed else "fail"
    _finish(ctx, "conv-check", passed, rows)

def _ito_command(ctx: click.Context, command: str, name: str, check: Callable, *args) -> None:
    run: RunContext = ctx.obj
    verdict = check(run.ensemble_spec(), run.config.phi(), *args, threads=run.threads)
    run.store.write_json(f"{name}.json", verdict.to_report())
    rows = {"estimate": verdict.estimate, "target": verdict.target, "se": verdict.se, "bias": verdict.bias_estimate}
    census = {k: v for k, v in verdict.details.items() if k.startswith("n_") or k.startswith("blowup")} or None
    _finish(ctx, command, verdict.passed, rows, census)

@cli.command("mass-check")
@run_command
def mass_check(ctx):
    """Ito identity for the mass: E||u(T)||^2 - ||u0||^2 = T ||Phi||^2"""
    _ito_command(ctx, "mass-check", "mass_check", mass_ito_check)

@cli.command("ham-check")
@run_command
def ham_check(ctx):
    """Ito identity for the Hamiltonian against the integrated drift"""
    _ito_command(ctx, "ham-check", "ham_check", hamiltonian_ito_check)

@cli.command("moment-check")
@run_command
def moment_check(ctx):
    """Moment balance d/dt E||u||^(2q) against the expected drift"""
    run: RunContext = ctx.obj
    _ito_command(ctx, "moment-check", "moment_check", moment_balance_check, run.config.experiment.q)

@cli.command()
@run_command
def scaling(ctx):
    """Log-log scaling of a noise-convolution quantity over the configured horizons"""
    run: RunContext = ctx.obj
    experiment = run.config.experiment
    study = lemma_scaling_study(
        experiment.scaling, run.config.phi(), experiment.horizons, experiment.n_traj,
        dt=experiment.scaling_dt, master_seed=run.config.simulation.seed, consts=run.config.existence,
        batch_size=experiment.batch_size, threads=run.threads
    )
    table = pd.DataFrame({"T": study.horizons, f"{study.quantity}_mean": study.means, f"{study.quantity}_se": study.ses})
    if study.envelope_ratios is not None:
        table["envelope_ratio"] = study.envelope_ratios
    run.store.write_csv("scaling.csv", table)
    run.store.write_json("scaling.json", study.to_report())
    rows = {"quantity": study.quantity, "slope": study.slope, "slope CI": f"[{study.slope_ci[0]:.4g}, {study.slope_ci[1]:.4g}]"}
    if study.expected_slope is not None:
        rows["expected slope"] = study.expected_slope
    if study.ratio_spread is not None:
        rows["envelope ratio spread"] = study.ratio_spread
    _finish(ctx, "scaling", study.passed, rows)

@cli.command()
@run_command
def picard(ctx):
    """Picard contraction on sampled noise paths"""
    run: RunContext = ctx.obj
    experiment = run.config.experiment
    cfg = run.config.sim
    study = picard_contraction_study(
        cfg, run.config.phi(), experiment.n_traj, consts=run.config.existence, master_seed=cfg.seed,
        tol=experiment.picard_tol, max_iter=experiment.picard_max_iter,
        ratio_threshold=experiment.ratio_threshold, min_fraction=experiment.min_fraction,
        use_local_time=experiment.use_local_time, batch_size=experiment.batch_size, threads=run.threads
    )
    run.store.write_json("picard.json", study.to_report())
    rows = {"trajectories": len(study.rows), "contraction fraction": study.contraction_fraction}
    if study.median_mismatch_ratio is not None:
        rows["median mismatch ratio"] = study.median_mismatch_ratio
    _finish(ctx, "picard", study.passed, rows)

@cli.command()
@run_command
def norms(ctx):
    """X_k norms of u and of the stochastic convolution, with the local and extended radius and time"""
    run: RunContext = ctx.obj
    cfg = run.config.sim
    consts = run.config.existence
    u0 = initial_field(cfg)
    try:
        tr = integrate(cfg, run.config.phi(), u0=u0, track_convolution=True)
    except BlowUpError as e:
        run.store.write_json("norms.json", {"blowup_time": e.time, "pass": False})
        _finish(ctx, "norms", False, {"blow-up time": e.time}, {"n_traj": 1, "n_blowup": 1, "blowup_time": e.time})
    u_view, v_view = tr.view(), tr.convolution_view()
    u_norm = xk_norm(u_view, cfg.k, consts)
    v_norm = xk_norm(v_view, cfg.k, consts)
    radius = local_radius(u0, v_view, cfg.k, consts)
    radius_ext = extended_radius(u0, u_view, v_view, cfg.k, consts)
    report = {
        "k": cfg.k,
        "u": u_norm.model_dump(mode="json"),
        "v": v_norm.model_dump(mode="json"),
        "local_radius": radius,
        "local_time": local_time(radius, cfg.k, consts) if radius > 0 else math.inf,
        "extended_radius": radius_ext,
        "extended_time": extended_time(u0, u_view, v_view, cfg.k, consts) if radius_ext > 0 else math.inf,
        "constants": consts.model_dump(mode="json"),
        "lattice_note": "sup taken over the time lattice; a lower estimate of the continuous sup",
        "pass": True,
    }
    run.store.write_json("norms.json", report)
    rows = {"||u||_X": u_norm.value, "||v||_X": v_norm.value, "R": radius, "T_local": report["local_time"],
            "R extended": radius_ext, "T extended": report["extended_time"]}
    _finish(ctx, "norms", True, rows, {"n_traj": 1, "n_blowup": 0})

@cli.command()
@run_command
def conservation(ctx):
    """Noise-free mass and Hamiltonian drift under dt refinement; soliton transport for soliton data"""
    run: RunContext = ctx.obj
    cfg = run.config.sim
    study = deterministic_conservation_study(cfg, run.config.experiment.dts)
    run.store.write_csv("conservation.csv", pd.DataFrame([row.model_dump() for row in study.rows]))
    run.store.write_json("conservation.json", study.to_report())
    passed = study.passed
    rows: Dict[str, Any] = {f"dt={row.dt:g}": f"mass {row.mass_drift:.3e}, H {row.hamiltonian_drift:.3e}" for row in study.rows}
    if cfg.initial.kind == "soliton":
        soliton = soliton_transport_check(cfg)
        run.store.write_json("soliton.json", soliton.to_report())
        rows["soliton L2 error"] = soliton.l2_error
        passed = passed and soliton.passed
    blown = [row.dt for row in study.rows if row.blowup_time is not None]
    census = {"n_runs": len(study.rows), "n_blowup": len(blown), "blowup_dts": blown}
    _finish(ctx, "conservation", passed, rows, census)

def main():
    """Entry point for the gkdv-lab console script"""
    cli()

if __name__ == "__main__":
    main()
