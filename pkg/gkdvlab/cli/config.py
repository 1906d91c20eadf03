"""Run configuration files: TOML, YAML or JSON with simulation, initial, noise, existence and experiment sections"""
import hashlib
import json
try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field as ModelField, ValidationError, model_validator

from gkdvlab.dynamics.config import InitialDataConfig, SimConfig
from gkdvlab.experiments.scaling import ScalingQuantity
from gkdvlab.noise.covariance import CovarianceOperator, default_covariance
from gkdvlab.observables.constants import ExistenceConstants
from gkdvlab.spectral.grid import Grid
from gkdvlab.storage.artifact_store import dumps_json
from gkdvlab.utils.logging import get_logger

logger = get_logger(__name__)

CONFIG_SEARCH_PATHS = [
    Path("gkdv-lab.toml"),
    Path("gkdv-lab.yaml"),
    Path("~/.gkdv-lab/config.toml"),
]

class ConfigError(ValueError):
    """Raised for a missing, unreadable or invalid configuration; key_path is dotted"""

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        self.message = message
        super().__init__(f"{key_path}: {message}" if key_path else message)

NoiseKind = Literal["default", "zero", "power_law", "band_limited", "table"]

class NoiseConfig(BaseModel):
    """Noise profile.

    default: power law normalized to ||Phi||_{L2^{0,sigma_req}} = 1, scaled by amplitude.
    When normalize_sigma is set the built profile is rescaled so that its
    H^normalize_sigma Hilbert-Schmidt norm equals amplitude. truncate_modes
    keeps |m| <= truncate_modes, applied before normalization.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: NoiseKind = "default"
    amplitude: float = ModelField(default=1.0, ge=0)
    decay_r: float = 2.5
    cutoff: float = ModelField(default=1.0, gt=0)
    epsilon: float = ModelField(default=0.1, gt=0)
    normalize_sigma: Optional[float] = None
    table: Optional[List[float]] = None
    truncate_modes: Optional[int] = ModelField(default=None, ge=0)

    @model_validator(mode="after")
    def validate_table(self):
        if self.kind == "table" and not self.table:
            raise ValueError("table noise needs 'table'")
        return self

    def build(self, grid: Grid, k: int) -> CovarianceOperator:
        if self.kind == "zero":
            return CovarianceOperator.zero(grid)
        if self.kind == "default":
            phi = default_covariance(grid, k, self.epsilon, self.decay_r)
            if self.normalize_sigma is None:
                phi = phi.scaled(self.amplitude)
        elif self.kind == "power_law":
            phi = CovarianceOperator.power_law(grid, self.amplitude, self.decay_r)
        elif self.kind == "band_limited":
            phi = CovarianceOperator.band_limited(grid, self.amplitude, self.cutoff)
        else:
            phi = CovarianceOperator.from_table(grid, self.table)
        if self.truncate_modes is not None:
            phi = phi.truncate(self.truncate_modes)
        if self.normalize_sigma is not None:
            phi = phi.normalized(self.normalize_sigma).scaled(self.amplitude)
        return phi

class ExperimentConfig(BaseModel):
    """Ensemble and study parameters shared by the commands"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_traj: int = ModelField(default=200, ge=2)
    batch_size: int = ModelField(default=64, ge=1)
    observables: List[str] = ModelField(default_factory=lambda: ["mass", "hamiltonian"])
    sigmas: List[float] = ModelField(default_factory=lambda: [0.0, 0.25, 1.0])
    conv_steps: int = ModelField(default=64, ge=1)
    step_pair: List[int] = ModelField(default_factory=lambda: [1, 64], min_length=2, max_length=2)
    q: Literal[1, 2, 3] = 1
    horizons: List[float] = ModelField(default_factory=lambda: [0.25, 0.5, 1.0, 2.0])
    scaling: ScalingQuantity = ModelField(default_factory=ScalingQuantity)
    scaling_dt: float = ModelField(default=1.0 / 64.0, gt=0)
    dts: List[float] = ModelField(default_factory=lambda: [4e-3, 2e-3, 1e-3])
    picard_tol: float = ModelField(default=1e-10, gt=0)
    picard_max_iter: int = ModelField(default=50, ge=1)
    ratio_threshold: float = ModelField(default=0.9, gt=0)
    min_fraction: float = ModelField(default=0.95, ge=0, le=1)
    use_local_time: bool = True

class RunConfig(BaseModel):
    """A whole configuration file.

    `initial` may be given as its own section or inside `simulation`; the
    resolved SimConfig always carries the `initial` section.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    simulation: SimConfig = ModelField(default_factory=SimConfig)
    initial: InitialDataConfig = ModelField(default_factory=InitialDataConfig)
    noise: NoiseConfig = ModelField(default_factory=NoiseConfig)
    existence: ExistenceConstants = ModelField(default_factory=ExistenceConstants)
    experiment: ExperimentConfig = ModelField(default_factory=ExperimentConfig)

    @model_validator(mode="before")
    @classmethod
    def lift_initial(cls, data):
        if isinstance(data, dict) and isinstance(data.get("simulation"), dict) and "initial" in data["simulation"]:
            if "initial" in data:
                raise ValueError("initial data given both as a section and inside 'simulation'")
            data = dict(data)
            simulation = dict(data["simulation"])
            data["initial"] = simulation.pop("initial")
            data["simulation"] = simulation
        return data

    @property
    def sim(self) -> SimConfig:
        return self.simulation.model_copy(update={"initial": self.initial})

    def phi(self) -> CovarianceOperator:
        return self.noise.build(self.simulation.grid, self.simulation.k)

    def echo(self) -> Dict[str, Any]:
        """JSON-ready resolved configuration; initial data appears once, in its own section"""
        return self.model_dump(mode="json", exclude={"simulation": {"initial"}})

    def with_overrides(self, seed: Optional[int] = None, n_traj: Optional[int] = None) -> "RunConfig":
        """Command-line overrides of the master seed and trajectory count"""
        data = self.echo()
        if seed is not None:
            data["simulation"]["seed"] = seed
        if n_traj is not None:
            data["experiment"]["n_traj"] = n_traj
        return validate_config(data)

def _key_path(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error["loc"])

def validate_config(data: Dict[str, Any]) -> RunConfig:
    """RunConfig from a raw mapping.

    Raises:
        ConfigError: unknown key, wrong type or physically invalid value, with its dotted key path
    """
    try:
        return RunConfig.model_validate(data or {})
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(_key_path(first), first["msg"]) from e

def find_config() -> Optional[Path]:
    for candidate in CONFIG_SEARCH_PATHS:
        path = candidate.expanduser()
        if path.is_file():
            return path
    return None

def load_config_file(path: Path) -> Dict[str, Any]:
    """Raw mapping from a .toml, .yaml/.yml or .json file"""
    if not path.is_file():
        raise ConfigError("", f"Config file not found: {path}")
    suffix = path.suffix.lower()
    try:
        if suffix == ".toml":
            with open(path, "rb") as f:
                return tomllib.load(f)
        with open(path) as f:
            if suffix in (".yaml", ".yml"):
                return yaml.safe_load(f) or {}
            if suffix == ".json":
                return json.load(f)
    except (tomllib.TOMLDecodeError, yaml.YAMLError, json.JSONDecodeError) as e:
        raise ConfigError("", f"Cannot parse {path}: {e}") from e
    raise ConfigError("", f"Unsupported config format '{suffix}' (use .toml, .yaml or .json)")

def parse_config(path: Optional[str] = None) -> RunConfig:
    """Load, validate and echo a configuration.

    Without a path the default locations are searched; with none present the
    documented defaults are used.
    """
    source = Path(path).expanduser() if path else find_config()
    if source is None:
        logger.info("No config file found; using defaults")
        config = RunConfig()
    else:
        config = validate_config(load_config_file(source))
        logger.info(f"Loaded config from {source}")
    logger.info(f"Resolved configuration: {json.dumps(config.echo(), sort_keys=True)}")
    return config

def config_hash(config: RunConfig) -> str:
    """sha256 of the canonical JSON echo of the resolved configuration"""
    return hashlib.sha256(dumps_json(config.echo()).encode("utf-8")).hexdigest()
