import json
import math
from pathlib import Path
import pytest

from gkdvlab.cli.config import (
    ConfigError,
    NoiseConfig,
    RunConfig,
    config_hash,
    find_config,
    load_config_file,
    parse_config,
    validate_config,
)
from gkdvlab.noise.covariance import required_sigma
from gkdvlab.spectral import Grid

MINIMAL_TOML = """
[simulation]
k = 2
n = 64
L = 20.0
dt = 0.001
T = 0.01
"""

@pytest.fixture
def minimal_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(MINIMAL_TOML)
    return path

# Parsing Tests
def test_minimal_config_gets_defaults(minimal_file):
    """Test a minimal file resolves to the documented defaults"""
    config = parse_config(str(minimal_file))
    assert config.simulation.n == 64
    assert config.simulation.scheme == "strang"
    assert config.simulation.pad_factor == 2
    assert config.initial.kind == "gaussian"
    assert config.noise.kind == "default"
    assert config.experiment.n_traj == 200
    assert config.existence.c_k == 1.0

def test_dotted_keys(tmp_path):
    """Test TOML dotted keys fill the sections"""
    path = tmp_path / "dotted.toml"
    path.write_text('simulation.n = 32\nnoise.kind = "zero"\ninitial.kind = "soliton"\n')
    config = parse_config(str(path))
    assert config.simulation.n == 32
    assert config.noise.kind == "zero"
    assert config.sim.initial.kind == "soliton"

def test_yaml_and_json(tmp_path):
    """Test YAML and JSON files are read by suffix"""
    yaml_path = tmp_path / "run.yaml"
    yaml_path.write_text("simulation:\n  k: 3\nexperiment:\n  n_traj: 10\n")
    json_path = tmp_path / "run.json"
    json_path.write_text(json.dumps({"simulation": {"k": 3}, "experiment": {"n_traj": 10}}))
    assert parse_config(str(yaml_path)) == parse_config(str(json_path))
    assert parse_config(str(yaml_path)).simulation.pad_factor == 3

def test_initial_inside_simulation_is_lifted():
    """Test initial data may be nested in the simulation section"""
    config = validate_config({"simulation": {"n": 32, "initial": {"kind": "zero"}}})
    assert config.initial.kind == "zero"
    assert config.sim.initial.kind == "zero"

def test_initial_given_twice():
    """Test initial data in both places is rejected"""
    with pytest.raises(ConfigError):
        validate_config({"simulation": {"initial": {"kind": "zero"}}, "initial": {"kind": "zero"}})

# Validation Tests
def test_unknown_key_rejected():
    """Test unknown keys are reported with their dotted path"""
    with pytest.raises(ConfigError) as exc_info:
        validate_config({"simulation": {"typo": 1}})
    assert exc_info.value.key_path == "simulation.typo"

def test_unsupported_power_rejected():
    """Test k = 5 is rejected at simulation.k"""
    with pytest.raises(ConfigError) as exc_info:
        validate_config({"simulation": {"k": 5}})
    assert exc_info.value.key_path == "simulation.k"

@pytest.mark.parametrize("simulation", [{"dt": 0.0}, {"dt": -1e-3}, {"n": 63}])
def test_physically_invalid(simulation):
    """Test non-positive dt and odd n are rejected with an explanation"""
    with pytest.raises(ConfigError) as exc_info:
        validate_config({"simulation": simulation})
    assert exc_info.value.key_path.startswith("simulation")

def test_pad_factor_threshold_reported():
    """Test a pad factor below the dealiasing threshold names the threshold"""
    with pytest.raises(ConfigError) as exc_info:
        validate_config({"simulation": {"k": 3, "pad_factor": 2}})
    assert "2.5" in exc_info.value.message

def test_config_error_is_value_error():
    """Test ConfigError can be caught as ValueError"""
    with pytest.raises(ValueError):
        validate_config({"experiment": {"n_traj": 1}})

# File Tests
def test_missing_file(tmp_path):
    """Test a missing file raises ConfigError"""
    with pytest.raises(ConfigError):
        parse_config(str(tmp_path / "missing.toml"))

def test_unsupported_suffix(tmp_path):
    """Test unknown file types are refused"""
    path = tmp_path / "run.ini"
    path.write_text("[simulation]\n")
    with pytest.raises(ConfigError):
        load_config_file(path)

def test_unparsable_file(tmp_path):
    """Test syntax errors surface as ConfigError"""
    path = tmp_path / "bad.toml"
    path.write_text("simulation = [\n")
    with pytest.raises(ConfigError):
        load_config_file(path)

def test_search_path(tmp_path, monkeypatch):
    """Test ./gkdv-lab.toml is found without --config"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("HOME", str(tmp_path / "home"))
    assert find_config() is None
    assert parse_config() == RunConfig()
    (tmp_path / "gkdv-lab.toml").write_text(MINIMAL_TOML)
    assert find_config().name == "gkdv-lab.toml"
    assert parse_config().simulation.n == 64

# Hash and Override Tests
def test_hash_is_stable(minimal_file):
    """Test the same file always hashes the same and a seed change alters it"""
    a = parse_config(str(minimal_file))
    b = parse_config(str(minimal_file))
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(a.with_overrides(seed=7))

def test_overrides(minimal_file):
    """Test seed and trajectory overrides keep everything else"""
    config = parse_config(str(minimal_file)).with_overrides(seed=11, n_traj=5)
    assert config.simulation.seed == 11
    assert config.experiment.n_traj == 5
    assert config.simulation.n == 64
    assert config.with_overrides() == config

def test_echo_lists_initial_once(minimal_file):
    """Test the echo carries initial data only in its own section"""
    echo = parse_config(str(minimal_file)).echo()
    assert "initial" in echo
    assert "initial" not in echo["simulation"]

# Noise Tests
def test_default_noise_normalized():
    """Test the default profile has the required HS norm times amplitude"""
    grid = Grid(n=64, length=20.0)
    phi = NoiseConfig(amplitude=0.5).build(grid, 2)
    assert phi.hs_norm(required_sigma(2)) == pytest.approx(0.5, rel=1e-12)

def test_normalize_sigma():
    """Test normalize_sigma rescales to the amplitude at that index"""
    grid = Grid(n=64, length=20.0)
    phi = NoiseConfig(kind="power_law", amplitude=2.0, normalize_sigma=0.25).build(grid, 2)
    assert phi.hs_norm(0.25) == pytest.approx(2.0, rel=1e-12)

def test_truncated_noise():
    """Test truncate_modes removes high modes"""
    grid = Grid(n=64, length=2 * math.pi)
    full = NoiseConfig(kind="power_law").build(grid, 2)
    cut = NoiseConfig(kind="power_law", truncate_modes=3).build(grid, 2)
    assert cut.hs_norm(1.0) < full.hs_norm(1.0)

def test_zero_noise():
    """Test the zero profile"""
    assert NoiseConfig(kind="zero").build(Grid(n=16, length=1.0), 3).is_zero

def test_table_noise_needs_table():
    """Test table noise without a table is a config error"""
    with pytest.raises(ConfigError) as exc_info:
        validate_config({"noise": {"kind": "table"}})
    assert exc_info.value.key_path == "noise"

# Shipped Config Tests
CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"

@pytest.mark.parametrize("name", ["soliton.toml", "mkdv.toml", "gkdv-k3.yaml"])
def test_shipped_configs_parse(name):
    """Test the sample configs validate and build their noise"""
    config = parse_config(str(CONFIG_DIR / name))
    phi = config.phi()
    assert phi.grid.n == config.simulation.n
