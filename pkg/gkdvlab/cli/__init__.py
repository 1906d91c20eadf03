"""Command-line interface and run configuration"""
from .config import ConfigError, ExperimentConfig, NoiseConfig, RunConfig, config_hash, parse_config
