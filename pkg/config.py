"""
Run configuration: built-in defaults, overridden by the environment (.env),
overridden by command-line flags.
"""
import os
from dataclasses import dataclass, replace
from typing import Optional

from dotenv import load_dotenv

from errors import ConfigError

VERSION = "1.0.0"
SCOPE_REVISION = "scope-r1"

DEFAULT_SEED = 20240611
OUTPUT_FORMATS = ("json", "csv", "text")


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    samples: int = 10_000_000
    big_samples: int = 100_000_000
    exp_bound: int = 12
    height_bound: int = 10
    precision_bits: int = 128
    threads: int = 1
    output_format: str = "text"
    output: Optional[str] = None
    data_dir: str = "data"

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.samples <= 0 or self.big_samples <= 0:
            raise ConfigError("sample counts must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.precision_bits < 64:
            raise ConfigError("precision_bits must be at least 64")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"unknown output format {self.output_format!r}")

    def with_overrides(self, **overrides):
        """Return a copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _env_int(name, default):
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(float(raw)) if "e" in raw.lower() else int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")


def load_config(env_file=None):
    """Build a RunConfig from .env / environment variables."""
    load_dotenv(env_file)
    return RunConfig(
        seed=_env_int("UNITSUMS_SEED", DEFAULT_SEED),
        samples=_env_int("UNITSUMS_SAMPLES", RunConfig.samples),
        big_samples=_env_int("UNITSUMS_BIG_SAMPLES", RunConfig.big_samples),
        threads=_env_int("UNITSUMS_THREADS", RunConfig.threads),
        precision_bits=_env_int("UNITSUMS_PRECISION_BITS", RunConfig.precision_bits),
        output_format=os.getenv("UNITSUMS_FORMAT", RunConfig.output_format),
        data_dir=os.getenv("UNITSUMS_DATA_DIR", RunConfig.data_dir),
    )
