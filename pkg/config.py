"""
config.py — Experiment configuration: defaults, .env, config file, CLI flags.

Precedence, lowest to highest:
    built-in defaults  <  NKCLOUD_* environment (.env loaded by the CLI)
                       <  --config FILE (flat key=value)  <  CLI flags

Config file example (every key is also a flag, `--sample-seed` ↔ `sample_seed`):
    n=25
    k=20
    seed=7
    links=random
    mode=sample
    samples=1000000
    rule=whole
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Mapping, Optional

from dotenv import dotenv_values

from cloud import DEFAULT_BIN_WIDTH, BorderingRule
from heuristic import DEFAULT_BARRIER_TOL, DEFAULT_LINE_BAND, DEFAULT_GENERATIONS, DEFAULT_RUNS, GhcConfig
from landscape import MAX_N, MAX_SEED, LinkModel

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

EXHAUSTIVE_MAX_N = 25
DEFAULT_SAMPLES = 1_000_000
GHC_KEYS = ("generations", "runs", "run_seed")
ENV_KEYS = {"NKCLOUD_WORKERS": "workers", "NKCLOUD_OUT": "out"}


class Mode(str, Enum):
    EXHAUSTIVE = "exhaustive"
    SAMPLE = "sample"


class ConfigError(ValueError):
    """A config value failed validation; `key` names the offending setting."""

    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 16
    k: int = 4
    seed: int = 0
    links: LinkModel = LinkModel.RANDOM
    mode: Mode = Mode.EXHAUSTIVE
    samples: int = DEFAULT_SAMPLES
    sample_seed: int = 0
    bin_width: float = DEFAULT_BIN_WIDTH
    rule: BorderingRule = BorderingRule.WHOLE_NEIGHBORHOOD
    ghc: Optional[GhcConfig] = None
    out: Path = Path("out")
    barrier_tol: float = DEFAULT_BARRIER_TOL
    band: float = DEFAULT_LINE_BAND
    workers: int = 1
    allow_large: bool = False
    warnings: tuple[str, ...] = field(default=(), compare=False)


# ---------------------------------------------------------------------------
# Value parsing
# ---------------------------------------------------------------------------

def _int(key: str, value: Any) -> int:
    if isinstance(value, bool):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    try:
        return int(str(value).strip(), 0)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {value!r}") from None


def _float(key: str, value: Any) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a number, got {value!r}") from None


def _bool(key: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(key, f"expected true/false, got {value!r}")


def _enum(enum_cls: type[Enum]) -> Callable[[str, Any], Enum]:
    def parse(key: str, value: Any) -> Enum:
        try:
            return enum_cls(str(getattr(value, "value", value)).strip())
        except ValueError:
            allowed = "|".join(m.value for m in enum_cls)
            raise ConfigError(key, f"expected one of {allowed}, got {value!r}") from None
    return parse


PARSERS: dict[str, Callable[[str, Any], Any]] = {
    "n": _int,
    "k": _int,
    "seed": _int,
    "links": _enum(LinkModel),
    "mode": _enum(Mode),
    "samples": _int,
    "sample_seed": _int,
    "bin_width": _float,
    "rule": _enum(BorderingRule),
    "generations": _int,
    "runs": _int,
    "run_seed": _int,
    "out": lambda key, value: Path(str(value)),
    "barrier_tol": _float,
    "band": _float,
    "workers": _int,
    "allow_large": _bool,
}


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def read_config_file(path: Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"no such config file: {path}")
    values = {}
    for key, value in dotenv_values(path).items():
        norm = key.strip().lower().replace("-", "_")
        if norm not in PARSERS:
            raise ConfigError(norm, f"unknown config key in {path}")
        values[norm] = "" if value is None else value
    return values


def environment_values(environ: Mapping[str, str] = os.environ) -> dict[str, str]:
    return {key: environ[name] for name, key in ENV_KEYS.items() if environ.get(name)}


def load_config(flags: Mapping[str, Any], config_file: Optional[Path] = None, *,
                with_ghc: bool = False,
                environ: Mapping[str, str] = os.environ) -> ExperimentConfig:
    """Merge env, config file and flags (None-valued flags are "not given")."""
    raw: dict[str, Any] = dict(environment_values(environ))
    if config_file is not None:
        raw.update(read_config_file(config_file))
    for key, value in flags.items():
        if value is None:
            continue
        if key not in PARSERS:
            raise ConfigError(key, "unknown setting")
        raw[key] = value

    parsed = {key: PARSERS[key](key, value) for key, value in raw.items()}
    ghc_values = {key: parsed.pop(key) for key in GHC_KEYS if key in parsed}
    ghc = None
    if with_ghc or ghc_values:
        ghc_values.setdefault("generations", DEFAULT_GENERATIONS)
        ghc_values.setdefault("runs", DEFAULT_RUNS)
        for key in GHC_KEYS:
            if key in ghc_values and ghc_values[key] < (0 if key == "run_seed" else 1):
                raise ConfigError(key, f"out of range: {ghc_values[key]}")
        ghc = GhcConfig(**ghc_values)
    return validate(ExperimentConfig(ghc=ghc, **parsed))


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if not 1 <= cfg.n <= MAX_N:
        raise ConfigError("n", f"must be in [1, {MAX_N}]: {cfg.n}")
    if not 0 <= cfg.k <= cfg.n - 1:
        raise ConfigError("k", f"must be in [0, n-1={cfg.n - 1}]: {cfg.k}")
    for key in ("seed", "sample_seed"):
        if not 0 <= getattr(cfg, key) <= MAX_SEED:
            raise ConfigError(key, f"must be a 64-bit unsigned integer: {getattr(cfg, key)}")
    if not cfg.bin_width > 0:
        raise ConfigError("bin_width", f"must be > 0: {cfg.bin_width}")
    if cfg.mode is Mode.SAMPLE and cfg.samples < 1:
        raise ConfigError("samples", f"sample mode needs at least 1 sample: {cfg.samples}")
    if cfg.barrier_tol < 0:
        raise ConfigError("barrier_tol", f"must be >= 0: {cfg.barrier_tol}")
    if cfg.band < 0:
        raise ConfigError("band", f"must be >= 0: {cfg.band}")
    if cfg.workers < 1:
        raise ConfigError("workers", f"must be >= 1: {cfg.workers}")

    warnings: list[str] = []
    if cfg.mode is Mode.EXHAUSTIVE and cfg.n > EXHAUSTIVE_MAX_N:
        if not cfg.allow_large:
            raise ConfigError("n", f"exhaustive mode is capped at n={EXHAUSTIVE_MAX_N}; "
                                   f"use sample mode or allow_large: {cfg.n}")
        warnings.append(f"exhaustive enumeration of 2^{cfg.n} = {2 ** cfg.n:,} genotypes "
                        f"needs {cfg.n * 2 ** cfg.n:,} neighbor evaluations")
    return replace(cfg, warnings=tuple(warnings))
