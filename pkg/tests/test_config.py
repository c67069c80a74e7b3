from __future__ import annotations

from pathlib import Path

import pytest

from cloud import BorderingRule
from config import ConfigError, ExperimentConfig, Mode, load_config, read_config_file, validate
from heuristic import GhcConfig
from landscape import LinkModel


def _cfg_file(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "experiment.cfg"
    path.write_text(text)
    return path


def test_defaults():
    cfg = load_config({}, environ={})
    assert cfg == ExperimentConfig()
    assert cfg.bin_width == 0.002
    assert cfg.ghc is None
    assert cfg.warnings == ()


def test_flags_override_file_which_overrides_environment(tmp_path):
    path = _cfg_file(tmp_path, "n=12\nk=3\nseed=5\nworkers=3\nlinks=adjacent\n")
    cfg = load_config({"k": 6, "seed": None}, path,
                      environ={"NKCLOUD_WORKERS": "2", "NKCLOUD_OUT": "env_out"})
    assert (cfg.n, cfg.k, cfg.seed) == (12, 6, 5)
    assert cfg.workers == 3
    assert cfg.out == Path("env_out")
    assert cfg.links is LinkModel.ADJACENT


def test_values_are_parsed_from_text(tmp_path):
    path = _cfg_file(tmp_path, "mode=sample\nsamples=1000000\nsample_seed=0x10\nrule=ghc\nallow_large=yes\n")
    cfg = load_config({}, path, environ={})
    assert cfg.mode is Mode.SAMPLE
    assert cfg.samples == 1_000_000
    assert cfg.sample_seed == 16
    assert cfg.rule is BorderingRule.GHC_BEST
    assert cfg.allow_large is True


def test_unknown_file_key_is_named(tmp_path):
    with pytest.raises(ConfigError) as err:
        read_config_file(_cfg_file(tmp_path, "n=12\ncolour=blue\n"))
    assert err.value.key == "colour"


def test_missing_config_file():
    with pytest.raises(ConfigError, match="no such config file"):
        load_config({}, Path("/nonexistent/experiment.cfg"), environ={})


@pytest.mark.parametrize("flags, key", [
    ({"n": 0}, "n"),
    ({"n": 5, "k": 5}, "k"),
    ({"bin_width": 0.0}, "bin_width"),
    ({"mode": "sample", "samples": 0}, "samples"),
    ({"workers": 0}, "workers"),
    ({"seed": -1}, "seed"),
    ({"links": "ring"}, "links"),
    ({"n": "twelve"}, "n"),
    ({"runs": 0}, "runs"),
    ({"generations": 0}, "generations"),
    ({"barrier_tol": -0.1}, "barrier_tol"),
])
def test_validation_errors_name_the_key(flags, key):
    with pytest.raises(ConfigError) as err:
        load_config(flags, environ={})
    assert err.value.key == key
    assert isinstance(err.value, ValueError)


def test_exhaustive_mode_is_capped():
    with pytest.raises(ConfigError, match="allow_large"):
        load_config({"n": 26, "k": 2}, environ={})
    cfg = load_config({"n": 26, "k": 2, "allow_large": True}, environ={})
    assert len(cfg.warnings) == 1
    assert "2^26" in cfg.warnings[0]


def test_sample_mode_is_not_capped():
    cfg = load_config({"n": 32, "k": 4, "mode": "sample", "samples": 10}, environ={})
    assert cfg.warnings == ()


def test_ghc_settings_default_to_100_generations_70_runs():
    cfg = load_config({}, with_ghc=True, environ={})
    assert cfg.ghc == GhcConfig(generations=100, runs=70, run_seed=0)


def test_any_ghc_key_builds_ghc_settings():
    cfg = load_config({"runs": 5, "run_seed": "3"}, environ={})
    assert cfg.ghc == GhcConfig(generations=100, runs=5, run_seed=3)


def test_validate_returns_a_new_config():
    cfg = ExperimentConfig(n=26, k=1, allow_large=True)
    checked = validate(cfg)
    assert checked == cfg
    assert checked.warnings and not cfg.warnings
