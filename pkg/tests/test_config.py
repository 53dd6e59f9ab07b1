"""Tests for configuration module."""

import json
import tempfile
from pathlib import Path

import pytest

from src import config as config_module
from src.config import (
    ExperimentConfig,
    McmcConfig,
    Settings,
    build_config,
    config_hash,
    get_settings,
    load_config,
    parse_key_value,
    read_config_file,
    save_config,
)
from src.errors import ConfigError
from src.exploration import PolicyKind


def test_default_experiment_config():
    """Defaults follow the cliff-maze protocol."""
    config = ExperimentConfig()

    assert config.environment == "cliff_maze"
    assert config.policies == [PolicyKind.EPSILON_GREEDY, PolicyKind.PROPOSED]
    assert config.learning_rate == 0.3
    assert config.epsilon_start == 0.905
    assert config.epsilon_end == 0.005
    assert config.anneal_steps == 100_000
    assert config.q == 0.1
    assert config.k == 0.95
    assert config.eval_interval == 1000
    assert config.seed_count == 100


def test_default_mcmc_config():
    """Four chains of 20k iterations, 10k burn-in, thinning 5."""
    config = McmcConfig()

    assert (config.chains, config.iterations, config.burn_in, config.thin) == (4, 20_000, 10_000, 5)
    assert config.smooth_window == 10


def test_mcmc_burn_in_must_fit():
    """Burn-in at or past the iteration count is rejected."""
    with pytest.raises(ValueError):
        McmcConfig(iterations=100, burn_in=100)


def test_policy_spec_from_config():
    """Schedule fields flow into every policy."""
    config = ExperimentConfig(k=0.9, q=0.05, softmax_temperature=2.0)
    spec = config.policy_spec(PolicyKind.E_EXPLOITATION)

    assert spec.schedule.k == 0.9
    assert spec.schedule.q == 0.05
    assert spec.temperature == 2.0
    assert spec.e == pytest.approx(0.045)


def test_invalid_values_are_config_errors():
    """Validation failures surface as ConfigError."""
    with pytest.raises(ConfigError):
        build_config({"q": 1.5})
    with pytest.raises(ConfigError):
        build_config({"no_such_key": 1})
    with pytest.raises(ConfigError):
        build_config({"policies": []})
    with pytest.raises(ConfigError):
        build_config({"seeds": [1, 1]})


def test_inconsistent_schedule_is_config_error():
    """eps' outside [0, 1] is caught before any run."""
    with pytest.raises(ConfigError):
        build_config({"k": 0.5, "q": 0.5, "policies": ["proposed"]})


def test_parse_key_value():
    """Comments, blank lines and comma-separated lists."""
    text = """
    # reduced run
    total_steps = 5000
    policies = proposed, epsilon_greedy
    seeds = 1,2,3
    maze-file = none   # trailing comment
    """
    data = parse_key_value(text)

    assert data == {
        "total_steps": "5000",
        "policies": ["proposed", "epsilon_greedy"],
        "seeds": ["1", "2", "3"],
        "maze_file": None,
    }
    config = build_config(data)
    assert config.total_steps == 5000
    assert config.seeds == [1, 2, 3]
    assert config.policies == [PolicyKind.PROPOSED, PolicyKind.EPSILON_GREEDY]


def test_parse_key_value_rejects_bare_words():
    """A line without '=' is an error naming its line."""
    with pytest.raises(ConfigError, match="line 2"):
        parse_key_value("q = 0.1\nnonsense\n")


def test_config_hash_ignores_location():
    """Output directory and worker count do not change the hash."""
    a = ExperimentConfig(output_dir="one", workers=1)
    b = ExperimentConfig(output_dir="two", workers=8)
    c = ExperimentConfig(k=0.9)

    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(c)
    assert len(config_hash(a)) == 12


def test_single_arm_hashes_differ():
    """Each policy arm gets its own run directory."""
    config = ExperimentConfig()

    assert config_hash(config.for_policy("proposed")) != config_hash(config.for_policy("epsilon_greedy"))
    assert config.for_policy("proposed").policies == [PolicyKind.PROPOSED]


def test_save_and_load_config():
    """Test saving and loading configuration."""
    with tempfile.TemporaryDirectory() as tmpdir:
        config_path = Path(tmpdir) / "test_config.json"
        original = ExperimentConfig(total_steps=2000, seeds=[4, 5], policies=["proposed"])

        save_config(original, config_path)
        loaded = load_config(config_path)

        assert loaded.model_dump() == original.model_dump()
        assert json.loads(config_path.read_text(encoding="utf-8"))["policies"] == ["proposed"]


def test_load_config_overrides():
    """Overrides win over the file; None overrides are ignored."""
    with tempfile.TemporaryDirectory() as tmpdir:
        config_path = Path(tmpdir) / "run.cfg"
        config_path.write_text("seed_count = 3\nq = 0.2\n", encoding="utf-8")

        config = load_config(config_path, {"seed_count": 7, "q": None})

        assert config.seed_count == 7
        assert config.q == 0.2


def test_read_config_file_errors():
    """Missing files and broken JSON are config errors."""
    with tempfile.TemporaryDirectory() as tmpdir:
        with pytest.raises(ConfigError):
            read_config_file(Path(tmpdir) / "missing.json")
        broken = Path(tmpdir) / "broken.json"
        broken.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            read_config_file(broken)


def test_settings_from_environment(monkeypatch):
    """CRITSTATE_* variables feed the settings singleton."""
    monkeypatch.setenv("CRITSTATE_WORKERS", "3")
    monkeypatch.setenv("CRITSTATE_LOG_LEVEL", "DEBUG")
    monkeypatch.setattr(config_module, "_settings", None)

    settings = get_settings()

    assert isinstance(settings, Settings)
    assert settings.workers == 3
    assert settings.log_level == "DEBUG"
    assert get_settings() is settings
