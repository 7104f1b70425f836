"""Shipped environment fixtures and the default judge file."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from .env import ConfigError, EnvConfig

FIXTURE_NAMES = (
    "moral_dilemma",
    "stochastic_moral_dilemma",
    "stochastic_moral_dilemma_high",
    "left_bridge_blocked",
    "right_bridge_blocked",
    "circular_path",
    "dangerous_shore",
    "dangerous_bridge",
    "enlarged_state_space",
)


def fixture_path(name: str) -> Path:
    path = resources.files("reasonbridge") / "fixtures" / f"{name}.json"
    return Path(str(path))


def load_config(name_or_path: str) -> EnvConfig:
    """Load a config from a shipped fixture name or a JSON path."""
    direct = Path(name_or_path)
    if direct.exists():
        return EnvConfig.load(direct)
    if name_or_path in FIXTURE_NAMES:
        return EnvConfig.load(fixture_path(name_or_path))
    raise ConfigError(
        f"no such config {name_or_path!r}; shipped fixtures: "
        + ", ".join(FIXTURE_NAMES)
    )


def default_judge_path() -> Path:
    return Path(str(resources.files("reasonbridge") / "fixtures" / "judge_rescue_first.json"))
