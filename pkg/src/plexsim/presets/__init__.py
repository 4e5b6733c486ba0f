"""Ready-made run configurations shipped with the package."""
from __future__ import annotations

from importlib import resources

from ..config import RunConfig, parse_config


def available() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__name__).iterdir() if p.name.endswith(".json"))


def preset_text(name: str) -> str:
    if name not in available():
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(available())}")
    return resources.files(__name__).joinpath(f"{name}.json").read_text(encoding="utf-8")


def load_preset(name: str) -> RunConfig:
    return parse_config(preset_text(name))
