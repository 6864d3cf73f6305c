"""Grid simulator of communicating, evolving recurrent agents."""

from ._memesim import (
    CheckpointError,
    Config,
    ConfigError,
    Simulation,
    adaptive_softmax,
    entropy,
    hex64,
    presets,
    read_sweep_csv,
    replay,
    resume,
    run,
    softmax,
    sweep,
    sweep_base_config,
)


def config(preset="baseline", profile=None, **overrides):
    """Config with a preset, an optional profile and `key=value` overrides applied in that order."""
    c = Config()
    c.apply_preset(preset)
    if profile is not None:
        c.apply_profile(profile)
    for key, value in overrides.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        c.set(key, str(value))
    c.validate()
    return c


__all__ = [
    "CheckpointError",
    "Config",
    "ConfigError",
    "Simulation",
    "adaptive_softmax",
    "config",
    "entropy",
    "hex64",
    "presets",
    "read_sweep_csv",
    "replay",
    "resume",
    "run",
    "softmax",
    "sweep",
    "sweep_base_config",
]
