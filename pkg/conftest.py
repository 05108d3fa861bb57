"""Global pytest configuration and fixture imports."""

# Import specific fixtures to make them available project-wide
# ruff: noqa: F401
from test.fixtures import (
    motion,
    noise,
    rng,
    small_config,
    write_config,
)
