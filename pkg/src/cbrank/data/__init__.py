"""Paths to the data files shipped with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def _path(name: str) -> Path:
    return Path(str(resources.files(__package__) / name))


def case14_cdf_path() -> Path:
    """The bundled 14-bus test network (CDF)."""
    return _path("ieee14.cdf")


def case14_dynamics_path() -> Path:
    """Classical-model dynamics sidecar for the bundled network."""
    return _path("ieee14_dynamics.json")
