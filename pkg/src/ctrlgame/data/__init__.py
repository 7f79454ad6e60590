"""Bundled example models."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def firebird_source() -> str:
    """DSL source of the bundled Firebird example model."""
    return resources.files(__package__).joinpath("firebird.scm").read_text()


def firebird_path() -> Path:
    """Filesystem path of the bundled Firebird model."""
    return Path(str(resources.files(__package__).joinpath("firebird.scm")))
