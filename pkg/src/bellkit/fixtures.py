"""Access to the reference data files shipped with the package."""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path

from .exprformat import parse_expansion
from .lhv import FullJointExpansion

_G_PAPER_FIXTURE = "data/g_paper_expansion.fixture"


def g_paper_expansion_fixture_text() -> str:
    """Raw text of the shipped g-paper expansion table."""
    return files(__package__).joinpath(_G_PAPER_FIXTURE).read_text(encoding="utf-8")


def g_paper_expansion_fixture() -> FullJointExpansion:
    """The shipped g-paper expansion table, parsed."""
    return parse_expansion(g_paper_expansion_fixture_text())


def g_paper_expansion_fixture_path() -> Path:
    """Filesystem path of the shipped table (packages installed from a directory)."""
    return Path(str(files(__package__).joinpath(_G_PAPER_FIXTURE)))
