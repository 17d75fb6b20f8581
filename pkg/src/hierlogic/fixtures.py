"""Access to the hierarchy fixtures bundled with the package."""

from __future__ import annotations

from importlib import resources

from .hierarchy import Hierarchy, parse_hierarchy

FIXTURE_NAMES = (
    "six_node",
    "cityscapes",
    "mapillary_vistas_2",
    "pascal_part_108",
    "ade20k",
)


def fixture_text(name: str) -> str:
    if name not in FIXTURE_NAMES:
        raise ValueError(f"unknown fixture {name!r}; available: {FIXTURE_NAMES}")
    ref = resources.files("hierlogic").joinpath(f"data/hierarchies/{name}.json")
    return ref.read_text(encoding="utf-8")


def load_fixture(name: str) -> Hierarchy:
    """Parse one of the bundled hierarchies by short name."""
    return parse_hierarchy(fixture_text(name))
