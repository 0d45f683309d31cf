"""Base definitions for built-in worlds."""

from __future__ import annotations

from abc import ABC
from collections.abc import Sequence
from typing import TYPE_CHECKING, ClassVar

from ..lidar_sim import map_from_grid


if TYPE_CHECKING:
    from ..lidar_sim import WorldMap
    from .types import MapName


DEFAULT_CELL_SIZE = 1.2


class MapBuilder(ABC):
    """Base class for all built-in worlds."""

    map_name: MapName
    description: str

    @property
    def name(self) -> str:
        return self.map_name.value

    def short_description(self) -> str:
        """Short human summary for listings."""
        return self.description

    def build(self) -> WorldMap:
        """Construct the world."""
        raise NotImplementedError(f"{self.__class__.__name__} must implement build()")


class GridMapBuilder(MapBuilder):
    """World drawn as an ASCII grid of corridor cells ('.' free, '#' wall)."""

    rows: ClassVar[Sequence[str]] = ()
    spawns: ClassVar[Sequence[tuple[int, int, float]]] = ()
    cell_size: ClassVar[float] = DEFAULT_CELL_SIZE

    def build(self) -> WorldMap:
        return map_from_grid(self.name, self.rows, self.spawns, self.cell_size)
