from __future__ import annotations

from ..lidar_sim import WorldMap, ring_map
from .base import MapBuilder
from .types import MapName


ROUND_INNER_RADIUS = 1.0
ROUND_OUTER_RADIUS = 2.5
ROUND_SIDES = 48
ROUND_SPAWNS = 8


class RoundMap(MapBuilder):
    map_name = MapName.ROUND
    description = "Radially symmetric ring track"

    def build(self) -> WorldMap:
        return ring_map(self.name, ROUND_INNER_RADIUS, ROUND_OUTER_RADIUS, ROUND_SIDES, ROUND_SPAWNS)
