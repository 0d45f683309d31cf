"""Built-in worlds and their registry."""

from __future__ import annotations

from .base import GridMapBuilder, MapBuilder
from .circuit1 import Circuit1Map
from .circuit2 import Circuit2Map
from .maze import MazeMap
from .round import RoundMap
from .types import MapName


# Registry of all built-in worlds
ALL_MAPS: list[MapBuilder] = [
    RoundMap(),
    MazeMap(),
    Circuit2Map(),
    Circuit1Map(),
]

MAP_REGISTRY: dict[MapName, MapBuilder] = {builder.map_name: builder for builder in ALL_MAPS}

# Named groups of worlds, usable wherever a list of maps is expected
MAP_SETS: dict[str, dict[str, object]] = {
    "open": {
        "description": "The ring track only.",
        "maps": (MapName.ROUND,),
    },
    "corridors": {
        "description": "Single-lane corridor worlds.",
        "maps": (
            MapName.MAZE,
            MapName.CIRCUIT_2,
            MapName.CIRCUIT_1,
        ),
    },
    "all": {
        "description": "Every built-in world.",
        "maps": tuple(MAP_REGISTRY),
    },
}


def get_map_names_for_set(set_name: str) -> tuple[MapName, ...]:
    """Return the map names associated with a map set."""
    map_set = MAP_SETS.get(set_name, {})
    names = map_set.get("maps", ())
    if not isinstance(names, (list, tuple)):
        return ()
    return tuple(name for name in names if isinstance(name, MapName))


def get_map_sets_for_map(builder: MapBuilder) -> tuple[str, ...]:
    """Compute which map sets include a given world."""
    sets = [name for name in MAP_SETS if name != "all" and builder.map_name in get_map_names_for_set(name)]
    sets.append("all")
    return tuple(sorted(sets))


__all__ = [
    "ALL_MAPS",
    "MAP_REGISTRY",
    "MAP_SETS",
    "Circuit1Map",
    "Circuit2Map",
    "GridMapBuilder",
    "MapBuilder",
    "MapName",
    "MazeMap",
    "RoundMap",
    "get_map_names_for_set",
    "get_map_sets_for_map",
]
