from __future__ import annotations

import math

from .base import GridMapBuilder
from .types import MapName


class MazeMap(GridMapBuilder):
    """Long loop combining straights, left/right turns and hairpin sequences."""

    map_name = MapName.MAZE
    description = "Mixed corridors combining every feature of the other maps"
    rows = (
        "#################",
        "#.......#.......#",
        "#.#####.#.#####.#",
        "#.#...#...#...#.#",
        "#.#.#.#####.#.#.#",
        "#...#.......#...#",
        "#################",
    )
    spawns = (
        (1, 4, 0.0),
        (3, 15, -math.pi / 2),
        (5, 8, math.pi),
        (3, 1, math.pi / 2),
    )
