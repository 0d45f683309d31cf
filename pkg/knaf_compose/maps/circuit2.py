from __future__ import annotations

import math

from .base import GridMapBuilder
from .types import MapName


class Circuit2Map(GridMapBuilder):
    """Single-lane loop with an inward notch, so it turns both left and right."""

    map_name = MapName.CIRCUIT_2
    description = "Narrow hallways turning left and right"
    rows = (
        "##########",
        "#........#",
        "#.######.#",
        "#.#....#.#",
        "#.#.##.#.#",
        "#...##...#",
        "##########",
    )
    spawns = (
        (1, 4, 0.0),
        (3, 8, -math.pi / 2),
        (3, 5, math.pi),
        (3, 1, math.pi / 2),
    )
