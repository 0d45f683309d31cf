from __future__ import annotations

import math

from .base import GridMapBuilder
from .types import MapName


class Circuit1Map(GridMapBuilder):
    """Meandering loop: the bottom half is a chain of back-to-back hairpins."""

    map_name = MapName.CIRCUIT_1
    description = "Multiple tight turns in quick succession"
    rows = (
        "#############",
        "#...........#",
        "#.#########.#",
        "#.#...#...#.#",
        "#.#.#.#.#.#.#",
        "#...#...#...#",
        "#############",
    )
    spawns = (
        (1, 6, 0.0),
        (2, 11, -math.pi / 2),
        (2, 1, math.pi / 2),
    )
