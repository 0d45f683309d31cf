from __future__ import annotations

from enum import StrEnum


class MapName(StrEnum):
    ROUND = "round"
    CIRCUIT_2 = "circuit-2"
    CIRCUIT_1 = "circuit-1"
    MAZE = "maze"
