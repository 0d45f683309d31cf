"""Deterministic 2D simulator: a unicycle robot with a 5-beam lidar in segment worlds.

State observed by the learner: the 5 range readings, ordered left to right.
Action: angular velocity. Reward: -200 and episode end on collision, +1 otherwise.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import ConfigError, MapFormatError


logger = logging.getLogger(__name__)

# 34 degree spacing, leftmost beam first
DEFAULT_BEAM_ANGLES = tuple(math.radians(deg) for deg in (68.0, 34.0, 0.0, -34.0, -68.0))
BEAM_COUNT = 5
RAY_EPS = 1e-12


@dataclass(frozen=True)
class SimConfig:
    v: float = 0.15
    dt: float = 0.1
    omega_bounds: tuple[float, float] = (-0.3, 0.3)
    beam_angles: tuple[float, ...] = DEFAULT_BEAM_ANGLES
    max_range: float = 5.0
    collision_radius: float = 0.15
    r_crash: float = -200.0
    r_alive: float = 1.0

    def __post_init__(self) -> None:
        if self.v <= 0 or self.dt <= 0:
            raise ConfigError(f"v and dt must be positive, got v={self.v} dt={self.dt}")
        if len(self.beam_angles) != BEAM_COUNT:
            raise ConfigError(f"the lidar has {BEAM_COUNT} beams, got {len(self.beam_angles)} angles")
        low, high = self.omega_bounds
        if low > high:
            raise ConfigError(f"omega_bounds are reversed: {self.omega_bounds}")
        if self.max_range <= 0 or self.collision_radius < 0:
            raise ConfigError("max_range must be positive and collision_radius non-negative")


DEFAULT_SIM_CONFIG = SimConfig()


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(theta, 2 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))


@dataclass(frozen=True, eq=False)
class WorldMap:
    """Walls as line segments (x1, y1, x2, y2) and spawn poses (x, y, theta), in meters/radians."""

    name: str
    segments: NDArray[np.float64]
    spawn_poses: NDArray[np.float64]
    collision_radius: float = field(default=DEFAULT_SIM_CONFIG.collision_radius, repr=False)

    def __post_init__(self) -> None:
        segments = np.array(self.segments, dtype=np.float64).reshape(-1, 4)
        spawns = np.array(self.spawn_poses, dtype=np.float64).reshape(-1, 3)
        if segments.shape[0] == 0:
            raise MapFormatError(f"map {self.name!r} has no segments")
        if spawns.shape[0] == 0:
            raise MapFormatError(f"map {self.name!r} has no spawn poses")
        if not (np.all(np.isfinite(segments)) and np.all(np.isfinite(spawns))):
            raise MapFormatError(f"map {self.name!r} contains non-finite coordinates")
        segments.setflags(write=False)
        spawns.setflags(write=False)
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "spawn_poses", spawns)
        for x, y, _ in spawns:
            clearance = wall_distance(self, float(x), float(y))
            if clearance < self.collision_radius:
                raise MapFormatError(
                    f"map {self.name!r}: spawn ({x:g}, {y:g}) is {clearance:.3f} m from a wall "
                    f"(collision radius {self.collision_radius:g} m)"
                )

    def spawn(self, index: int) -> RobotState:
        x, y, theta = self.spawn_poses[index]
        return RobotState(float(x), float(y), float(theta))


def point_segment_distance(x: float, y: float, segments: ArrayLike) -> NDArray[np.float64]:
    """Distance from (x, y) to each segment (x1, y1, x2, y2)."""
    segs = np.asarray(segments, dtype=np.float64).reshape(-1, 4)
    a = segs[:, :2]
    e = segs[:, 2:] - a
    p = np.array([x, y])
    length_sq = np.einsum("ij,ij->i", e, e)
    t = np.divide(np.einsum("ij,ij->i", p - a, e), length_sq, out=np.zeros_like(length_sq), where=length_sq > 0)
    nearest = a + np.clip(t, 0.0, 1.0)[:, np.newaxis] * e
    return np.hypot(*(nearest - p).T)


def wall_distance(world: WorldMap, x: float, y: float) -> float:
    """Distance from (x, y) to the nearest wall segment."""
    return float(np.min(point_segment_distance(x, y, world.segments)))


def raycast(world: WorldMap, state: RobotState, cfg: SimConfig = DEFAULT_SIM_CONFIG) -> NDArray[np.float64]:
    """Range to the nearest wall along each beam, clipped to ``cfg.max_range``."""
    angles = state.theta + np.asarray(cfg.beam_angles)
    u = np.column_stack([np.cos(angles), np.sin(angles)])
    a = world.segments[:, :2]
    e = world.segments[:, 2:] - a
    ao = a - np.array([state.x, state.y])

    denom = np.outer(u[:, 0], e[:, 1]) - np.outer(u[:, 1], e[:, 0])
    num_t = ao[:, 0] * e[:, 1] - ao[:, 1] * e[:, 0]
    num_s = np.outer(u[:, 1], ao[:, 0]) - np.outer(u[:, 0], ao[:, 1])
    parallel = np.abs(denom) < RAY_EPS
    safe = np.where(parallel, 1.0, denom)
    t = num_t / safe
    s = num_s / safe
    hit = ~parallel & (t >= 0.0) & (s >= 0.0) & (s <= 1.0)
    ranges = np.min(np.where(hit, t, np.inf), axis=1)
    return np.minimum(ranges, cfg.max_range)


def step(
    world: WorldMap,
    state: RobotState,
    omega: float,
    cfg: SimConfig = DEFAULT_SIM_CONFIG,
) -> tuple[RobotState, NDArray[np.float64], float, bool]:
    """Advance one control period; returns (next state, observation, reward, done)."""
    low, high = cfg.omega_bounds
    omega = min(max(float(omega), low), high)
    moved = RobotState(
        state.x + cfg.v * math.cos(state.theta) * cfg.dt,
        state.y + cfg.v * math.sin(state.theta) * cfg.dt,
        state.theta + omega * cfg.dt,
    )
    done = wall_distance(world, moved.x, moved.y) < cfg.collision_radius
    reward = cfg.r_crash if done else cfg.r_alive
    return moved, raycast(world, moved, cfg), reward, done


def reset(
    world: WorldMap,
    rng: np.random.Generator,
    cfg: SimConfig = DEFAULT_SIM_CONFIG,
) -> tuple[RobotState, NDArray[np.float64]]:
    """Start at a spawn pose drawn uniformly from the map's list."""
    state = world.spawn(int(rng.integers(world.spawn_poses.shape[0])))
    return state, raycast(world, state, cfg)


class LidarEnv:
    """Training/evaluation environment over one world; counts every simulated step."""

    state_dim = BEAM_COUNT
    action_dim = 1

    def __init__(self, world: WorldMap, cfg: SimConfig = DEFAULT_SIM_CONFIG) -> None:
        self.world = world
        self.cfg = cfg
        self.action_low = np.array([cfg.omega_bounds[0]])
        self.action_high = np.array([cfg.omega_bounds[1]])
        self.state: RobotState | None = None
        self.steps_taken = 0

    def reset(self, rng: np.random.Generator) -> NDArray[np.float64]:
        self.state, obs = reset(self.world, rng, self.cfg)
        return obs

    def step(self, action: ArrayLike) -> tuple[NDArray[np.float64], float, bool]:
        if self.state is None:
            raise RuntimeError("reset() must be called before step()")
        omega = float(np.asarray(action, dtype=np.float64).reshape(-1)[0])
        self.state, obs, reward, done = step(self.world, self.state, omega, self.cfg)
        self.steps_taken += 1
        return obs, reward, done


def builtin_maps() -> list[WorldMap]:
    """The four bundled worlds in cross-validation column order: Round, Maze, Circuit 2, Circuit 1."""
    from .maps import ALL_MAPS  # noqa: PLC0415

    return [builder.build() for builder in ALL_MAPS]


def ring_map(
    name: str,
    inner_radius: float,
    outer_radius: float,
    sides: int = 48,
    spawn_count: int = 8,
) -> WorldMap:
    """Annular track between two regular polygons, spawns heading counter-clockwise mid-track."""
    if not 0 < inner_radius < outer_radius:
        raise MapFormatError(f"ring needs 0 < inner < outer radius, got {inner_radius}, {outer_radius}")
    segments = [*_polygon(inner_radius, sides), *_polygon(outer_radius, sides)]
    mid = 0.5 * (inner_radius + outer_radius)
    spawns = []
    for k in range(spawn_count):
        phi = 2 * math.pi * k / spawn_count
        spawns.append((mid * math.cos(phi), mid * math.sin(phi), normalize_angle(phi + math.pi / 2)))
    return WorldMap(name, np.array(segments), np.array(spawns))


def _polygon(radius: float, sides: int) -> list[tuple[float, float, float, float]]:
    angles = [2 * math.pi * k / sides for k in range(sides)]
    corners = [(radius * math.cos(a), radius * math.sin(a)) for a in angles]
    return [(*corners[k], *corners[(k + 1) % sides]) for k in range(sides)]


def map_from_grid(
    name: str,
    rows: Sequence[str],
    spawns: Sequence[tuple[int, int, float]],
    cell_size: float = 1.0,
) -> WorldMap:
    """Build a world from an ASCII grid: '.' free cell, anything else wall.

    Walls are traced on every free/blocked cell boundary (the grid border counts
    as blocked) and collinear pieces are merged. Spawns are (row, col, theta) at
    cell centers; row 0 is the top of the drawing.
    """
    height = len(rows)
    width = max((len(r) for r in rows), default=0)
    free = np.zeros((height + 2, width + 2), dtype=bool)
    for r, line in enumerate(rows):
        for c, char in enumerate(line):
            free[r + 1, c + 1] = char == "."
    if not free.any():
        raise MapFormatError(f"grid for map {name!r} has no free cells")

    def y_of(row: int) -> float:
        return (height - row) * cell_size

    segments: list[tuple[float, float, float, float]] = []
    # horizontal edges: between grid row r-1 and r
    for r in range(1, height + 2):
        boundary = free[r - 1] != free[r]
        segments.extend(
            (c0 * cell_size, y_of(r - 1), c1 * cell_size, y_of(r - 1)) for c0, c1 in _runs(boundary)
        )
    for c in range(1, width + 2):
        boundary = free[:, c - 1] != free[:, c]
        segments.extend(
            ((c - 1) * cell_size, y_of(r0), (c - 1) * cell_size, y_of(r1)) for r0, r1 in _runs(boundary)
        )

    poses = []
    for row, col, theta in spawns:
        if not free[row + 1, col + 1]:
            raise MapFormatError(f"map {name!r}: spawn cell ({row}, {col}) is not free")
        poses.append(((col + 0.5) * cell_size, (height - row - 0.5) * cell_size, normalize_angle(theta)))
    return WorldMap(name, np.array(segments), np.array(poses))


def _runs(mask: NDArray[np.bool_]) -> list[tuple[int, int]]:
    """[start, end) index pairs of consecutive True entries, shifted to grid coordinates."""
    runs = []
    start = None
    for index, flag in enumerate(mask):
        if flag and start is None:
            start = index
        elif not flag and start is not None:
            runs.append((start - 1, index - 1))
            start = None
    if start is not None:
        runs.append((start - 1, len(mask) - 1))
    return runs


def format_map(world: WorldMap) -> str:
    """Render a world in the text map format; floats use repr so parsing is exact."""
    lines = [f"# {world.name}", f"name {world.name}"]
    lines.extend("segment " + " ".join(repr(float(v)) for v in seg) for seg in world.segments)
    lines.extend("spawn " + " ".join(repr(float(v)) for v in pose) for pose in world.spawn_poses)
    return "\n".join(lines) + "\n"


def parse_map(text: str, default_name: str = "map") -> WorldMap:
    """Parse ``segment x1 y1 x2 y2`` / ``spawn x y theta`` / ``name label`` lines; '#' starts a comment."""
    name = default_name
    segments: list[list[float]] = []
    spawns: list[list[float]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        if keyword == "name":
            name = rest.strip() or default_name
            continue
        expected = {"segment": 4, "spawn": 3}.get(keyword)
        if expected is None:
            raise MapFormatError(f"line {number}: unknown entry {keyword!r}")
        try:
            values = [float(token) for token in rest.split()]
        except ValueError as exc:
            raise MapFormatError(f"line {number}: {exc}") from exc
        if len(values) != expected:
            raise MapFormatError(f"line {number}: {keyword} takes {expected} numbers, got {len(values)}")
        (segments if keyword == "segment" else spawns).append(values)
    return WorldMap(name, np.array(segments), np.array(spawns))


def load_map(path: Path) -> WorldMap:
    world = parse_map(path.read_text(encoding="utf-8"), default_name=path.stem)
    logger.debug(
        "loaded map %r from %s: %d segments, %d spawns", world.name, path, len(world.segments), len(world.spawn_poses)
    )
    return world


def save_map(world: WorldMap, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_map(world), encoding="utf-8")
