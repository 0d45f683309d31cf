"""Data models for training runs, evaluations and policy provenance."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray

from .exceptions import ConfigError


DEFAULT_BANDWIDTH = (0.75, 0.75, 0.75, 0.75, 0.75)
_FLOAT_FIELDS = ("alpha", "beta", "zeta", "epsilon", "gamma", "l0", "lam")
_INT_FIELDS = ("max_steps", "episode_max_len", "seed")


def _as_number(name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float | np.number):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one KNAF training run (defaults: the Round-map settings)."""

    alpha: float = 0.25
    beta: float = 0.25
    zeta: float = 0.001
    epsilon: float = 3.0
    sigma_explore: tuple[float, ...] = (0.2,)
    gamma: float = 0.99
    l0: float = 0.01
    lam: float = 0.0
    bandwidth: tuple[float, ...] = DEFAULT_BANDWIDTH
    max_steps: int = 100_000
    episode_max_len: int = 5_000
    seed: int = 0

    def __post_init__(self) -> None:
        for name in _FLOAT_FIELDS:
            object.__setattr__(self, name, _as_number(name, getattr(self, name)))
        for name in _INT_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int | np.integer):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("sigma_explore", "bandwidth"):
            values = np.atleast_1d(getattr(self, name))
            object.__setattr__(self, name, tuple(_as_number(name, v) for v in values))
        for name in ("alpha", "beta", "zeta"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be a positive step size, got {value}")
        if not 0 <= self.gamma < 1:
            raise ConfigError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.epsilon < 0:
            raise ConfigError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.lam < 0:
            raise ConfigError(f"lam must be >= 0, got {self.lam}")
        if any(s < 0 for s in self.sigma_explore):
            raise ConfigError(f"exploration std-devs must be >= 0, got {self.sigma_explore}")
        if self.max_steps < 0 or self.episode_max_len < 1:
            raise ConfigError("max_steps must be >= 0 and episode_max_len >= 1")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TrainConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    def to_dict(self) -> dict[str, object]:
        data = dataclasses.asdict(self)
        data["sigma_explore"] = list(self.sigma_explore)
        data["bandwidth"] = list(self.bandwidth)
        return data

    def with_overrides(self, **changes: Any) -> TrainConfig:
        """Replace the given fields, ignoring those passed as None."""
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def load_train_config(path: Path) -> TrainConfig:
    """Read a TrainConfig from a JSON object; absent keys keep their defaults."""
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return TrainConfig.from_dict(data)


@dataclass(frozen=True, eq=False)
class Transition:
    """One sample (s, a, r, s', done) observed in the environment."""

    s: NDArray[np.float64]
    a: NDArray[np.float64]
    r: float
    s_next: NDArray[np.float64]
    done: bool = False


@dataclass
class TrainMetrics:
    """Time series emitted by a training run."""

    deltas: list[float] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    episodes: list[int] = field(default_factory=list)
    model_orders: list[int] = field(default_factory=list)
    episode_rewards: list[float] = field(default_factory=list)
    episode_lengths: list[int] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.deltas)

    def record_step(self, episode: int, reward: float, delta: float, model_order: int) -> None:
        self.episodes.append(episode)
        self.rewards.append(reward)
        self.deltas.append(delta)
        self.model_orders.append(model_order)

    def record_episode(self, total_reward: float, length: int) -> None:
        self.episode_rewards.append(total_reward)
        self.episode_lengths.append(length)

    def rows(self) -> list[tuple[int, int, float, float, int]]:
        """(step, episode, reward, delta, model_order) for every step."""
        return [
            (step, episode, reward, delta, order)
            for step, (episode, reward, delta, order) in enumerate(
                zip(self.episodes, self.rewards, self.deltas, self.model_orders, strict=True)
            )
        ]

    def average_episode_reward(self, last: int = 10) -> float | None:
        """Mean reward of the last ``last`` finished episodes."""
        if not self.episode_rewards:
            return None
        tail = self.episode_rewards[-last:]
        return sum(tail) / len(tail)


@dataclass
class EvalReport:
    """Outcome of a greedy evaluation run."""

    total_reward: int
    crashes: int
    steps: int
    actions: list[float] = field(default_factory=list)
    observations: list[list[float]] = field(default_factory=list)

    def to_dict(self) -> dict[str, object]:
        data: dict[str, object] = {
            "total_reward": self.total_reward,
            "crashes": self.crashes,
            "steps": self.steps,
        }
        if self.actions:
            data["actions"] = self.actions
            data["observations"] = self.observations
        return data


@dataclass
class RewardMatrix:
    """Rewards of every policy (rows) on every map (columns)."""

    policies: list[str]
    maps: list[str]
    rewards: list[list[int]]

    def __getitem__(self, key: tuple[str, str]) -> int:
        policy, map_name = key
        return self.rewards[self.policies.index(policy)][self.maps.index(map_name)]

    def to_csv_rows(self) -> list[list[str]]:
        rows = [["policy", *self.maps]]
        for label, row in zip(self.policies, self.rewards, strict=True):
            rows.append([label, *(str(r) for r in row)])
        return rows


@dataclass(frozen=True)
class PolicyProvenance:
    """Where a stored policy came from."""

    map_name: str = ""
    steps: int = 0
    seed: int = 0
    components: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, object]:
        return {
            "map_name": self.map_name,
            "steps": self.steps,
            "seed": self.seed,
            "components": list(self.components),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PolicyProvenance:
        return cls(
            map_name=str(data.get("map_name", "")),
            steps=int(data.get("steps", 0)),
            seed=int(data.get("seed", 0)),
            components=tuple(str(c) for c in data.get("components", ())),
        )
