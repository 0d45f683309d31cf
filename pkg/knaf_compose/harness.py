"""Greedy evaluation, cross-validation and map resolution for trained policies."""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, DimensionMismatchError, MapFormatError
from .knaf import NAFPolicy, greedy_action
from .lidar_sim import DEFAULT_SIM_CONFIG, LidarEnv, SimConfig, WorldMap, load_map
from .maps import MAP_REGISTRY, MAP_SETS, MapName, get_map_names_for_set
from .models import EvalReport, RewardMatrix
from .output import load_policy, save_policy
from .utils import unique_ordered


logger = logging.getLogger(__name__)

DEFAULT_EVAL_STEPS = 1000


def _check_policy_fits(policy: NAFPolicy, env: LidarEnv) -> None:
    if policy.state_dim != env.state_dim or policy.action_dim != env.action_dim:
        raise DimensionMismatchError(
            f"policy expects state_dim={policy.state_dim}, action_dim={policy.action_dim}; "
            f"map {env.world.name!r} provides state_dim={env.state_dim}, action_dim={env.action_dim}"
        )


def evaluate(
    policy: NAFPolicy,
    world: WorldMap,
    steps: int = DEFAULT_EVAL_STEPS,
    seed: int = 0,
    cfg: SimConfig = DEFAULT_SIM_CONFIG,
    *,
    record_trace: bool = False,
) -> EvalReport:
    """Run the greedy policy for ``steps`` steps, respawning after each crash.

    The reward keeps accumulating across crashes, so
    total_reward = r_alive * (steps - crashes) + r_crash * crashes.
    """
    if steps < 0:
        raise ConfigError(f"steps must be >= 0, got {steps}")
    env = LidarEnv(world, cfg)
    _check_policy_fits(policy, env)
    report = EvalReport(total_reward=0, crashes=0, steps=0)
    if steps == 0:
        return report

    rng = np.random.default_rng(seed)
    obs = env.reset(rng)
    total = 0.0
    for _ in range(steps):
        action = greedy_action(policy, obs)
        if record_trace:
            report.observations.append([float(v) for v in obs])
            report.actions.append(float(action[0]))
        obs, reward, done = env.step(action)
        total += reward
        report.steps += 1
        if done:
            report.crashes += 1
            obs = env.reset(rng)
    report.total_reward = round(total)
    logger.info(
        "evaluated on %s: reward=%d crashes=%d over %d steps", world.name, report.total_reward, report.crashes, steps
    )
    return report


def cross_validate(
    policies: Mapping[str, NAFPolicy],
    maps: Sequence[WorldMap],
    steps: int = DEFAULT_EVAL_STEPS,
    seed: int = 0,
    cfg: SimConfig = DEFAULT_SIM_CONFIG,
) -> RewardMatrix:
    """Evaluate every labelled policy on every map with the same seed."""
    labels = list(policies)
    rewards = [[evaluate(policies[label], world, steps, seed, cfg).total_reward for world in maps] for label in labels]
    return RewardMatrix(policies=labels, maps=[world.name for world in maps], rewards=rewards)


def resolve_map(name_or_path: str) -> WorldMap:
    """A built-in world by name, otherwise a map file."""
    try:
        builder = MAP_REGISTRY[MapName(name_or_path)]
    except ValueError:
        path = Path(name_or_path)
        if not path.is_file():
            known = ", ".join(name.value for name in MAP_REGISTRY)
            raise MapFormatError(f"{name_or_path!r} is neither a built-in map ({known}) nor a map file") from None
        return load_map(path)
    return builder.build()


def resolve_maps(names: Sequence[str]) -> list[WorldMap]:
    """Resolve map names, map-set names and file paths, keeping first occurrences."""
    expanded: list[str] = []
    for name in names:
        if name in MAP_SETS:
            expanded.extend(map_name.value for map_name in get_map_names_for_set(name))
        else:
            expanded.append(name)
    return [resolve_map(name) for name in unique_ordered(expanded)]


__all__ = [
    "DEFAULT_EVAL_STEPS",
    "cross_validate",
    "evaluate",
    "load_policy",
    "resolve_map",
    "resolve_maps",
    "save_policy",
]
