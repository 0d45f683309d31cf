"""Test doubles and small worlds shared by the test modules."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from knaf_compose.lidar_sim import WorldMap


def square_room(half_width: float, spawn: tuple[float, float, float] = (0.0, 0.0, 0.0)) -> WorldMap:
    h = half_width
    segments = [
        (-h, -h, h, -h),
        (h, -h, h, h),
        (h, h, -h, h),
        (-h, h, -h, -h),
    ]
    return WorldMap(f"square-{h:g}", np.array(segments), np.array([spawn]))


class ToyEnv:
    """Point that drifts on a plane; leaving the disc of radius 2 is a crash.

    Records every state the learner acts from, in order.
    """

    state_dim = 2
    action_dim = 1

    def __init__(self) -> None:
        self.action_low = np.array([-1.0])
        self.action_high = np.array([1.0])
        self.state: NDArray[np.float64] | None = None
        self.visited: list[NDArray[np.float64]] = []
        self.steps_taken = 0

    def reset(self, rng: np.random.Generator) -> NDArray[np.float64]:
        self.state = rng.uniform(-1.0, 1.0, size=2)
        return self.state.copy()

    def step(self, action: NDArray[np.float64]) -> tuple[NDArray[np.float64], float, bool]:
        assert self.state is not None
        self.visited.append(self.state.copy())
        a = float(np.asarray(action).reshape(-1)[0])
        self.state = self.state + np.array([0.1 * a, 0.05])
        self.steps_taken += 1
        done = bool(np.hypot(*self.state) > 2.0)
        return self.state.copy(), (-10.0 if done else 1.0), done


class NanRewardEnv(ToyEnv):
    """ToyEnv whose reward turns NaN on the ``nan_at``-th step."""

    def __init__(self, nan_at: int) -> None:
        super().__init__()
        self.nan_at = nan_at

    def step(self, action: NDArray[np.float64]) -> tuple[NDArray[np.float64], float, bool]:
        obs, reward, done = super().step(action)
        if self.steps_taken == self.nan_at:
            reward = float("nan")
        return obs, reward, done
