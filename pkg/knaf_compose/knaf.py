"""Q-learning with kernel normalized advantage functions.

Q(s, a) = V(s) + A(s, a) with the quadratic advantage

    A(s, a) = -1/2 (a - pi(s))^T L(s)^T L(s) (a - pi(s))

V, pi, L and the visit density rho share one dictionary: ``NAFPolicy`` keeps a
single stacked ``SparseKernelModel`` whose columns are [V | pi | L row-major | rho]
and L(s) = l0 * I + (its kernel expansion).
"""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import DimensionMismatchError, TrainingDivergedError
from .komp import CompressionBudget, compress
from .models import TrainConfig, TrainMetrics, Transition
from .rkhs import KernelParams, SparseKernelModel
from .utils import as_vector


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NAFPolicy:
    """V, pi, L and rho on one shared dictionary, plus action bounds."""

    model: SparseKernelModel
    action_dim: int
    l0: float
    action_low: NDArray[np.float64]
    action_high: NDArray[np.float64]

    def __post_init__(self) -> None:
        q = self.action_dim
        if q < 1:
            raise DimensionMismatchError(f"action_dim must be >= 1, got {q}")
        expected = stacked_width(q)
        if self.model.output_dim != expected:
            raise DimensionMismatchError(
                f"stacked model must have {expected} output columns for q={q}, got {self.model.output_dim}"
            )
        low = as_vector(self.action_low, q, "action_low")
        high = as_vector(self.action_high, q, "action_high")
        if np.any(low > high):
            raise DimensionMismatchError(f"action_low {low} exceeds action_high {high}")
        object.__setattr__(self, "l0", float(self.l0))
        object.__setattr__(self, "action_low", low)
        object.__setattr__(self, "action_high", high)

    @classmethod
    def initial(
        cls,
        kernel: KernelParams,
        action_low: ArrayLike,
        action_high: ArrayLike,
        l0: float,
    ) -> NAFPolicy:
        """V = 0, pi = 0, L = l0 * I, rho = 0 with an empty dictionary."""
        q = np.atleast_1d(np.asarray(action_low, dtype=np.float64)).shape[0]
        return cls(SparseKernelModel.zeros(kernel, stacked_width(q)), q, l0, action_low, action_high)

    @property
    def kernel(self) -> KernelParams:
        return self.model.kernel

    @property
    def state_dim(self) -> int:
        return self.model.state_dim

    @property
    def model_order(self) -> int:
        return self.model.order

    @property
    def V(self) -> SparseKernelModel:  # noqa: N802
        return self.model.columns(value_slice())

    @property
    def pi(self) -> SparseKernelModel:
        return self.model.columns(policy_slice(self.action_dim))

    @property
    def L(self) -> SparseKernelModel:  # noqa: N802
        """Kernel expansion part of L(s); the constant l0 * I is added by ``advantage_matrix``."""
        return self.model.columns(advantage_slice(self.action_dim))

    @property
    def rho(self) -> SparseKernelModel:
        return self.model.columns(density_slice(self.action_dim))

    def with_model(self, model: SparseKernelModel) -> NAFPolicy:
        return dataclasses.replace(self, model=model)

    def components(self, s: ArrayLike) -> tuple[float, NDArray[np.float64], NDArray[np.float64], float]:
        """(V(s), pi(s), L(s), rho(s)) from a single evaluation of the stacked model."""
        q = self.action_dim
        values = self.model.evaluate(s)
        lmat = values[advantage_slice(q)].reshape(q, q) + self.l0 * np.eye(q)
        return float(values[0]), values[policy_slice(q)], lmat, float(values[-1])


def stacked_width(action_dim: int) -> int:
    return 1 + action_dim + action_dim * action_dim + 1


def value_slice() -> slice:
    return slice(0, 1)


def policy_slice(action_dim: int) -> slice:
    return slice(1, 1 + action_dim)


def advantage_slice(action_dim: int) -> slice:
    return slice(1 + action_dim, 1 + action_dim + action_dim * action_dim)


def density_slice(action_dim: int) -> slice:
    start = 1 + action_dim + action_dim * action_dim
    return slice(start, start + 1)


def advantage_matrix(policy: NAFPolicy, s: ArrayLike) -> NDArray[np.float64]:
    """L(s) as a q x q matrix."""
    return policy.components(s)[2]


def _advantage(pi: NDArray[np.float64], lmat: NDArray[np.float64], a: NDArray[np.float64]) -> float:
    ld = lmat @ (a - pi)
    return -0.5 * float(ld @ ld)


def advantage(policy: NAFPolicy, s: ArrayLike, a: ArrayLike) -> float:
    """A(s, a) <= 0, with A(s, pi(s)) = 0."""
    action = as_vector(a, policy.action_dim, "action")
    _, pi, lmat, _ = policy.components(s)
    return _advantage(pi, lmat, action)


def q_value(policy: NAFPolicy, s: ArrayLike, a: ArrayLike) -> float:
    action = as_vector(a, policy.action_dim, "action")
    v, pi, lmat, _ = policy.components(s)
    return v + _advantage(pi, lmat, action)


def greedy_action(policy: NAFPolicy, s: ArrayLike) -> NDArray[np.float64]:
    """argmax_a Q(s, a) = pi(s), clipped to the action bounds."""
    return np.clip(policy.pi.evaluate(s), policy.action_low, policy.action_high)


def explore_action(
    policy: NAFPolicy,
    s: ArrayLike,
    sigma: ArrayLike,
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    """Sample N(pi(s), diag(sigma^2)) and clip to the action bounds."""
    std = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (policy.action_dim,))
    mean = policy.pi.evaluate(s)
    return np.clip(mean + std * rng.standard_normal(policy.action_dim), policy.action_low, policy.action_high)


def _target(policy: NAFPolicy, t: Transition, gamma: float) -> float:
    if t.done:
        return float(t.r)
    return float(t.r) + gamma * float(policy.V.evaluate(t.s_next)[0])


def td_error(policy: NAFPolicy, t: Transition, gamma: float) -> tuple[float, float]:
    """Target y = r + gamma * V(s') (y = r on terminal steps) and delta = y - Q(s, a)."""
    y = _target(policy, t, gamma)
    return y, y - q_value(policy, t.s, t.a)


def _semi_gradient_step(policy: NAFPolicy, t: Transition, cfg: TrainConfig) -> tuple[NAFPolicy, float]:
    q = policy.action_dim
    action = as_vector(t.a, q, "action")
    y = _target(policy, t, cfg.gamma)
    v, pi, lmat, _ = policy.components(t.s)
    delta = y - (v + _advantage(pi, lmat, action))

    d = action - pi
    ld = lmat @ d
    row = np.concatenate(
        [
            [cfg.alpha * delta],
            cfg.beta * delta * (lmat.T @ ld),
            (-cfg.zeta * delta * np.outer(ld, d)).ravel(),
            [1.0],
        ]
    )

    model = policy.model
    if cfg.lam > 0 and model.order:
        factors = np.concatenate(
            [
                [1.0 - cfg.alpha * cfg.lam],
                np.full(q, 1.0 - cfg.beta * cfg.lam),
                np.full(q * q, 1.0 - cfg.zeta * cfg.lam),
                [1.0],
            ]
        )
        model = model.scale_columns(factors)
    return policy.with_model(model.add_center(t.s, row)), delta


def gradient_step(policy: NAFPolicy, t: Transition, cfg: TrainConfig) -> NAFPolicy:
    """One functional semi-gradient update of V, pi, L and the density update of rho at s_t."""
    return _semi_gradient_step(policy, t, cfg)[0]


class Environment(Protocol):
    """What ``train`` needs from a simulator."""

    state_dim: int
    action_low: NDArray[np.float64]
    action_high: NDArray[np.float64]

    def reset(self, rng: np.random.Generator) -> NDArray[np.float64]: ...

    def step(self, action: NDArray[np.float64]) -> tuple[NDArray[np.float64], float, bool]: ...


StepCallback = Callable[[int, int, float, float, int], None]


def _check_finite(policy: NAFPolicy, step: int, episode: int) -> None:
    if policy.model.is_finite():
        return
    q = policy.action_dim
    blocks = {
        "V": value_slice(),
        "pi": policy_slice(q),
        "L": advantage_slice(q),
        "rho": density_slice(q),
    }
    bad = [name for name, cols in blocks.items() if not np.all(np.isfinite(policy.model.weights[:, cols]))]
    raise TrainingDivergedError(f"non-finite weights in {', '.join(bad)} at step {step} (episode {episode})")


def train(
    env: Environment,
    cfg: TrainConfig,
    *,
    compress_model: bool = True,
    on_step: StepCallback | None = None,
) -> tuple[NAFPolicy, TrainMetrics]:
    """Run KNAF for ``cfg.max_steps`` environment steps.

    Episodes end on collision (terminal) or after ``cfg.episode_max_len`` steps
    (truncated, still bootstrapped). ``on_step`` receives
    (step, episode, reward, delta, model_order) after every update.
    """
    kernel = KernelParams(cfg.bandwidth)
    if env.state_dim != kernel.dim:
        raise DimensionMismatchError(
            f"environment state has {env.state_dim} dimensions but the bandwidth has {kernel.dim}"
        )
    policy = NAFPolicy.initial(kernel, env.action_low, env.action_high, cfg.l0)
    metrics = TrainMetrics()
    if cfg.max_steps == 0:
        return policy, metrics

    if len(cfg.sigma_explore) not in (1, policy.action_dim):
        raise DimensionMismatchError(
            f"sigma_explore has {len(cfg.sigma_explore)} entries; expected 1 or action_dim={policy.action_dim}"
        )
    sigma = np.broadcast_to(np.asarray(cfg.sigma_explore), (policy.action_dim,))
    budget = CompressionBudget(cfg.epsilon)
    rng = np.random.default_rng(cfg.seed)
    obs = env.reset(rng)
    episode, episode_reward, episode_len = 0, 0.0, 0

    for step in range(cfg.max_steps):
        action = explore_action(policy, obs, sigma, rng)
        next_obs, reward, done = env.step(action)
        transition = Transition(obs, action, reward, next_obs, done)
        policy, delta = _semi_gradient_step(policy, transition, cfg)
        _check_finite(policy, step, episode)
        if compress_model:
            policy = policy.with_model(compress(policy.model, budget))

        metrics.record_step(episode, reward, delta, policy.model_order)
        if on_step is not None:
            on_step(step, episode, reward, delta, policy.model_order)
        logger.debug("step %d: reward=%g delta=%.4g order=%d", step, reward, delta, policy.model_order)

        episode_reward += reward
        episode_len += 1
        if done or episode_len >= cfg.episode_max_len:
            metrics.record_episode(episode_reward, episode_len)
            logger.info(
                "episode %d finished: reward=%g length=%d model_order=%d",
                episode,
                episode_reward,
                episode_len,
                policy.model_order,
            )
            episode += 1
            episode_reward, episode_len = 0.0, 0
            obs = env.reset(rng)
        else:
            obs = next_obs

    return policy, metrics
