"""Composition of independently trained policies with density-based conflict resolution.

Every dictionary center s_ij of every candidate is visited once in random
order. The point is accepted only when its own candidate's density strictly
dominates every other candidate's density at s_ij; accepted points are
interpolated into the composite, Pi <- Pi + (f_i(s_ij) - Pi(s_ij)) k(s_ij, .),
and the composite is finally compressed. No environment interaction happens.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import DimensionMismatchError, KernelMismatchError, KnafError
from .knaf import NAFPolicy, advantage_slice, policy_slice
from .komp import CompressionBudget, compress
from .rkhs import SparseKernelModel, gram
from .utils import as_vector


logger = logging.getLogger(__name__)

DEFAULT_MULTI_PASS_TOL = 1e-3
DEFAULT_MAX_PASSES = 10


class DensityMode(StrEnum):
    KME = "kme"
    DICT = "dict"


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Policies to merge plus the seed of the random visitation order."""

    policies: tuple[NAFPolicy, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        policies = tuple(self.policies)
        if not policies:
            raise KnafError("composition needs at least one policy")
        first = policies[0]
        for index, policy in enumerate(policies[1:], start=1):
            if policy.kernel != first.kernel:
                raise KernelMismatchError(
                    f"policy {index} uses bandwidth {policy.kernel.bandwidth}, expected {first.kernel.bandwidth}"
                )
            if policy.action_dim != first.action_dim:
                raise DimensionMismatchError(
                    f"policy {index} has action dimension {policy.action_dim}, expected {first.action_dim}"
                )
        object.__setattr__(self, "policies", policies)


@dataclass(frozen=True)
class CompositionDecision:
    """Outcome of the density test for one visited dictionary point."""

    policy_index: int
    center_index: int
    own_density: float
    rival_density: float
    accepted: bool
    tie: bool


@dataclass(frozen=True, eq=False)
class CompositionResult:
    policy: NAFPolicy
    decisions: list[CompositionDecision] = field(default_factory=list)
    passes: int = 1
    residual: float = 0.0

    @property
    def accepted(self) -> int:
        return sum(d.accepted for d in self.decisions)

    @property
    def ties(self) -> int:
        return sum(d.tie for d in self.decisions)


def kme_density(policy: NAFPolicy, s: ArrayLike) -> float:
    """rho(s): kernel mean embedding of the states visited while training."""
    return float(policy.rho.evaluate(s)[0])


def dict_density(policy: NAFPolicy, s: ArrayLike) -> float:
    """Sum of k(s, s_k) over the policy's dictionary, each center weighted 1."""
    state = as_vector(s, policy.state_dim, "state")
    return float(np.sum(gram(policy.model.centers, state[np.newaxis, :], policy.kernel)))


DENSITY_FUNCTIONS = {
    DensityMode.KME: kme_density,
    DensityMode.DICT: dict_density,
}


def _targets(policy: NAFPolicy, l0: float) -> NDArray[np.float64]:
    """Stacked values of ``policy`` at its own centers, with L expressed relative to ``l0``."""
    values = policy.model.evaluate(policy.model.centers)
    q = policy.action_dim
    if policy.l0 != l0:
        values[:, advantage_slice(q)] += (policy.l0 - l0) * np.eye(q).ravel()
    return values


def _interpolate(
    composite: SparseKernelModel,
    s: NDArray[np.float64],
    target: NDArray[np.float64],
) -> SparseKernelModel:
    # k(s, s) = 1, so the composite equals ``target`` at s right after this update
    return composite.add_center(s, target - composite.evaluate(s))


def compose_traced(
    cands: CandidateSet,
    epsilon: float,
    density_mode: DensityMode | str = DensityMode.KME,
    *,
    passes: int = 1,
    tol: float = DEFAULT_MULTI_PASS_TOL,
) -> CompositionResult:
    """Merge the candidates into one policy and keep the accept/reject log.

    With ``passes > 1`` the accepted points are re-interpolated (in a fresh random
    order each pass) until the largest policy residual at accepted points drops
    below ``tol`` or the pass cap is hit.
    """
    density = DENSITY_FUNCTIONS[DensityMode(density_mode)]
    policies = cands.policies
    first = policies[0]
    q = first.action_dim
    l0 = first.l0
    rng = np.random.default_rng(cands.seed)

    points = [(i, j) for i, policy in enumerate(policies) for j in range(policy.model_order)]
    targets = [_targets(policy, l0) for policy in policies]
    composite = SparseKernelModel.zeros(first.kernel, first.model.output_dim)
    decisions: list[CompositionDecision] = []
    accepted: list[tuple[NDArray[np.float64], NDArray[np.float64]]] = []

    for index in rng.permutation(len(points)):
        i, j = points[index]
        s = policies[i].model.centers[j]
        own = density(policies[i], s)
        rival = max((density(other, s) for k, other in enumerate(policies) if k != i), default=-np.inf)
        decision = CompositionDecision(i, j, own, rival, accepted=own > rival, tie=own == rival)
        decisions.append(decision)
        if decision.tie:
            logger.info("density tie at center %d of policy %d (%g); point rejected", j, i, own)
        logger.debug("policy %d center %d: own=%g rival=%g accepted=%s", i, j, own, rival, decision.accepted)
        if decision.accepted:
            composite = _interpolate(composite, s, targets[i][j])
            accepted.append((s, targets[i][j]))

    completed, residual = 1, _policy_residual(composite, accepted, q)
    while completed < passes and residual >= tol:
        for index in rng.permutation(len(accepted)):
            s, target = accepted[index]
            composite = _interpolate(composite, s, target)
        completed += 1
        residual = _policy_residual(composite, accepted, q)
    logger.debug("composition: %d passes, residual %g, order %d", completed, residual, composite.order)

    composite = compress(composite, CompressionBudget(epsilon))
    low = np.min([p.action_low for p in policies], axis=0)
    high = np.max([p.action_high for p in policies], axis=0)
    merged = NAFPolicy(composite, q, l0, low, high)
    return CompositionResult(merged, decisions, completed, residual)


def _policy_residual(
    composite: SparseKernelModel,
    accepted: Sequence[tuple[NDArray[np.float64], NDArray[np.float64]]],
    action_dim: int,
) -> float:
    if not accepted:
        return 0.0
    states = np.array([s for s, _ in accepted])
    wanted = np.array([t for _, t in accepted])[:, policy_slice(action_dim)]
    return float(np.max(np.abs(composite.evaluate(states)[:, policy_slice(action_dim)] - wanted)))


def compose(
    cands: CandidateSet,
    epsilon: float,
    density_mode: DensityMode | str = DensityMode.KME,
    *,
    passes: int = 1,
    tol: float = DEFAULT_MULTI_PASS_TOL,
) -> NAFPolicy:
    """The composite policy only; see ``compose_traced``."""
    return compose_traced(cands, epsilon, density_mode, passes=passes, tol=tol).policy


def all_compositions(count: int) -> list[tuple[int, ...]]:
    """Every non-empty subset of ``count`` policies, singles first (the cross-validation rows)."""
    return [combo for size in range(1, count + 1) for combo in itertools.combinations(range(count), size)]


def composition_label(indices: Sequence[int]) -> str:
    """1-based row label such as "1 / 2 / 4"."""
    return " / ".join(str(i + 1) for i in indices)
