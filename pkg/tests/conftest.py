"""Shared fixtures: kernels, random models and policies, small worlds and a toy environment."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
import pytest

from knaf_compose.knaf import NAFPolicy, stacked_width
from knaf_compose.lidar_sim import WorldMap
from knaf_compose.rkhs import KernelParams, SparseKernelModel

from .support import ToyEnv, square_room


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def kernel5() -> KernelParams:
    return KernelParams((0.75,) * 5)


@pytest.fixture
def toy_env() -> ToyEnv:
    return ToyEnv()


@pytest.fixture
def room() -> WorldMap:
    return square_room(2.0)


@pytest.fixture
def make_model() -> Callable[..., SparseKernelModel]:
    def build(
        rng: np.random.Generator,
        order: int,
        state_dim: int = 3,
        output_dim: int = 2,
        spread: float = 1.5,
        bandwidth: float = 0.75,
    ) -> SparseKernelModel:
        centers = rng.uniform(-spread, spread, size=(order, state_dim))
        weights = rng.normal(0.0, 1.0, size=(order, output_dim))
        return SparseKernelModel(centers, weights, KernelParams((bandwidth,) * state_dim))

    return build


@pytest.fixture
def make_policy() -> Callable[..., NAFPolicy]:
    def build(
        rng: np.random.Generator,
        order: int,
        state_dim: int = 5,
        action_dim: int = 1,
        l0: float = 0.5,
        bound: float = 0.3,
        weight_scale: float = 0.2,
    ) -> NAFPolicy:
        width = stacked_width(action_dim)
        centers = rng.uniform(0.0, 3.0, size=(order, state_dim))
        weights = rng.normal(0.0, weight_scale, size=(order, width))
        weights[:, -1] = rng.uniform(0.0, 5.0, size=order)
        model = SparseKernelModel(centers, weights, KernelParams((0.75,) * state_dim))
        return NAFPolicy(model, action_dim, l0, np.full(action_dim, -bound), np.full(action_dim, bound))

    return build
