"""Gaussian kernel and sparse kernel expansions in the RKHS.

Every learned function (value, policy, advantage matrix, density) is a
``SparseKernelModel``: a dictionary of state centers with one weight row per
center. Models are immutable; every operation returns a new model.

Bandwidth convention: ``KernelParams.bandwidth`` holds lengthscales ``b_i``
and the kernel uses the precision ``diag(1 / b_i**2)``::

    k(x, y) = exp(-0.5 * sum(((x_i - y_i) / b_i) ** 2))
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import cdist

from .exceptions import ConfigError, DimensionMismatchError, KernelMismatchError
from .utils import as_vector


GRAM_JITTER = 1e-8


@dataclass(frozen=True)
class KernelParams:
    """Lengthscales of a diagonal Gaussian kernel, one per state coordinate."""

    bandwidth: tuple[float, ...]

    def __post_init__(self) -> None:
        bandwidth = tuple(float(b) for b in np.atleast_1d(np.asarray(self.bandwidth, dtype=np.float64)))
        if not bandwidth:
            raise ConfigError("bandwidth must contain at least one lengthscale")
        if not all(math.isfinite(b) and b > 0 for b in bandwidth):
            raise ConfigError(f"every lengthscale must be positive and finite, got {bandwidth}")
        object.__setattr__(self, "bandwidth", bandwidth)

    @property
    def dim(self) -> int:
        return len(self.bandwidth)

    def scale(self, points: ArrayLike) -> NDArray[np.float64]:
        """Divide each coordinate by its lengthscale."""
        return np.asarray(points, dtype=np.float64) / np.asarray(self.bandwidth)

    def to_dict(self) -> dict[str, object]:
        return {"bandwidth": list(self.bandwidth)}


def kernel_eval(x: ArrayLike, y: ArrayLike, kernel: KernelParams) -> float:
    """Evaluate k(x, y); equals 1 for x == y and is symmetric."""
    xv = as_vector(x, kernel.dim, "x")
    yv = as_vector(y, kernel.dim, "y")
    z = (xv - yv) / np.asarray(kernel.bandwidth)
    return float(np.exp(-0.5 * np.dot(z, z)))


def _as_points(points: ArrayLike, dim: int, what: str) -> NDArray[np.float64]:
    array = np.asarray(points, dtype=np.float64)
    if array.ndim == 1 and array.shape[0] == 0:
        array = array.reshape(0, dim)
    if array.ndim != 2 or array.shape[1] != dim:
        raise DimensionMismatchError(f"{what} must have shape (n, {dim}), got {array.shape}")
    return array


def gram(a: ArrayLike, b: ArrayLike, kernel: KernelParams) -> NDArray[np.float64]:
    """Pairwise kernel matrix between the rows of ``a`` and ``b``."""
    a_pts = _as_points(a, kernel.dim, "a")
    b_pts = _as_points(b, kernel.dim, "b")
    if a_pts.shape[0] == 0 or b_pts.shape[0] == 0:
        return np.zeros((a_pts.shape[0], b_pts.shape[0]))
    sq_dist = cdist(kernel.scale(a_pts), kernel.scale(b_pts), metric="sqeuclidean")
    return np.exp(-0.5 * sq_dist)


def _readonly(array: NDArray[np.float64]) -> NDArray[np.float64]:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SparseKernelModel:
    """f(s) = sum_n weights[n] * k(centers[n], s), with d-dimensional output.

    ``centers`` is N x p and ``weights`` is N x d; N = 0 is the zero function.
    """

    centers: NDArray[np.float64]
    weights: NDArray[np.float64]
    kernel: KernelParams = field(repr=False)

    def __post_init__(self) -> None:
        centers = _as_points(self.centers, self.kernel.dim, "centers").copy()
        weights = np.array(self.weights, dtype=np.float64)
        if weights.ndim != 2:
            raise DimensionMismatchError(f"weights must be a 2-D array, got shape {weights.shape}")
        if weights.shape[0] != centers.shape[0]:
            raise DimensionMismatchError(
                f"centers and weights disagree on model order: {centers.shape[0]} != {weights.shape[0]}"
            )
        object.__setattr__(self, "centers", _readonly(centers))
        object.__setattr__(self, "weights", _readonly(weights))

    @classmethod
    def zeros(cls, kernel: KernelParams, output_dim: int) -> SparseKernelModel:
        """The identically-zero function with an empty dictionary."""
        return cls(np.empty((0, kernel.dim)), np.empty((0, output_dim)), kernel)

    @property
    def order(self) -> int:
        return int(self.centers.shape[0])

    @property
    def state_dim(self) -> int:
        return self.kernel.dim

    @property
    def output_dim(self) -> int:
        return int(self.weights.shape[1])

    def kernel_column(self, s: ArrayLike) -> NDArray[np.float64]:
        """k(centers[n], s) for every center."""
        state = as_vector(s, self.state_dim, "state")
        return gram(self.centers, state[np.newaxis, :], self.kernel)[:, 0]

    def evaluate(self, s: ArrayLike) -> NDArray[np.float64]:
        """Evaluate at one state (d-vector) or a batch of states (M x d)."""
        states = np.asarray(s, dtype=np.float64)
        if states.ndim == 2:
            return gram(states, self.centers, self.kernel) @ self.weights
        if self.order == 0:
            as_vector(states, self.state_dim, "state")
            return np.zeros(self.output_dim)
        return self.weights.T @ self.kernel_column(states)

    def add_center(self, s: ArrayLike, w: ArrayLike) -> SparseKernelModel:
        """Add w * k(s, .); an exactly coincident center has its row incremented instead."""
        state = as_vector(s, self.state_dim, "state")
        row = as_vector(w, self.output_dim, "weight row")
        matches = np.flatnonzero(np.all(self.centers == state, axis=1))
        if matches.size:
            weights = self.weights.copy()
            weights[matches[0]] += row
            return SparseKernelModel(self.centers, weights, self.kernel)
        return SparseKernelModel(
            np.vstack([self.centers, state]),
            np.vstack([self.weights, row]),
            self.kernel,
        )

    def columns(self, cols: slice) -> SparseKernelModel:
        """Sub-model holding a slice of the output coordinates on the same centers."""
        return SparseKernelModel(self.centers, self.weights[:, cols], self.kernel)

    def scale_columns(self, factors: ArrayLike) -> SparseKernelModel:
        """Multiply each output coordinate's weights by its factor."""
        scale = as_vector(factors, self.output_dim, "column factors")
        return SparseKernelModel(self.centers, self.weights * scale, self.kernel)

    def scaled(self, factor: float) -> SparseKernelModel:
        return SparseKernelModel(self.centers, self.weights * float(factor), self.kernel)

    def concat(self, other: SparseKernelModel) -> SparseKernelModel:
        """The sum of two expansions, realised by stacking their dictionaries."""
        _check_compatible(self, other)
        return SparseKernelModel(
            np.vstack([self.centers, other.centers]),
            np.vstack([self.weights, other.weights]),
            self.kernel,
        )

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.weights)))


def _check_compatible(a: SparseKernelModel, b: SparseKernelModel) -> None:
    if a.kernel != b.kernel:
        raise KernelMismatchError(f"kernel parameters differ: {a.kernel.bandwidth} vs {b.kernel.bandwidth}")
    if a.output_dim != b.output_dim:
        raise DimensionMismatchError(f"output dimensions differ: {a.output_dim} vs {b.output_dim}")


def inner_product(a: SparseKernelModel, b: SparseKernelModel) -> NDArray[np.float64]:
    """Per-output-coordinate RKHS inner product <a, b>_H via the cross Gram matrix."""
    _check_compatible(a, b)
    cross = gram(a.centers, b.centers, a.kernel)
    return np.sum(a.weights * (cross @ b.weights), axis=0)


def hilbert_norm_sq(m: SparseKernelModel) -> float:
    """||m||_H^2 summed over output coordinates."""
    if m.order == 0:
        return 0.0
    k = gram(m.centers, m.centers, m.kernel)
    return max(float(np.sum(m.weights * (k @ m.weights))), 0.0)


def hilbert_dist_sq(a: SparseKernelModel, b: SparseKernelModel) -> float:
    """||a - b||_H^2 from the Gram matrix of the union of both dictionaries."""
    _check_compatible(a, b)
    if a is b or (np.array_equal(a.centers, b.centers) and np.array_equal(a.weights, b.weights)):
        return 0.0
    difference = SparseKernelModel(
        np.vstack([a.centers, b.centers]),
        np.vstack([a.weights, -b.weights]),
        a.kernel,
    )
    return hilbert_norm_sq(difference)


def inner(m: SparseKernelModel, s: ArrayLike) -> NDArray[np.float64]:
    """<m, k(s, .)>_H computed from the Gram matrix; equals ``m.evaluate(s)`` by the reproducing property."""
    point = as_vector(s, m.state_dim, "state")[np.newaxis, :]
    return (gram(point, m.centers, m.kernel) @ m.weights)[0]
