"""Kernel orthogonal matching pursuit, pruning direction only.

``compress`` greedily removes dictionary centers from a sparse kernel model
while the Hilbert-norm distance to the input stays within a budget. Each
removal re-projects the remaining weights, so the survivors always carry the
orthogonal projection of the input onto their span.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import cho_factor, cho_solve

from .exceptions import ConfigError
from .rkhs import GRAM_JITTER, SparseKernelModel, gram, hilbert_dist_sq


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompressionBudget:
    """Maximum Hilbert-norm (not squared) distance allowed between input and output."""

    epsilon: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.epsilon) or self.epsilon < 0:
            raise ConfigError(f"compression budget must be a finite value >= 0, got {self.epsilon}")


def _regularized_gram(centers: NDArray[np.float64], model: SparseKernelModel) -> NDArray[np.float64]:
    k = gram(centers, centers, model.kernel)
    k[np.diag_indices_from(k)] += GRAM_JITTER
    return k


def project(target: SparseKernelModel, onto_centers: ArrayLike) -> SparseKernelModel:
    """Least-squares projection of ``target`` onto the span of k(c, .) for c in ``onto_centers``."""
    onto = np.asarray(onto_centers, dtype=np.float64).reshape(-1, target.state_dim)
    if onto.shape[0] == 0:
        return SparseKernelModel.zeros(target.kernel, target.output_dim)
    if target.order == 0:
        return SparseKernelModel(onto, np.zeros((onto.shape[0], target.output_dim)), target.kernel)
    factor = cho_factor(_regularized_gram(onto, target))
    rhs = gram(onto, target.centers, target.kernel) @ target.weights
    return SparseKernelModel(onto, cho_solve(factor, rhs), target.kernel)


def drop_redundant(model: SparseKernelModel) -> SparseKernelModel:
    """Fuse exactly duplicated centers and drop all-zero rows; the function is unchanged."""
    if model.order == 0:
        return model
    centers, weights = model.centers, model.weights
    unique, first, inverse = np.unique(centers, axis=0, return_index=True, return_inverse=True)
    if unique.shape[0] < centers.shape[0]:
        fused = np.zeros((unique.shape[0], model.output_dim))
        np.add.at(fused, inverse.ravel(), weights)
        order = np.argsort(first, kind="stable")
        centers, weights = unique[order], fused[order]
    keep = np.any(weights != 0.0, axis=1)
    if keep.all() and centers is model.centers:
        return model
    return SparseKernelModel(centers[keep], weights[keep], model.kernel)


def _greedy_removals(model: SparseKernelModel, limit: float) -> list[int]:
    """Indices removed, in removal order, with the error bound tracked by Pythagoras."""
    inverse = cho_solve(cho_factor(_regularized_gram(model.centers, model)), np.eye(model.order))
    weights = model.weights.copy()
    active = list(range(model.order))
    removed: list[int] = []
    spent = 0.0
    while active:
        diag = np.diag(inverse)
        scores = np.sum(weights * weights, axis=1) / diag
        j = int(np.argmin(scores))
        if spent + scores[j] > limit:
            break
        spent += float(scores[j])
        removed.append(active.pop(j))
        column = inverse[:, j] / inverse[j, j]
        weights = np.delete(weights - np.outer(column, weights[j]), j, axis=0)
        inverse = np.delete(np.delete(inverse - np.outer(column, inverse[j]), j, axis=0), j, axis=1)
    return removed


def compress(model: SparseKernelModel, budget: CompressionBudget | float) -> SparseKernelModel:
    """Prune ``model`` until removing another center would exceed the budget.

    The result satisfies ``hilbert_dist_sq(model, result) <= epsilon**2``.
    """
    if not isinstance(budget, CompressionBudget):
        budget = CompressionBudget(float(budget))
    if not model.is_finite():
        # non-finite input is left for the caller to detect
        logger.warning("compress: model has non-finite weights, returned uncompressed")
        return model
    reduced = drop_redundant(model)
    if reduced.order == 0:
        return reduced
    limit = budget.epsilon**2
    removed = _greedy_removals(reduced, limit)
    if not removed:
        return reduced

    gone = set(removed)
    survivors = [n for n in range(reduced.order) if n not in gone]
    result = project(reduced, reduced.centers[survivors])
    while removed and hilbert_dist_sq(model, result) > limit:
        # jitter can push the tracked bound past the true distance; undo the latest removal
        survivors = sorted([*survivors, removed.pop()])
        result = project(reduced, reduced.centers[survivors])
    if not removed:
        return reduced
    logger.debug("compress: order %d -> %d (epsilon=%g)", model.order, result.order, budget.epsilon)
    return result
