"""Small helpers shared across modules."""

from __future__ import annotations

import logging
import sys
from collections.abc import Sequence
from typing import TypeVar

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import DimensionMismatchError


T = TypeVar("T")

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def unique_ordered(values: Sequence[T]) -> list[T]:  # noqa: UP047
    """Return unique values in order."""
    return list(dict.fromkeys(values))


def as_vector(value: ArrayLike, dim: int, what: str = "vector") -> NDArray[np.float64]:
    """Convert to a 1-D float64 array of length ``dim`` or raise DimensionMismatchError."""
    vector = np.asarray(value, dtype=np.float64)
    if vector.ndim == 0:
        vector = vector.reshape(1)
    if vector.ndim != 1 or vector.shape[0] != dim:
        raise DimensionMismatchError(f"{what} must have shape ({dim},), got {vector.shape}")
    return vector


def configure_logging(verbosity: int = 0) -> None:
    """Send log records to stderr; 0 -> WARNING, 1 -> INFO, 2+ -> DEBUG."""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)
