"""Error hierarchy shared by the library and the CLI."""

from __future__ import annotations


class KnafError(Exception):
    """Base class for every error raised on purpose by knaf_compose."""


class DimensionMismatchError(KnafError, ValueError):
    """A state, action or weight vector does not have the expected length."""


class KernelMismatchError(KnafError, ValueError):
    """Two kernel expansions do not live in the same RKHS."""


class PolicyFormatError(KnafError, ValueError):
    """A policy file is malformed or has an unsupported version."""


class MapFormatError(KnafError, ValueError):
    """A map file or map definition is invalid."""


class ConfigError(KnafError, ValueError):
    """A training or simulation configuration violates its invariants."""


class TrainingDivergedError(KnafError, RuntimeError):
    """A learned weight became NaN or infinite during training."""
