"""knaf-compose - sparse kernel NAF policies, their composition and a lidar robot simulator."""

from .cli import main
from .compose import CandidateSet, DensityMode, compose, compose_traced
from .harness import cross_validate, evaluate
from .knaf import NAFPolicy, greedy_action, train
from .komp import CompressionBudget, compress
from .models import EvalReport, RewardMatrix, TrainConfig, TrainMetrics, Transition
from .output import load_policy, save_policy
from .rkhs import KernelParams, SparseKernelModel


__version__ = "1.0.0"

__all__ = [
    "CandidateSet",
    "CompressionBudget",
    "DensityMode",
    "EvalReport",
    "KernelParams",
    "NAFPolicy",
    "RewardMatrix",
    "SparseKernelModel",
    "TrainConfig",
    "TrainMetrics",
    "Transition",
    "compose",
    "compose_traced",
    "compress",
    "cross_validate",
    "evaluate",
    "greedy_action",
    "load_policy",
    "main",
    "save_policy",
    "train",
]
