"""Policy files, metrics CSV, cross-validation CSV and JSON-lines output."""

from __future__ import annotations

import base64
import csv
import json
import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any

import numpy as np
from numpy.typing import NDArray

from .exceptions import PolicyFormatError
from .knaf import NAFPolicy, advantage_slice, density_slice, policy_slice, value_slice
from .models import PolicyProvenance, RewardMatrix, TrainMetrics
from .rkhs import KernelParams, SparseKernelModel


logger = logging.getLogger(__name__)

POLICY_FORMAT = "knaf-policy"
POLICY_FORMAT_VERSION = 1
METRICS_HEADER = ("step", "episode", "reward", "delta", "model_order")
_DTYPE = "<f8"


def _encode_array(array: NDArray[np.float64]) -> dict[str, object]:
    data = np.ascontiguousarray(array, dtype=_DTYPE)
    return {
        "shape": list(data.shape),
        "dtype": _DTYPE,
        "data": base64.b64encode(data.tobytes()).decode("ascii"),
    }


def _decode_array(payload: Any, what: str) -> NDArray[np.float64]:
    try:
        shape = tuple(int(n) for n in payload["shape"])
        if payload["dtype"] != _DTYPE:
            raise PolicyFormatError(f"{what}: unsupported dtype {payload['dtype']!r}")
        raw = base64.b64decode(payload["data"], validate=True)
        return np.frombuffer(raw, dtype=_DTYPE).reshape(shape).astype(np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise PolicyFormatError(f"{what}: malformed array ({exc})") from exc


@dataclass(eq=False)
class PolicyFile:
    """A policy with its provenance, as stored on disk."""

    policy: NAFPolicy
    provenance: PolicyProvenance = field(default_factory=PolicyProvenance)

    def to_dict(self) -> dict[str, object]:
        policy = self.policy
        q = policy.action_dim
        weights = policy.model.weights
        return {
            "format": POLICY_FORMAT,
            "version": POLICY_FORMAT_VERSION,
            "state_dim": policy.state_dim,
            "action_dim": q,
            "bandwidth": list(policy.kernel.bandwidth),
            "action_low": [float(v) for v in policy.action_low],
            "action_high": [float(v) for v in policy.action_high],
            "l0": policy.l0,
            "model_order": policy.model_order,
            "centers": _encode_array(policy.model.centers),
            "weights": {
                "V": _encode_array(weights[:, value_slice()]),
                "pi": _encode_array(weights[:, policy_slice(q)]),
                "L": _encode_array(weights[:, advantage_slice(q)]),
                "rho": _encode_array(weights[:, density_slice(q)]),
            },
            "provenance": self.provenance.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> PolicyFile:
        if data.get("format") != POLICY_FORMAT:
            raise PolicyFormatError(f"not a policy file (format={data.get('format')!r})")
        if data.get("version") != POLICY_FORMAT_VERSION:
            raise PolicyFormatError(f"unsupported policy file version {data.get('version')!r}")
        try:
            kernel = KernelParams(tuple(float(b) for b in data["bandwidth"]))
            q = int(data["action_dim"])
            centers = _decode_array(data["centers"], "centers")
            blocks = data["weights"]
            weights = np.hstack([_decode_array(blocks[name], name) for name in ("V", "pi", "L", "rho")])
            policy = NAFPolicy(
                SparseKernelModel(centers, weights, kernel),
                q,
                float(data["l0"]),
                np.array(data["action_low"], dtype=np.float64),
                np.array(data["action_high"], dtype=np.float64),
            )
            state_dim = int(data.get("state_dim", policy.state_dim))
            provenance = PolicyProvenance.from_dict(data.get("provenance", {}))
        except PolicyFormatError:
            raise
        except (KeyError, TypeError, AttributeError) as exc:
            raise PolicyFormatError(f"policy file is missing or mistypes a field ({exc})") from exc
        except ValueError as exc:
            raise PolicyFormatError(f"policy file is inconsistent: {exc}") from exc
        if policy.state_dim != state_dim:
            raise PolicyFormatError("state_dim does not match the bandwidth length")
        return cls(policy, provenance)


def save_policy(policy: NAFPolicy, path: Path, provenance: PolicyProvenance | None = None) -> None:
    """Write a policy file; identical policies and provenance give identical bytes."""
    document = PolicyFile(policy, provenance or PolicyProvenance()).to_dict()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    logger.info("wrote policy with %d centers to %s", policy.model_order, path)


def load_policy(path: Path) -> PolicyFile:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PolicyFormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise PolicyFormatError(f"{path}: expected a JSON object")
    return PolicyFile.from_dict(data)


def metrics_writer(stream: IO[str]) -> Any:
    """CSV writer with the metrics header already emitted, for streaming rows during training."""
    writer = csv.writer(stream)
    writer.writerow(METRICS_HEADER)
    return writer


def write_metrics_csv(metrics: TrainMetrics, stream: IO[str]) -> None:
    writer = metrics_writer(stream)
    writer.writerows(metrics.rows())


def write_reward_matrix_csv(matrix: RewardMatrix, stream: IO[str]) -> None:
    csv.writer(stream).writerows(matrix.to_csv_rows())


def write_json_lines(records: Iterable[Mapping[str, object]], stream: IO[str]) -> None:
    for record in records:
        stream.write(json.dumps(record) + "\n")
