"""JSON model files with a format version, stage tag and checksum.

Layout::

    {
      "header": {"format": "cutmpc-model", "version": 1, "stage": "multi-step",
                 "dims": {...}, "norm_stats": {...}},
      "params": {"en1_w": {"shape": [4, 32], "data": [...]}, ...},
      "checksum": "<sha256 of the canonical JSON of header and params>"
    }

Floats are stored with their shortest round-trip representation, so loading a
saved model reproduces every weight bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import pathlib
from typing import TYPE_CHECKING, Any, Literal

import numpy as np
from pydantic import ValidationError
from schemez import Schema

from cutmpc import log
from cutmpc.cut_types import TrainingStage
from cutmpc.dataset.normalization import NormStats
from cutmpc.dynmodel.params import NetworkDims, NetworkParams
from cutmpc.errors import ModelFileError, ModelMismatchError, StageGateError


if TYPE_CHECKING:
    from cutmpc.cut_types import FloatArray


logger = log.get_logger(__name__)

FORMAT_NAME = "cutmpc-model"
FORMAT_VERSION = 1


class ModelHeader(Schema):
    """Metadata stored in front of the weights."""

    format: Literal["cutmpc-model"] = FORMAT_NAME
    version: int = FORMAT_VERSION
    stage: TrainingStage
    dims: NetworkDims
    norm_stats: NormStats


def _encode_arrays(arrays: dict[str, FloatArray]) -> dict[str, Any]:
    return {
        name: {"shape": list(a.shape), "data": [float(x) for x in a.ravel()]}
        for name, a in arrays.items()
    }


def _checksum(payload: dict[str, Any]) -> str:
    text = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()


def save_model(
    params: NetworkParams,
    stats: NormStats,
    path: str | pathlib.Path,
    stage: TrainingStage = TrainingStage.MULTI_STEP,
) -> pathlib.Path:
    """Write a checksummed model file."""
    path = pathlib.Path(path)
    header = ModelHeader(stage=stage, dims=params.dims, norm_stats=stats)
    payload = {
        "header": header.model_dump(mode="json"),
        "params": _encode_arrays(params.arrays),
    }
    payload["checksum"] = _checksum(payload)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")
    logger.debug("Saved %s model to %s", stage, path)
    return path


def load_model(
    path: str | pathlib.Path,
    required_stage: TrainingStage | None = None,
) -> tuple[NetworkParams, NormStats, TrainingStage]:
    """Read a model file written by :func:`save_model`.

    Args:
        path: Model file
        required_stage: Stage tag the file must carry

    Raises:
        ModelFileError: Unreadable file, wrong format version or checksum mismatch
        StageGateError: If the stage tag differs from ``required_stage``
        ModelMismatchError: If the weights do not match the stored dimensions
    """
    path = pathlib.Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        checksum = payload.pop("checksum")
    except (OSError, ValueError, KeyError, TypeError, AttributeError) as e:
        msg = f"Cannot read model file {path}: {e}"
        raise ModelFileError(msg) from e
    if _checksum(payload) != checksum:
        msg = f"Checksum mismatch in model file {path}"
        raise ModelFileError(msg)
    raw_header = payload.get("header", {})
    if raw_header.get("format") != FORMAT_NAME or raw_header.get("version") != FORMAT_VERSION:
        msg = (
            f"Model file {path} has format {raw_header.get('format')!r} version "
            f"{raw_header.get('version')!r}, expected {FORMAT_NAME!r} version {FORMAT_VERSION}"
        )
        raise ModelFileError(msg)
    try:
        header = ModelHeader.model_validate(raw_header)
    except ValidationError as e:
        msg = f"Invalid model header in {path}: {e}"
        raise ModelFileError(msg) from e
    if required_stage is not None and header.stage != required_stage:
        msg = f"Model {path} is a {header.stage} checkpoint, {required_stage} is required"
        raise StageGateError(msg)
    try:
        arrays = {
            name: np.array(entry["data"], dtype=np.float64).reshape(entry["shape"])
            for name, entry in payload["params"].items()
        }
    except (KeyError, TypeError, ValueError) as e:
        msg = f"Malformed weights in model file {path}: {e}"
        raise ModelFileError(msg) from e
    params = NetworkParams(header.dims, arrays)
    return params, header.norm_stats, header.stage


def check_compatible(params: NetworkParams, stats: NormStats, block_size: int) -> None:
    """Raise if a model cannot be used with the configured block size.

    Raises:
        ModelMismatchError: If the model's block size differs or its statistics are unusable
    """
    if params.dims.block_size != block_size:
        msg = f"Model block size {params.dims.block_size} does not match configured {block_size}"
        raise ModelMismatchError(msg)
    if any(s <= 0 for s in stats.std):
        msg = f"Normalization statistics have non-positive std: {stats.std}"
        raise ModelMismatchError(msg)


def dump_snapshot(params: dict[str, FloatArray], path: str | pathlib.Path) -> pathlib.Path:
    """Write raw parameter arrays for post-mortem inspection (non-finite values as strings)."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    encoded = {
        name: {"shape": list(a.shape), "data": [repr(float(x)) for x in a.ravel()]}
        for name, a in params.items()
    }
    path.write_text(json.dumps(encoded, sort_keys=True), encoding="utf-8")
    return path
