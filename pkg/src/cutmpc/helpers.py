"""Small parsing and array helpers."""

from __future__ import annotations

import hashlib
import tomllib
from typing import TYPE_CHECKING, Any

import numpy as np


if TYPE_CHECKING:
    from cutmpc.cut_types import FloatArray


def _parse_literal(value: str) -> Any:
    """Parse a command-line value as a TOML literal, falling back to the raw string."""
    try:
        return tomllib.loads(f"v = {value}")["v"]
    except tomllib.TOMLDecodeError:
        return value


def parse_override(item: str) -> tuple[list[str], Any]:
    """Split a ``section.key=value`` override into its key path and parsed value."""
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        msg = f"Override {item!r} is not of the form section.key=value"
        raise ValueError(msg)
    return [part.strip() for part in key.split(".")], _parse_literal(raw.strip())


def set_nested(data: dict[str, Any], path: list[str], value: Any) -> None:
    """Set ``value`` at ``path`` inside nested dicts, creating tables as needed."""
    node = data
    for part in path[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            msg = f"Cannot set {'.'.join(path)}: {part!r} is not a table"
            raise ValueError(msg)  # noqa: TRY004
        node = child
    node[path[-1]] = value


def vec2(values: Any) -> FloatArray:
    """Coerce a pair of numbers to a float64 2-vector."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (2,):
        msg = f"Expected a 2-vector, got shape {arr.shape}"
        raise ValueError(msg)
    return arr


def is_finite(*arrays: Any) -> bool:
    """Check that every given scalar or array contains only finite values."""
    return all(bool(np.all(np.isfinite(np.asarray(a, dtype=np.float64)))) for a in arrays)


def derive_seed(seed: int, *keys: object) -> int:
    """Derive a stable 63-bit child seed from a parent seed and a key path."""
    text = ":".join(str(k) for k in (seed, *keys))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little") >> 1
