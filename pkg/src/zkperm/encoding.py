"""Canonical octet encoding shared by every hashed or signed structure.

Objects are serialized as JSON with sorted keys and no whitespace; integers
stay base-10 JSON numbers and byte strings are written as lowercase hex.
"""

from __future__ import annotations

import json
from typing import Any


def _normalize(obj: Any) -> Any:
    if isinstance(obj, (bytes, bytearray, memoryview)):
        return bytes(obj).hex()
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if hasattr(obj, "to_json"):
        return _normalize(obj.to_json())
    raise TypeError(f"cannot canonically encode {type(obj).__name__}")


def canonical_json(obj: Any) -> bytes:
    """Return the canonical octets of ``obj``."""
    return json.dumps(
        _normalize(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def canonical_loads(data: bytes | str) -> Any:
    return json.loads(data)


def int_to_be32(value: int) -> bytes:
    return value.to_bytes(32, "big")


def be32_to_int(data: bytes) -> int:
    if len(data) != 32:
        raise ValueError(f"expected 32 bytes, got {len(data)}")
    return int.from_bytes(data, "big")
