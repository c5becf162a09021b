"""File-backed verifiable data registry.

Layout: ``<root>/{dids,schemas,vprs}/<key>.json``, one canonical-JSON
document per record. Records are append-only.
"""

from __future__ import annotations

import os
import re
from pathlib import Path
from typing import Any

from zkperm.encoding import canonical_json, canonical_loads
from zkperm.errors import DuplicateRecordError, RecordNotFoundError, RegistryError

RECORD_DIRS = {"did_document": "dids", "schema": "schemas", "vpr_zk": "vprs"}
_KEY_RE = re.compile(r"^[A-Za-z0-9._:-]{1,200}$")


class Registry:
    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        for sub in RECORD_DIRS.values():
            (self.root / sub).mkdir(parents=True, exist_ok=True)

    def _path(self, kind: str, key: str) -> Path:
        if kind not in RECORD_DIRS:
            raise RegistryError(f"unknown record kind {kind!r}")
        if not _KEY_RE.match(key):
            raise RegistryError(f"invalid record key {key!r}")
        return self.root / RECORD_DIRS[kind] / f"{key.replace(':', '_')}.json"

    def put(self, kind: str, key: str, payload: Any) -> bytes:
        path = self._path(kind, key)
        data = canonical_json(payload)
        try:
            with open(path, "xb") as fh:
                fh.write(data)
        except FileExistsError:
            raise DuplicateRecordError(f"{kind} {key!r} already registered") from None
        return data

    def get(self, kind: str, key: str) -> Any:
        path = self._path(kind, key)
        if not path.exists():
            raise RecordNotFoundError(f"{kind} {key!r} not found")
        return canonical_loads(path.read_bytes())

    def contains(self, kind: str, key: str) -> bool:
        return self._path(kind, key).exists()

    def keys(self, kind: str) -> list[str]:
        folder = self.root / RECORD_DIRS[kind]
        return sorted(p.stem for p in folder.glob("*.json"))
