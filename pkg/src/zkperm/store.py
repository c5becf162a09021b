"""Content-addressed local storage for compiled circuits and proving keys.

These artifacts are far too large for the registry (a proving key runs to
tens of megabytes), so the registry only records their references.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path

from zkperm.errors import RecordNotFoundError

KINDS = {"ecs": ".zkpc", "pk": ".zkpk"}


class ArtifactStore:
    """Files named ``<kind>-<sha256>.<ext>`` under one directory.

    Decoded objects are memoized per reference so a long-lived process
    does not re-parse a proving key for every proof.
    """

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._objects: dict[str, object] = {}

    def _path(self, ref: str) -> Path:
        kind, _, digest = ref.partition(":")
        if kind not in KINDS or len(digest) != 64:
            raise RecordNotFoundError(f"malformed artifact reference {ref!r}")
        return self.root / f"{kind}-{digest}{KINDS[kind]}"

    def put(self, kind: str, data: bytes, obj: object = None) -> str:
        ref = f"{kind}:{hashlib.sha256(data).hexdigest()}"
        path = self._path(ref)
        if not path.exists():
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(data)
            tmp.replace(path)
        if obj is not None:
            self._objects[ref] = obj
        return ref

    def get_bytes(self, ref: str) -> bytes:
        path = self._path(ref)
        if not path.exists():
            raise RecordNotFoundError(f"artifact {ref} not found")
        return path.read_bytes()

    def size(self, ref: str) -> int:
        return self._path(ref).stat().st_size

    def load(self, ref: str, decode):
        if ref not in self._objects:
            self._objects[ref] = decode(self.get_bytes(ref))
        return self._objects[ref]
