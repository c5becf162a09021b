"""Key, proof and reference-string types and their binary containers.

Every container is ``magic (4) | version u8 | backend u8 | curve u8 |
circuit digest (32) | payload length u32 LE | payload``. Proofs use the
same header so a proof made for one circuit cannot be checked against the
key of another.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Any

from zkperm.errors import ProofError

CONTAINER_VERSION = 1
BACKENDS = {"direct": 1, "groth16": 2}
CURVES = {"none": 0, "bls12_381": 1}
BACKEND_CURVE = {"direct": "none", "groth16": "bls12_381"}
_HEADER = struct.Struct("<4sBBB32sI")


def pack_container(magic: bytes, backend: str, digest: bytes, payload: bytes) -> bytes:
    curve = CURVES[BACKEND_CURVE[backend]]
    header = _HEADER.pack(magic, CONTAINER_VERSION, BACKENDS[backend], curve, digest, len(payload))
    return header + payload


def unpack_container(magic: bytes, data: bytes) -> tuple[str, bytes, bytes]:
    """Returns (backend, circuit digest, payload); raises ProofError if malformed."""
    if len(data) < _HEADER.size:
        raise ProofError("container truncated")
    got_magic, version, backend_id, curve_id, digest, length = _HEADER.unpack_from(data)
    if got_magic != magic or version != CONTAINER_VERSION:
        raise ProofError("bad container magic or version")
    backend = {v: k for k, v in BACKENDS.items()}.get(backend_id)
    if backend is None or CURVES[BACKEND_CURVE[backend]] != curve_id:
        raise ProofError("unknown backend or curve")
    payload = data[_HEADER.size :]
    if len(payload) != length:
        raise ProofError("container length mismatch")
    return backend, digest, payload


@dataclass(frozen=True)
class StructuredReferenceString:
    """Seed for the deterministic, test-only parameter expansion.

    Anyone who knows the seed can forge proofs. Never use it outside tests
    and benchmarks.
    """

    seed: bytes
    curve: str = "bls12_381"

    def __post_init__(self):
        if isinstance(self.seed, str):
            object.__setattr__(self, "seed", self.seed.encode())
        if self.curve not in CURVES:
            raise ProofError(f"unknown curve {self.curve!r}")


@dataclass
class ProvingKeyZk:
    backend: str
    circuit_digest: bytes
    payload: bytes = b""
    material: Any = field(default=None, repr=False, compare=False)

    def to_bytes(self) -> bytes:
        return pack_container(b"ZKPK", self.backend, self.circuit_digest, self.payload)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ProvingKeyZk":
        backend, digest, payload = unpack_container(b"ZKPK", data)
        return cls(backend, digest, payload)


@dataclass
class VerificationKeyZk:
    backend: str
    circuit_digest: bytes
    num_public_inputs: int
    payload: bytes = b""
    material: Any = field(default=None, repr=False, compare=False)

    def to_bytes(self) -> bytes:
        body = struct.pack("<I", self.num_public_inputs) + self.payload
        return pack_container(b"ZKVK", self.backend, self.circuit_digest, body)

    @classmethod
    def from_bytes(cls, data: bytes) -> "VerificationKeyZk":
        backend, digest, body = unpack_container(b"ZKVK", data)
        if len(body) < 4:
            raise ProofError("verification key truncated")
        (npub,) = struct.unpack_from("<I", body)
        return cls(backend, digest, npub, body[4:])

    def to_json(self) -> str:
        return self.to_bytes().hex()

    @classmethod
    def from_hex(cls, text: str) -> "VerificationKeyZk":
        return cls.from_bytes(bytes.fromhex(text))


@dataclass(frozen=True)
class ProofZk:
    backend: str
    circuit_digest: bytes
    payload: bytes

    def to_bytes(self) -> bytes:
        return pack_container(b"ZKPF", self.backend, self.circuit_digest, self.payload)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ProofZk":
        backend, digest, payload = unpack_container(b"ZKPF", data)
        return cls(backend, digest, payload)

    def to_json(self) -> str:
        return self.to_bytes().hex()

    @classmethod
    def from_hex(cls, text: str) -> "ProofZk":
        return cls.from_bytes(bytes.fromhex(text))
