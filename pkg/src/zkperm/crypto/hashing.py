"""SHA-256 canonical hashing plus the MiMC hash used inside circuits.

``hash_canonical`` is plain SHA-256 and names every off-circuit artifact
(DIDs, registry keys, circuit digests, ledger state). Values that a circuit
must recompute (claim hashes, Merkle nodes, signature challenges) use
``mimc_hash``, a Miyaguchi-Preneel chain over the MiMC-x^5 permutation.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache
from typing import Iterable, NewType

from zkperm.crypto.field import MODULUS

HashDigest = NewType("HashDigest", bytes)

MIMC_EXPONENT = 5
# ceil(log_5(r)) rounds for the 255-bit field
MIMC_ROUNDS = 110


def hash_canonical(message: bytes) -> HashDigest:
    return HashDigest(hashlib.sha256(message).digest())


def digest_to_field(digest: bytes) -> int:
    """Pack a 256-bit digest into one field element by dropping its low 3 bits."""
    if len(digest) != 32:
        raise ValueError("digest must be 32 bytes")
    return int.from_bytes(digest, "big") >> 3


def field_to_digest(value: int) -> HashDigest:
    if not 0 <= value < MODULUS:
        raise ValueError("value is not a canonical field element")
    return HashDigest(value.to_bytes(32, "big"))


def digest_as_field(digest: bytes) -> int:
    """Inverse of ``field_to_digest``; rejects non-canonical encodings."""
    if len(digest) != 32:
        raise ValueError("digest must be 32 bytes")
    value = int.from_bytes(digest, "big")
    if value >= MODULUS:
        raise ValueError("digest does not encode a field element")
    return value


def domain_tag(label: str) -> int:
    return digest_to_field(hash_canonical(b"zkperm/" + label.encode()))


@lru_cache(maxsize=1)
def mimc_constants() -> tuple[int, ...]:
    consts = [0]
    for i in range(1, MIMC_ROUNDS):
        h = hash_canonical(b"zkperm/mimc/" + i.to_bytes(4, "big"))
        consts.append(int.from_bytes(h, "big") % MODULUS)
    return tuple(consts)


def mimc_permute(x: int, key: int) -> int:
    p = MODULUS
    for c in mimc_constants():
        t = (x + key + c) % p
        t2 = t * t % p
        x = t2 * t2 % p * t % p
    return (x + key) % p


def mimc_hash(values: Iterable[int], iv: int = 0) -> int:
    h = iv % MODULUS
    for m in values:
        m %= MODULUS
        h = (mimc_permute(m, h) + h + m) % MODULUS
    return h


TAG_CLAIM = domain_tag("claim")
TAG_NODE = domain_tag("merkle-node")
TAG_GAP = domain_tag("merkle-gap")
TAG_SIG = domain_tag("eddsa-challenge")
