"""EdDSA over Jubjub with MiMC challenges and deterministic nonces.

The signed message is a field element. Byte messages are first reduced
through ``hash_canonical``; claim hashes and chain nonces are already field
elements and are signed as-is (``ds_sign_field``), which keeps the in-circuit
verifier free of SHA-256.
"""

from __future__ import annotations

from dataclasses import dataclass

from zkperm.crypto.field import MODULUS
from zkperm.crypto.hashing import TAG_SIG, digest_to_field, hash_canonical, mimc_hash
from zkperm.crypto.jubjub import SUBGROUP_ORDER, Point, generator, in_prime_subgroup, scalar_mult


@dataclass(frozen=True)
class SignatureKeyPair:
    secret_key: int
    public_key: Point


@dataclass(frozen=True)
class Signature:
    commitment_point: Point
    response_scalar: int

    def to_bytes(self) -> bytes:
        return self.commitment_point.compress() + self.response_scalar.to_bytes(32, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "Signature":
        if len(data) != 64:
            raise ValueError("signature must be 64 bytes")
        return cls(Point.decompress(data[:32]), int.from_bytes(data[32:], "big"))

    def to_json(self) -> str:
        return self.to_bytes().hex()

    @classmethod
    def from_hex(cls, text: str) -> "Signature":
        return cls.from_bytes(bytes.fromhex(text))


def ds_keygen(seed: bytes | str) -> SignatureKeyPair:
    if isinstance(seed, str):
        seed = seed.encode()
    if not seed:
        raise ValueError("seed must be nonempty")
    counter = 0
    while True:
        digest = hash_canonical(b"zkperm/keygen/" + counter.to_bytes(4, "big") + seed)
        sk = int.from_bytes(digest, "big") % SUBGROUP_ORDER
        if sk:
            return SignatureKeyPair(sk, scalar_mult(generator(), sk))
        counter += 1


def message_to_field(message: bytes) -> int:
    return digest_to_field(hash_canonical(message))


def challenge(commitment: Point, public_key: Point, message: int) -> int:
    return mimc_hash(
        [commitment.x, commitment.y, public_key.x, public_key.y, message], iv=TAG_SIG
    )


def ds_sign_field(secret_key: int, message: int) -> Signature:
    if not 0 < secret_key < SUBGROUP_ORDER:
        raise ValueError("secret key out of range")
    if not 0 <= message < MODULUS:
        raise ValueError("message is not a field element")
    B = generator()
    nonce_seed = hash_canonical(secret_key.to_bytes(32, "big") + message.to_bytes(32, "big"))
    nonce = int.from_bytes(nonce_seed, "big") % SUBGROUP_ORDER or 1
    R = scalar_mult(B, nonce)
    A = scalar_mult(B, secret_key)
    k = challenge(R, A, message)
    return Signature(R, (nonce + k * secret_key) % SUBGROUP_ORDER)


def ds_sign(secret_key: int, message: bytes) -> Signature:
    return ds_sign_field(secret_key, message_to_field(message))


def ds_verify_field(public_key: Point, sig: Signature, message: int) -> int:
    try:
        R, s = sig.commitment_point, sig.response_scalar
        if not (0 <= s < SUBGROUP_ORDER and 0 <= message < MODULUS):
            return 0
        if not (R.is_on_curve() and in_prime_subgroup(public_key)):
            return 0
        k = challenge(R, public_key, message)
        lhs = scalar_mult(generator(), s)
        rhs = R + scalar_mult(public_key, k)
        return int(lhs == rhs)
    except (AttributeError, TypeError, ValueError):
        return 0


def ds_verify(public_key: Point, sig: Signature, message: bytes) -> int:
    return ds_verify_field(public_key, sig, message_to_field(message))
