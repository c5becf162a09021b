from zkperm.crypto.field import MODULUS
from zkperm.crypto.hashing import (
    HashDigest,
    digest_as_field,
    digest_to_field,
    field_to_digest,
    hash_canonical,
    mimc_hash,
)
from zkperm.crypto.jubjub import IDENTITY, SUBGROUP_ORDER, Point, generator
from zkperm.crypto.merkle import (
    MerkleCapacityError,
    MerklePath,
    MerkleTree,
    merkle_build,
    merkle_path,
    merkle_path_verify,
)
from zkperm.crypto.signatures import (
    Signature,
    SignatureKeyPair,
    ds_keygen,
    ds_sign,
    ds_sign_field,
    ds_verify,
    ds_verify_field,
)

__all__ = [
    "HashDigest",
    "IDENTITY",
    "MODULUS",
    "MerkleCapacityError",
    "MerklePath",
    "MerkleTree",
    "Point",
    "SUBGROUP_ORDER",
    "Signature",
    "SignatureKeyPair",
    "digest_as_field",
    "digest_to_field",
    "ds_keygen",
    "ds_sign",
    "ds_sign_field",
    "ds_verify",
    "ds_verify_field",
    "field_to_digest",
    "generator",
    "hash_canonical",
    "merkle_build",
    "merkle_path",
    "merkle_path_verify",
    "mimc_hash",
]
