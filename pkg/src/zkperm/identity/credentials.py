"""Claims, credential schemas and issuer-signed verifiable credentials."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from zkperm.crypto import (
    MODULUS,
    Point,
    Signature,
    digest_to_field,
    ds_sign_field,
    ds_verify_field,
    field_to_digest,
    hash_canonical,
    mimc_hash,
)
from zkperm.crypto.hashing import TAG_CLAIM, HashDigest
from zkperm.crypto.jubjub import scalar_mult, generator
from zkperm.encoding import canonical_json
from zkperm.errors import SchemaError
from zkperm.identity.registry import Registry

KINDS = ("integer", "date", "string")
INT_MIN, INT_MAX = -(1 << 63), (1 << 63) - 1
INT_OFFSET = 1 << 63
MAX_STRING_BYTES = 64

Value = Union[int, str]


@dataclass(frozen=True)
class Attribute:
    key: str
    value: Value
    kind: str = ""

    def __post_init__(self):
        kind = self.kind or ("string" if isinstance(self.value, str) else "integer")
        object.__setattr__(self, "kind", kind)
        if not self.key:
            raise SchemaError("attribute key must be nonempty")
        check_value(kind, self.value)

    def to_json(self) -> dict:
        return {"key": self.key, "kind": self.kind, "value": self.value}

    @classmethod
    def from_json(cls, obj: dict) -> "Attribute":
        return cls(obj["key"], obj["value"], obj["kind"])


def check_value(kind: str, value: Value) -> None:
    if kind not in KINDS:
        raise SchemaError(f"unknown value kind {kind!r}")
    if kind == "string":
        if not isinstance(value, str):
            raise SchemaError(f"expected a string, got {value!r}")
        if len(canonical_json(value)) > MAX_STRING_BYTES:
            raise SchemaError("string value exceeds 64 canonical bytes")
    else:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"expected an integer, got {value!r}")
        if not INT_MIN <= value <= INT_MAX:
            raise SchemaError("integer outside the signed 64-bit range")


def key_code(key: str, kind: str) -> int:
    return digest_to_field(hash_canonical(canonical_json({"key": key, "kind": kind})))


def value_code(kind: str, value: Value) -> int:
    """Field encoding of an attribute value.

    Integers and dates are shifted into [0, 2^64) so range checks are
    unsigned; strings become the packed SHA-256 of their canonical JSON.
    """
    check_value(kind, value)
    if kind == "string":
        return digest_to_field(hash_canonical(canonical_json(value)))
    return value + INT_OFFSET


@dataclass(frozen=True)
class Claim:
    subject_public_key: Point
    attribute: Attribute

    def field_encoding(self) -> list[int]:
        pk = self.subject_public_key
        attr = self.attribute
        return [pk.x, pk.y, key_code(attr.key, attr.kind), value_code(attr.kind, attr.value)]

    def to_json(self) -> dict:
        return {
            "attribute": self.attribute.to_json(),
            "subject_public_key": self.subject_public_key.compress().hex(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Claim":
        return cls(Point.from_hex(obj["subject_public_key"]), Attribute.from_json(obj["attribute"]))


def claim_hash_field(claim: Claim) -> int:
    return mimc_hash(claim.field_encoding(), iv=TAG_CLAIM)


def claim_hash(claim: Claim) -> HashDigest:
    return field_to_digest(claim_hash_field(claim))


@dataclass(frozen=True)
class AttributeSpec:
    key: str
    kind: str
    required: bool = True

    def to_json(self) -> dict:
        return {"key": self.key, "kind": self.kind, "required": self.required}


@dataclass(frozen=True)
class CredentialSchema:
    schema_id: str
    attribute_specs: tuple[AttributeSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "attribute_specs", tuple(self.attribute_specs))
        if not self.schema_id:
            raise SchemaError("schema id must be nonempty")
        if not self.attribute_specs:
            raise SchemaError("schema needs at least one attribute")
        keys = [s.key for s in self.attribute_specs]
        if len(set(keys)) != len(keys):
            raise SchemaError("duplicate attribute keys in schema")
        for spec in self.attribute_specs:
            if not spec.key or spec.kind not in KINDS:
                raise SchemaError(f"bad attribute spec {spec!r}")

    def spec_for(self, key: str) -> AttributeSpec | None:
        for spec in self.attribute_specs:
            if spec.key == key:
                return spec
        return None

    def to_json(self) -> dict:
        return {
            "schema_id": self.schema_id,
            "attribute_specs": [s.to_json() for s in self.attribute_specs],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CredentialSchema":
        return cls(
            obj["schema_id"],
            tuple(AttributeSpec(s["key"], s["kind"], s["required"]) for s in obj["attribute_specs"]),
        )


def register_schema(schema: CredentialSchema, registry: Registry) -> str:
    registry.put("schema", schema.schema_id, schema.to_json())
    return schema.schema_id


def load_schema(registry: Registry, schema_id: str) -> CredentialSchema:
    return CredentialSchema.from_json(registry.get("schema", schema_id))


def check_conformance(schema: CredentialSchema, attributes: list[Attribute]) -> None:
    seen = set()
    for attr in attributes:
        spec = schema.spec_for(attr.key)
        if spec is None:
            raise SchemaError(f"attribute {attr.key!r} is not in schema {schema.schema_id!r}")
        if attr.key in seen:
            raise SchemaError(f"attribute {attr.key!r} given twice")
        if attr.kind != spec.kind:
            raise SchemaError(f"attribute {attr.key!r} must be {spec.kind}, got {attr.kind}")
        seen.add(attr.key)
    missing = [s.key for s in schema.attribute_specs if s.required and s.key not in seen]
    if missing:
        raise SchemaError(f"missing required attributes: {', '.join(missing)}")


@dataclass(frozen=True)
class VerifiableCredential:
    issuer_public_key: Point
    claims: tuple[Claim, ...]
    claim_signatures: tuple[Signature, ...]
    schema_id: str = ""

    @property
    def subject_public_key(self) -> Point:
        return self.claims[0].subject_public_key

    def claim_for(self, key: str) -> tuple[int, Claim] | None:
        for i, claim in enumerate(self.claims):
            if claim.attribute.key == key:
                return i, claim
        return None

    def to_json(self) -> dict:
        return {
            "issuer_public_key": self.issuer_public_key.compress().hex(),
            "claims": [c.to_json() for c in self.claims],
            "claim_signatures": [s.to_bytes().hex() for s in self.claim_signatures],
            "schema_id": self.schema_id,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "VerifiableCredential":
        return cls(
            Point.from_hex(obj["issuer_public_key"]),
            tuple(Claim.from_json(c) for c in obj["claims"]),
            tuple(Signature.from_hex(s) for s in obj["claim_signatures"]),
            obj.get("schema_id", ""),
        )


def issue_credential(
    issuer_secret: int,
    subject_public_key: Point,
    attributes: list[Attribute],
    schema: CredentialSchema,
) -> VerifiableCredential:
    check_conformance(schema, list(attributes))
    claims = tuple(Claim(subject_public_key, a) for a in attributes)
    sigs = tuple(ds_sign_field(issuer_secret, claim_hash_field(c)) for c in claims)
    return VerifiableCredential(
        scalar_mult(generator(), issuer_secret), claims, sigs, schema.schema_id
    )


def verify_credential(vc: VerifiableCredential) -> int:
    try:
        if not vc.claims or len(vc.claims) != len(vc.claim_signatures):
            return 0
        subject = vc.claims[0].subject_public_key
        for claim, sig in zip(vc.claims, vc.claim_signatures):
            if claim.subject_public_key != subject:
                return 0
            h = claim_hash_field(claim)
            if not 0 <= h < MODULUS or not ds_verify_field(vc.issuer_public_key, sig, h):
                return 0
        return 1
    except (SchemaError, ValueError, TypeError, AttributeError):
        return 0
