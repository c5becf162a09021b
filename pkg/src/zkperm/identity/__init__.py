from zkperm.identity.credentials import (
    Attribute,
    AttributeSpec,
    Claim,
    CredentialSchema,
    VerifiableCredential,
    claim_hash,
    claim_hash_field,
    issue_credential,
    key_code,
    load_schema,
    register_schema,
    value_code,
    verify_credential,
)
from zkperm.identity.did import DecentralizedIdentifier, create_did, did_uri_for, resolve_did
from zkperm.identity.registry import Registry

__all__ = [
    "Attribute",
    "AttributeSpec",
    "Claim",
    "CredentialSchema",
    "DecentralizedIdentifier",
    "Registry",
    "VerifiableCredential",
    "claim_hash",
    "claim_hash_field",
    "create_did",
    "did_uri_for",
    "issue_credential",
    "key_code",
    "load_schema",
    "register_schema",
    "resolve_did",
    "value_code",
    "verify_credential",
]
