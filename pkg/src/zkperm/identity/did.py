from __future__ import annotations

from dataclasses import dataclass

from zkperm.crypto import Point, SignatureKeyPair, hash_canonical
from zkperm.identity.registry import Registry

METHOD = "zkperm"


@dataclass(frozen=True)
class DecentralizedIdentifier:
    method: str
    id_string: str
    public_key: Point
    document: dict

    @property
    def uri(self) -> str:
        return f"did:{self.method}:{self.id_string}"


def did_id_for(public_key: Point) -> str:
    return hash_canonical(public_key.compress()).hex()


def did_uri_for(public_key: Point) -> str:
    return f"did:{METHOD}:{did_id_for(public_key)}"


def did_document(public_key: Point) -> dict:
    uri = did_uri_for(public_key)
    return {
        "id": uri,
        "verificationMethod": [
            {
                "id": uri + "#key-1",
                "type": "JubjubEdDSAVerificationKey",
                "controller": uri,
                "publicKeyHex": public_key.compress().hex(),
            }
        ],
    }


def _from_document(doc: dict) -> DecentralizedIdentifier:
    pk = Point.from_hex(doc["verificationMethod"][0]["publicKeyHex"])
    return DecentralizedIdentifier(METHOD, did_id_for(pk), pk, doc)


def create_did(keypair: SignatureKeyPair, registry: Registry) -> DecentralizedIdentifier:
    """Derive the DID of ``keypair`` and publish its document; duplicates raise."""
    doc = did_document(keypair.public_key)
    did = _from_document(doc)
    registry.put("did_document", did.id_string, doc)
    return did


def resolve_did(registry: Registry, did: str) -> DecentralizedIdentifier:
    id_string = did.rsplit(":", 1)[-1]
    resolved = _from_document(registry.get("did_document", id_string))
    if resolved.id_string != id_string:
        raise ValueError("registry document does not match its DID")
    return resolved
