"""Subject side: turn a credential and a presentation request into a VP^ZK."""

from __future__ import annotations

from dataclasses import dataclass

from zkperm.circuit import ConstraintSystem, generate_witness
from zkperm.crypto import MODULUS, Signature, digest_as_field, field_to_digest, generator
from zkperm.crypto.jubjub import scalar_mult
from zkperm.encoding import canonical_json, canonical_loads
from zkperm.errors import CircuitError, PresentationRefused, RecordNotFoundError
from zkperm.identity import Registry, VerifiableCredential, claim_hash_field, did_uri_for
from zkperm.identity.credentials import verify_credential
from zkperm.policy import AuxData, VprZk, first_failing_condition
from zkperm.proofsys import ProofZk, ProvingKeyZk, zk_prove
from zkperm.store import ArtifactStore


@dataclass(frozen=True)
class VpZk:
    function_id: str
    proof: ProofZk
    public_input: tuple[int, ...]
    claim_hashes: tuple[bytes, ...]
    claim_signatures: tuple[Signature, ...]
    issuer_did: str
    vpr_ref: str = ""

    @property
    def nonce(self) -> int:
        return self.public_input[0]

    def hash_fields(self) -> tuple[int, ...]:
        return tuple(digest_as_field(h) for h in self.claim_hashes)

    def to_json(self) -> dict:
        return {
            "claim_hashes": [h.hex() for h in self.claim_hashes],
            "claim_signatures": [s.to_json() for s in self.claim_signatures],
            "function_id": self.function_id,
            "issuer_did": self.issuer_did,
            "proof": self.proof.to_json(),
            "public_input": [str(x) for x in self.public_input],
            "vpr_ref": self.vpr_ref,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "VpZk":
        return cls(
            function_id=obj["function_id"],
            proof=ProofZk.from_hex(obj["proof"]),
            public_input=tuple(int(x) for x in obj["public_input"]),
            claim_hashes=tuple(bytes.fromhex(h) for h in obj["claim_hashes"]),
            claim_signatures=tuple(Signature.from_hex(s) for s in obj["claim_signatures"]),
            issuer_did=obj["issuer_did"],
            vpr_ref=obj.get("vpr_ref", ""),
        )

    def to_bytes(self) -> bytes:
        return canonical_json(self.to_json())

    @classmethod
    def from_bytes(cls, data: bytes) -> "VpZk":
        return cls.from_json(canonical_loads(data))


def precheck(vc: VerifiableCredential, vpr: VprZk, subject_secret: int, aux: AuxData) -> None:
    """Raise PresentationRefused unless ``vc`` satisfies ``vpr`` in the clear."""
    if not verify_credential(vc):
        raise PresentationRefused("credential signatures do not verify")
    try:
        own_key = scalar_mult(generator(), subject_secret)
    except (TypeError, ValueError):
        own_key = None
    if own_key != vc.subject_public_key:
        raise PresentationRefused("subject secret does not control the credential subject key")
    failing = first_failing_condition(vc, vpr.conditions, aux)
    if failing is not None:
        cond = vpr.conditions[failing]
        raise PresentationRefused(
            f"condition {failing} ({cond.key} {cond.operator}) is not satisfied", failing
        )


def build_presentation(
    vc: VerifiableCredential,
    vpr: VprZk,
    nonce: int,
    subject_secret: int,
    aux: AuxData,
    registry: Registry | None,
    key_store: ArtifactStore,
) -> VpZk:
    """Prove compliance of ``vc`` with ``vpr`` for the chain-issued ``nonce``.

    ``aux`` carries the block timestamp the chain will check; its sets
    default to those published with the request.
    """
    if isinstance(nonce, bool) or not isinstance(nonce, int) or not 0 <= nonce < MODULUS:
        raise CircuitError("nonce is not a field element")
    if registry is not None and not registry.contains("vpr_zk", vpr.registry_key):
        raise RecordNotFoundError(f"presentation request {vpr.registry_key} is not registered")
    if not aux.membership_sets:
        aux = vpr.aux_at(aux.current_timestamp)
    precheck(vc, vpr, subject_secret, aux)

    ecs = key_store.load(vpr.ecs_ref, ConstraintSystem.from_bytes)
    pk = key_store.load(vpr.proving_key_ref, ProvingKeyZk.from_bytes)
    witness = generate_witness(ecs, vc, subject_secret, nonce, aux)
    proof = zk_prove(ecs, witness.public_segment, None, witness, pk)

    picks = [vc.claim_for(c.key)[0] for c in vpr.conditions]
    hashes = tuple(field_to_digest(claim_hash_field(vc.claims[j])) for j in picks)
    sigs = ()
    if vpr.scheme == "commit_and_prove":
        sigs = tuple(vc.claim_signatures[j] for j in picks)
    return VpZk(
        function_id=vpr.function_id,
        proof=proof,
        public_input=tuple(witness.public_segment),
        claim_hashes=hashes,
        claim_signatures=sigs,
        issuer_did=did_uri_for(vc.issuer_public_key),
        vpr_ref=vpr.registry_key,
    )
