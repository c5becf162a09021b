"""Setup, prove and verify over two interchangeable backends.

``groth16`` gives constant-size proofs and a verifier whose cost depends
only on the number of public inputs. ``direct`` ships the private
assignment as the proof and re-evaluates every constraint; it is the test
oracle for the succinct backend.
"""

from __future__ import annotations

from zkperm.circuit.r1cs import ConstraintSystem, WitnessAssignment
from zkperm.errors import KeyMismatchError, ProofError, UnsatisfiedWitnessError
from zkperm.proofsys import direct, groth16
from zkperm.proofsys.keys import (
    BACKENDS,
    ProofZk,
    ProvingKeyZk,
    StructuredReferenceString,
    VerificationKeyZk,
)

__all__ = [
    "BACKENDS",
    "ProofZk",
    "ProvingKeyZk",
    "StructuredReferenceString",
    "VerificationKeyZk",
    "zk_prove",
    "zk_setup",
    "zk_verify",
]


def zk_setup(
    ecs: ConstraintSystem, srs: StructuredReferenceString, backend: str = "groth16"
) -> tuple[ProvingKeyZk, VerificationKeyZk]:
    if backend not in BACKENDS:
        raise ProofError(f"unknown backend {backend!r}")
    if backend == "groth16" and srs.curve != "bls12_381":
        raise ProofError(f"groth16 needs bls12_381, reference string is for {srs.curve}")
    npub = ecs.num_public_inputs
    if backend == "direct":
        pk_bytes, vk_bytes, cs = direct.setup(ecs)
        return (
            ProvingKeyZk(backend, ecs.digest, pk_bytes),
            VerificationKeyZk(backend, ecs.digest, npub, vk_bytes, material=cs),
        )
    pm, vm = groth16.setup(ecs, srs.seed)
    return (
        ProvingKeyZk(backend, ecs.digest, pm.to_bytes(), material=pm),
        VerificationKeyZk(backend, ecs.digest, npub, vm.to_bytes(), material=vm),
    )


def zk_prove(
    ecs: ConstraintSystem,
    public_input,
    private_input,
    witness: WitnessAssignment,
    pk: ProvingKeyZk,
) -> ProofZk:
    """Prove that ``witness`` satisfies ``ecs``.

    ``private_input`` is accepted for interface symmetry; the private values
    already live inside ``witness``. Refuses (raises) rather than emitting a
    proof that would not verify.
    """
    if pk.circuit_digest != ecs.digest:
        raise KeyMismatchError("proving key was made for a different circuit")
    if tuple(public_input) != tuple(witness.public_segment):
        raise ProofError("public input does not match the witness")
    values = list(witness.values)
    bad = ecs.first_violation(values)
    if bad is not None:
        raise UnsatisfiedWitnessError(f"witness violates constraint {bad}")
    if pk.backend == "direct":
        return ProofZk("direct", ecs.digest, direct.prove(ecs, witness.values))
    if pk.material is None:
        pk.material = groth16.ProvingMaterial.from_bytes(pk.payload)
    return ProofZk("groth16", ecs.digest, groth16.prove(ecs, pk.material, values))


def _verifying_material(vk: VerificationKeyZk):
    if vk.material is None:
        if vk.backend == "direct":
            vk.material = direct.load_vk(vk.payload)
        else:
            vk.material = groth16.VerifyingMaterial.from_bytes(vk.payload, vk.num_public_inputs)
    return vk.material


def zk_verify(public_input, vk: VerificationKeyZk, proof) -> int:
    """1 iff ``proof`` is valid for ``public_input`` under ``vk``; never raises."""
    try:
        if isinstance(proof, (bytes, bytearray)):
            proof = ProofZk.from_bytes(bytes(proof))
        if proof.backend != vk.backend or proof.circuit_digest != vk.circuit_digest:
            return 0
        x = tuple(int(v) for v in public_input)
        if len(x) != vk.num_public_inputs:
            return 0
        material = _verifying_material(vk)
        if vk.backend == "direct":
            if material.digest != vk.circuit_digest:
                return 0
            return int(direct.verify(material, x, proof.payload))
        return int(groth16.verify(material, x, proof.payload))
    except (ProofError, ValueError, TypeError, OverflowError):
        return 0
