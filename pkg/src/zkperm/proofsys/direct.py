"""Direct-evaluation backend: the "proof" is the private assignment.

Not zero-knowledge and not succinct. It exists as a fast oracle for the
succinct backend and for large randomized test corpora.
"""

from __future__ import annotations

from zkperm.circuit.r1cs import ConstraintSystem
from zkperm.crypto.field import MODULUS
from zkperm.errors import ProofError


def setup(cs: ConstraintSystem) -> tuple[bytes, bytes, ConstraintSystem]:
    return b"", cs.artifact, cs


def prove(cs: ConstraintSystem, values: tuple[int, ...]) -> bytes:
    private = values[1 + cs.num_public_inputs :]
    return b"".join(v.to_bytes(32, "big") for v in private)


def verify(cs: ConstraintSystem, public_input: tuple[int, ...], payload: bytes) -> bool:
    npriv = cs.num_variables - 1 - cs.num_public_inputs
    if len(payload) != 32 * npriv:
        return False
    private = [int.from_bytes(payload[i : i + 32], "big") for i in range(0, len(payload), 32)]
    if any(v >= MODULUS for v in private):
        return False
    return cs.is_satisfied([1, *public_input, *private])


def load_vk(payload: bytes) -> ConstraintSystem:
    try:
        return ConstraintSystem.from_bytes(payload)
    except Exception as exc:
        raise ProofError("malformed direct verification key") from exc
