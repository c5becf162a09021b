import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import SRS
from zkperm.circuit import ConstraintSystem, WitnessAssignment, generate_witness
from zkperm.circuit.r1cs import Builder
from zkperm.crypto import MODULUS, ds_keygen
from zkperm.errors import KeyMismatchError, ProofError, UnsatisfiedWitnessError
from zkperm.proofsys import (
    ProofZk,
    ProvingKeyZk,
    StructuredReferenceString,
    VerificationKeyZk,
    groth16,
    zk_prove,
    zk_setup,
    zk_verify,
)
from zkperm.proofsys.domain import EvaluationDomain

P = MODULUS


def cubic(x: int, extra_rounds: int = 0):
    """x^3 + x + 5 == out, optionally padded with k squarings of x."""
    b = Builder()
    out_value = (x**3 + x + 5) % P
    out = b.input("out", out_value)
    xv = b.alloc(x)
    x2 = b.mul(xv, xv)
    x3 = b.mul(x2, xv)
    b.assert_equal(x3 + xv + 5, out)
    acc = xv
    for _ in range(extra_rounds):
        acc = b.mul(acc, acc)
    cs = ConstraintSystem(len(b.values), 1, b.constraints, ("out",), {"scheme": "toy"})
    return cs, WitnessAssignment(tuple(b.values), 1)


@pytest.fixture(scope="module")
def toy():
    cs, w = cubic(3)
    pk, vk = zk_setup(cs, SRS)
    return cs, w, pk, vk


@pytest.fixture(scope="module")
def kyc_material(kyc):
    from zkperm.policy import AuxData

    vpr = kyc.vpr("id_deposit", "cp")
    cs = kyc.store.load(vpr.ecs_ref, ConstraintSystem.from_bytes)
    pk = kyc.store.load(vpr.proving_key_ref, ProvingKeyZk.from_bytes)
    aux = AuxData({kyc.sanctions.ref: kyc.sanctions}, 1_700_000_000)
    w = generate_witness(cs, kyc.vc, kyc.subject.secret_key, 4242, aux)
    proof = zk_prove(cs, w.public_segment, None, w, pk)
    return cs, pk, vpr.verification_key, w, proof, aux


class TestDomain:
    @given(st.lists(st.integers(0, P - 1), min_size=1, max_size=16))
    @settings(max_examples=30)
    def test_fft_round_trip(self, coeffs):
        d = EvaluationDomain.at_least(len(coeffs))
        assert d.ifft(d.fft(coeffs))[: len(coeffs)] == coeffs

    @given(st.lists(st.integers(0, P - 1), min_size=8, max_size=8))
    @settings(max_examples=20)
    def test_coset_round_trip(self, coeffs):
        d = EvaluationDomain(8)
        assert d.coset_ifft(d.coset_fft(coeffs)) == coeffs

    def test_fft_matches_naive_evaluation(self):
        rng = random.Random(1)
        coeffs = [rng.randrange(P) for _ in range(8)]
        d = EvaluationDomain(8)
        naive = [sum(c * pow(w, i, P) for i, c in enumerate(coeffs)) % P for w in d.elements()]
        assert d.fft(coeffs) == naive

    def test_lagrange_interpolates(self):
        d = EvaluationDomain(8)
        tau = 123456789
        evals = list(range(1, 9))
        coeffs = d.ifft(evals)
        direct = sum(c * pow(tau, i, P) for i, c in enumerate(coeffs)) % P
        assert sum(e * l for e, l in zip(evals, d.lagrange_at(tau))) % P == direct

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            EvaluationDomain(6)


class TestToyGroth16:
    def test_round_trip(self, toy):
        cs, w, pk, vk = toy
        proof = zk_prove(cs, w.public_segment, None, w, pk)
        assert zk_verify(w.public_segment, vk, proof) == 1
        assert zk_verify(w.public_segment, vk, proof.to_bytes()) == 1
        assert len(proof.payload) == groth16.PROOF_BYTES

    def test_wrong_public_input(self, toy):
        cs, w, pk, vk = toy
        proof = zk_prove(cs, w.public_segment, None, w, pk)
        assert zk_verify(((w.public_segment[0] + 1) % P,), vk, proof) == 0
        assert zk_verify((), vk, proof) == 0
        assert zk_verify((P,), vk, proof) == 0

    def test_setup_deterministic(self, toy):
        cs, _, pk, vk = toy
        pk2, vk2 = zk_setup(cs, SRS)
        assert pk2.to_bytes() == pk.to_bytes() and vk2.to_bytes() == vk.to_bytes()

    def test_srs_seed_matters(self, toy):
        cs, _, _, vk = toy
        _, other = zk_setup(cs, StructuredReferenceString(b"another seed"))
        assert other.to_bytes() != vk.to_bytes()

    def test_proof_deterministic(self, toy):
        cs, w, pk, _ = toy
        assert zk_prove(cs, w.public_segment, None, w, pk) == zk_prove(cs, w.public_segment, None, w, pk)

    def test_unsatisfied_refused(self, toy):
        cs, w, pk, _ = toy
        values = list(w.values)
        values[2] = (values[2] + 1) % P
        with pytest.raises(UnsatisfiedWitnessError):
            zk_prove(cs, w.public_segment, None, WitnessAssignment(tuple(values), 1), pk)

    def test_public_input_must_match_witness(self, toy):
        cs, w, pk, _ = toy
        with pytest.raises(ProofError):
            zk_prove(cs, (w.public_segment[0] + 1,), None, w, pk)

    def test_key_for_other_circuit(self, toy):
        cs, w, _, _ = toy
        other_cs, _ = cubic(3, extra_rounds=2)
        other_pk, _ = zk_setup(other_cs, SRS)
        with pytest.raises(KeyMismatchError):
            zk_prove(cs, w.public_segment, None, w, other_pk)

    def test_vk_size_independent_of_constraints(self, toy):
        _, _, _, vk = toy
        big_cs, _ = cubic(3, extra_rounds=300)
        _, big_vk = zk_setup(big_cs, SRS)
        assert len(big_vk.to_bytes()) == len(vk.to_bytes())

    @given(st.integers(0, P - 1))
    @settings(max_examples=10, deadline=None)
    def test_completeness(self, x):
        cs, w = cubic(x)
        pk, vk = zk_setup(cs, SRS)
        assert zk_verify(w.public_segment, vk, zk_prove(cs, w.public_segment, None, w, pk)) == 1

    def test_forged_unsatisfied_proof_fails(self, toy):
        """Bypassing the prover's refusal still yields a non-verifying proof."""
        cs, w, pk, vk = toy
        values = list(w.values)
        values[0 + 2] = (values[2] + 1) % P
        payload = groth16.prove(cs, pk.material, values)
        assert zk_verify(w.public_segment, vk, ProofZk("groth16", cs.digest, payload)) == 0


class TestDirectBackend:
    def test_round_trip_and_rejection(self, toy):
        cs, w, _, _ = toy
        pk, vk = zk_setup(cs, SRS, "direct")
        proof = zk_prove(cs, w.public_segment, None, w, pk)
        assert zk_verify(w.public_segment, vk, proof) == 1
        assert zk_verify(((w.public_segment[0] + 1) % P,), vk, proof) == 0
        assert zk_verify(w.public_segment, vk, ProofZk("direct", cs.digest, proof.payload[:-1])) == 0

    def test_vk_survives_serialization(self, toy):
        cs, w, _, _ = toy
        pk, vk = zk_setup(cs, SRS, "direct")
        proof = zk_prove(cs, w.public_segment, None, w, pk)
        assert zk_verify(w.public_segment, VerificationKeyZk.from_bytes(vk.to_bytes()), proof) == 1

    def test_cross_backend_rejected(self, toy):
        cs, w, pk, vk = toy
        dpk, _ = zk_setup(cs, SRS, "direct")
        assert zk_verify(w.public_segment, vk, zk_prove(cs, w.public_segment, None, w, dpk)) == 0

    def test_unknown_backend(self, toy):
        with pytest.raises(ProofError):
            zk_setup(toy[0], SRS, "plonk")


class TestContainers:
    def test_round_trips(self, toy):
        cs, w, pk, vk = toy
        proof = zk_prove(cs, w.public_segment, None, w, pk)
        assert ProofZk.from_hex(proof.to_json()) == proof
        back = VerificationKeyZk.from_hex(vk.to_json())
        assert (back.backend, back.circuit_digest, back.num_public_inputs, back.payload) == (
            vk.backend, vk.circuit_digest, vk.num_public_inputs, vk.payload,
        )
        assert ProvingKeyZk.from_bytes(pk.to_bytes()).payload == pk.payload

    @pytest.mark.parametrize("blob", [b"", b"ZKPF", b"XXXX" + bytes(60), b"ZKPF" + bytes(40)])
    def test_malformed(self, blob):
        with pytest.raises(ProofError):
            ProofZk.from_bytes(blob)

    def test_proof_size_constant(self, toy):
        sizes = set()
        for rounds in (0, 50, 500):
            cs, w = cubic(5, rounds)
            pk, _ = zk_setup(cs, SRS)
            sizes.add(len(zk_prove(cs, w.public_segment, None, w, pk).to_bytes()))
        assert len(sizes) == 1


class TestKycGroth16:
    def test_round_trip(self, kyc_material):
        cs, _, vk, w, proof, _ = kyc_material
        assert zk_verify(w.public_segment, vk, proof) == 1

    def test_nonce_plus_one(self, kyc_material):
        _, _, vk, w, proof, _ = kyc_material
        x = list(w.public_segment)
        x[0] += 1
        assert zk_verify(x, vk, proof) == 0

    def test_truncated(self, kyc_material):
        _, _, vk, w, proof, _ = kyc_material
        data = proof.to_bytes()
        for cut in (0, 1, 40, len(data) - 1):
            assert zk_verify(w.public_segment, vk, data[:cut]) == 0

    def test_fuzzed_proof_bytes(self, kyc_material):
        """1000 random mutations of the proof container never verify."""
        _, _, vk, w, proof, _ = kyc_material
        data = proof.to_bytes()
        rng = random.Random(2024)
        accepted = 0
        for trial in range(1000):
            buf = bytearray(data)
            mode = trial % 4
            if mode == 0:
                buf = buf[: rng.randrange(len(buf))]
            elif mode == 1:
                for _ in range(rng.randint(1, 4)):
                    buf[rng.randrange(len(buf))] ^= 1 << rng.randrange(8)
            elif mode == 2:
                start = 43 + rng.randrange(len(buf) - 43)
                buf[start:] = bytes(rng.randrange(256) for _ in range(len(buf) - start))
            else:
                buf += bytes(rng.randrange(256) for _ in range(rng.randint(1, 8)))
            if bytes(buf) == data:
                continue
            accepted += zk_verify(w.public_segment, vk, bytes(buf))
        assert accepted == 0

    def test_backend_agreement(self, kyc, kyc_material):
        """Direct satisfaction <=> Groth16 prove-then-verify success."""
        cs, pk, vk, honest, _, aux = kyc_material
        thief = ds_keygen("subject-2")
        fr = kyc.credential(country="FR")
        witnesses = [
            honest,
            generate_witness(cs, fr, kyc.subject.secret_key, 4242, aux),
            generate_witness(cs, kyc.vc, thief.secret_key, 4242, aux),
            generate_witness(cs, kyc.credential(unique_id="u-7"), kyc.subject.secret_key, 4242, aux),
        ]
        for w in witnesses:
            satisfied = cs.is_satisfied(list(w.values))
            payload = groth16.prove(cs, pk.material or groth16.ProvingMaterial.from_bytes(pk.payload), list(w.values))
            verified = zk_verify(w.public_segment, vk, ProofZk("groth16", cs.digest, payload))
            assert bool(verified) == satisfied
        assert cs.is_satisfied(list(honest.values))
