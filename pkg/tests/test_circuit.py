import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from corpus import DOB, KYC_CONDITIONS, SANCTIONS, kyc_attributes
from zkperm.bench import synthetic_policy
from zkperm.circuit import (
    ConstraintSystem,
    MembershipWitness,
    circuit_conditions,
    compile_policy_circuit,
    constraint_count,
    generate_witness,
    public_input_for,
)
from zkperm.crypto import ds_keygen
from zkperm.errors import CircuitError, PolicyError
from zkperm.identity import (
    Attribute,
    AttributeSpec,
    CredentialSchema,
    claim_hash_field,
    issue_credential,
)
from zkperm.identity.credentials import INT_MAX, INT_MIN
from zkperm.policy import (
    EIGHTEEN_YEARS,
    AuxData,
    Condition,
    MembershipSet,
    bind_conditions,
    evaluate_policy_plain,
)

NONCE = 123456789
NOW = 1_700_000_000
ISSUER, SUBJECT = ds_keygen("issuer-1"), ds_keygen("subject-1")
AUX = AuxData({SANCTIONS.ref: SANCTIONS}, NOW)


def _count(proof_type, n, scheme):
    _, _, conds, _ = synthetic_policy(proof_type, n)
    return constraint_count(compile_policy_circuit(conds, scheme, 3))


@pytest.fixture(scope="module")
def kyc_circuits():
    return {s: compile_policy_circuit(KYC_CONDITIONS, s, 3) for s in ("baseline", "commit_and_prove")}


@pytest.fixture(scope="module")
def kyc_vc():
    from corpus import KYC_SCHEMA

    return issue_credential(ISSUER.secret_key, SUBJECT.public_key, kyc_attributes(), KYC_SCHEMA)


class TestCounts:
    def test_cp_below_baseline_single_equality(self):
        assert _count("equal", 1, "commit_and_prove") < _count("equal", 1, "baseline")

    @pytest.mark.parametrize("scheme", ["baseline", "commit_and_prove"])
    def test_equal_close_to_range_at_16(self, scheme):
        eq, rg = _count("equal", 16, scheme), _count("range", 16, scheme)
        assert abs(eq - rg) / max(eq, rg) <= 0.05

    @pytest.mark.parametrize("proof_type", ["equal", "range", "member"])
    @pytest.mark.parametrize("scheme", ["baseline", "commit_and_prove"])
    def test_affine_in_condition_count(self, proof_type, scheme):
        c1, c2 = _count(proof_type, 1, scheme), _count(proof_type, 2, scheme)
        step = c2 - c1
        for n in (4, 8, 16):
            predicted = (n - 1) * step
            assert abs((_count(proof_type, n, scheme) - c1) - predicted) <= 0.10 * predicted

    def test_deterministic(self):
        _, _, conds, _ = synthetic_policy("member", 2)
        a = compile_policy_circuit(conds, "baseline")
        b = compile_policy_circuit(conds, "baseline")
        assert constraint_count(a) == constraint_count(b)
        assert a.digest == b.digest

    def test_member_exceeds_equal(self):
        for scheme in ("baseline", "commit_and_prove"):
            assert _count("member", 4, scheme) > _count("equal", 4, scheme)

    def test_cp_equal_reduction_at_16(self):
        base, cp = _count("equal", 16, "baseline"), _count("equal", 16, "commit_and_prove")
        assert (base - cp) / base >= 0.40


class TestCompileErrors:
    def test_empty(self):
        with pytest.raises(CircuitError):
            compile_policy_circuit([], "baseline")

    def test_unbound_kind(self):
        with pytest.raises(CircuitError):
            compile_policy_circuit([Condition("x", "EQ", 1)], "baseline")

    def test_bad_scheme(self):
        with pytest.raises(CircuitError):
            compile_policy_circuit(KYC_CONDITIONS, "hybrid")

    def test_depth_zero_with_membership(self):
        with pytest.raises(CircuitError):
            compile_policy_circuit(KYC_CONDITIONS, "baseline", 0)


class TestArtifact:
    def test_round_trip(self, kyc_circuits):
        cs = kyc_circuits["commit_and_prove"]
        back = ConstraintSystem.from_bytes(cs.to_bytes())
        assert back.digest == cs.digest
        assert back.constraints == cs.constraints
        assert circuit_conditions(back) == KYC_CONDITIONS

    def test_garbage_rejected(self):
        with pytest.raises(CircuitError):
            ConstraintSystem.from_bytes(b"ZKPC" + b"\x00" * 10)

    def test_layout(self, kyc_circuits):
        cs = kyc_circuits["baseline"]
        assert cs.public_input_layout[:4] == ("eta", "H[0]", "H[1]", "H[2]")
        assert cs.public_input_layout[-1] == "timestamp"


class TestWitness:
    def test_compliant_kyc_satisfies(self, kyc_circuits, kyc_vc):
        for cs in kyc_circuits.values():
            w = generate_witness(cs, kyc_vc, SUBJECT.secret_key, NONCE, AUX)
            assert cs.is_satisfied(list(w.values))

    def test_public_segment_matches_parts(self, kyc_circuits, kyc_vc):
        cs = kyc_circuits["commit_and_prove"]
        w = generate_witness(cs, kyc_vc, SUBJECT.secret_key, NONCE, AUX)
        hashes = [claim_hash_field(kyc_vc.claim_for(c.key)[1]) for c in KYC_CONDITIONS]
        assert w.public_segment == public_input_for(cs, NONCE, hashes, ISSUER.public_key, AUX)

    def test_non_compliant_country(self, kyc_circuits):
        from corpus import KYC_SCHEMA

        vc = issue_credential(ISSUER.secret_key, SUBJECT.public_key, kyc_attributes(country="FR"), KYC_SCHEMA)
        for cs in kyc_circuits.values():
            w = generate_witness(cs, vc, SUBJECT.secret_key, NONCE, AUX)
            assert not cs.is_satisfied(list(w.values))

    def test_wrong_subject_secret(self, kyc_circuits, kyc_vc):
        thief = ds_keygen("subject-2")
        for cs in kyc_circuits.values():
            w = generate_witness(cs, kyc_vc, thief.secret_key, NONCE, AUX)
            assert not cs.is_satisfied(list(w.values))

    def test_mutated_claim_hash(self, kyc_circuits, kyc_vc):
        for cs in kyc_circuits.values():
            values = list(generate_witness(cs, kyc_vc, SUBJECT.secret_key, NONCE, AUX).values)
            for name in ("H[0]", "H[1]", "H[2]"):
                idx = 1 + cs.public_input_layout.index(name)
                mutated = list(values)
                mutated[idx] += 1
                assert not cs.is_satisfied(mutated)

    def test_sanctioned_with_forged_path(self, kyc_circuits):
        """A sanctioned id cannot borrow the gap path of another value."""
        from corpus import KYC_SCHEMA
        from zkperm.identity.credentials import value_code

        vc = issue_credential(ISSUER.secret_key, SUBJECT.public_key, kyc_attributes(unique_id="u-7"), KYC_SCHEMA)
        lo, hi, path = SANCTIONS.gap_witness(value_code("string", "u-42"))
        forged = {2: MembershipWitness(path, lo, hi)}
        cs = kyc_circuits["commit_and_prove"]
        w = generate_witness(cs, vc, SUBJECT.secret_key, NONCE, AUX, merkle_paths=forged)
        assert not cs.is_satisfied(list(w.values))

    def test_nonce_out_of_field(self, kyc_circuits, kyc_vc):
        with pytest.raises(CircuitError):
            generate_witness(kyc_circuits["baseline"], kyc_vc, SUBJECT.secret_key, -1, AUX)


# -- oracle equivalence on a fixed mixed policy ---------------------------------

MIXED_SET = MembershipSet("colors", "string", ("red", "green", "blue", "cyan", "black"), 3)
MIXED_SCHEMA = CredentialSchema(
    "mixed",
    (
        AttributeSpec("s", "string"),
        AttributeSpec("i", "integer"),
        AttributeSpec("d", "date"),
        AttributeSpec("m", "string"),
        AttributeSpec("z", "integer"),
    ),
)
MIXED_CONDITIONS = bind_conditions(
    [
        Condition("s", "EQ", "green"),
        Condition("i", "GT", -5),
        Condition("d", "LEQ", EIGHTEEN_YEARS, True),
        Condition("m", "IN", MIXED_SET.ref),
        Condition("z", "NEQ", 0),
        Condition("i", "LT", 1 << 40),
        Condition("s", "NOTIN", MIXED_SET.ref),
    ],
    MIXED_SCHEMA,
)
MIXED_CS = {}


def _mixed(scheme):
    if scheme not in MIXED_CS:
        MIXED_CS[scheme] = compile_policy_circuit(MIXED_CONDITIONS, scheme, 3)
    return MIXED_CS[scheme]


words = st.sampled_from(["red", "green", "blue", "cyan", "black", "white", "plum", ""]).filter(bool)
ints = st.one_of(
    st.integers(-10, 10),
    st.sampled_from([INT_MIN, INT_MAX, (1 << 40) - 1, 1 << 40]),
    st.integers(INT_MIN, INT_MAX),
)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(
    s=words,
    i=ints,
    dob_delta=st.integers(-3, 3) | st.integers(-(10**9), 10**9),
    m=words,
    z=st.integers(-2, 2),
    scheme=st.sampled_from(["baseline", "commit_and_prove"]),
)
def test_satisfaction_matches_oracle(s, i, dob_delta, m, z, scheme):
    now = NOW
    dob = now - EIGHTEEN_YEARS + dob_delta
    assume(INT_MIN <= dob <= INT_MAX)
    attrs = [
        Attribute("s", s, "string"),
        Attribute("i", i, "integer"),
        Attribute("d", dob, "date"),
        Attribute("m", m, "string"),
        Attribute("z", z, "integer"),
    ]
    vc = issue_credential(ISSUER.secret_key, SUBJECT.public_key, attrs, MIXED_SCHEMA)
    aux = AuxData({MIXED_SET.ref: MIXED_SET}, now)
    cs = _mixed(scheme)
    w = generate_witness(cs, vc, SUBJECT.secret_key, NONCE, aux)
    assert cs.is_satisfied(list(w.values)) == evaluate_policy_plain(vc, MIXED_CONDITIONS, aux)


@settings(max_examples=15, deadline=None)
@given(s=words, i=ints, z=st.integers(-2, 2))
def test_baseline_satisfaction_implies_cp(s, i, z):
    attrs = [
        Attribute("s", s, "string"),
        Attribute("i", i, "integer"),
        Attribute("d", DOB, "date"),
        Attribute("m", "red", "string"),
        Attribute("z", z, "integer"),
    ]
    vc = issue_credential(ISSUER.secret_key, SUBJECT.public_key, attrs, MIXED_SCHEMA)
    aux = AuxData({MIXED_SET.ref: MIXED_SET}, NOW)
    sat = {
        scheme: _mixed(scheme).is_satisfied(list(generate_witness(_mixed(scheme), vc, SUBJECT.secret_key, NONCE, aux).values))
        for scheme in ("baseline", "commit_and_prove")
    }
    assert not sat["baseline"] or sat["commit_and_prove"]


def test_forged_issuer_signature_only_caught_by_baseline():
    """cp moves claim-signature checks out of the circuit; baseline keeps them."""
    from zkperm.identity import VerifiableCredential

    vc = issue_credential(ISSUER.secret_key, SUBJECT.public_key, kyc_attributes(), __import__("corpus").KYC_SCHEMA)
    sigs = list(vc.claim_signatures)
    sigs[0], sigs[1] = sigs[1], sigs[0]
    forged = VerifiableCredential(vc.issuer_public_key, vc.claims, tuple(sigs), vc.schema_id)
    base = compile_policy_circuit(KYC_CONDITIONS, "baseline")
    cp = compile_policy_circuit(KYC_CONDITIONS, "commit_and_prove")
    assert not base.is_satisfied(list(generate_witness(base, forged, SUBJECT.secret_key, NONCE, AUX).values))
    assert cp.is_satisfied(list(generate_witness(cp, forged, SUBJECT.secret_key, NONCE, AUX).values))


def test_unknown_set_in_aux():
    cs = compile_policy_circuit(KYC_CONDITIONS, "commit_and_prove")
    vc = issue_credential(ISSUER.secret_key, SUBJECT.public_key, kyc_attributes(), __import__("corpus").KYC_SCHEMA)
    with pytest.raises((CircuitError, PolicyError)):
        generate_witness(cs, vc, SUBJECT.secret_key, NONCE, AuxData({}, NOW))
